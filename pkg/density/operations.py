"""
Operations over density models: evaluation, sampling, analytic
marginalization and affine pushforwards.
"""

import logging
from typing import Sequence, Tuple, Union

import numpy as np

from core.exceptions import ArgumentError, ShapeError
from density.distributions import (
    CategoricalProduct,
    DensityModel,
    Gaussian,
    MixedPoints,
    MixedProduct,
    Mixture,
    SupportSignature,
)

logger = logging.getLogger(__name__)

PointLike = Union[MixedPoints, Tuple, float, int, Sequence[float], np.ndarray]

SINGULARITY_TOLERANCE = 1e-12


def signature_of(model: DensityModel) -> SupportSignature:
    return model.signature


def shared_signature(models: Sequence[DensityModel]) -> SupportSignature:
    """Signature common to every model, or ShapeError"""
    if not models:
        raise ArgumentError("at least one model is required")
    signature = signature_of(models[0])
    for index, model in enumerate(models[1:], start=1):
        if signature_of(model) != signature:
            raise ShapeError(
                f"model {index} has support {signature_of(model)}, expected {signature}"
            )
    return signature


def as_points(point: PointLike, signature: SupportSignature) -> MixedPoints:
    """
    Coerce a single point or a batch into MixedPoints.

    Accepts MixedPoints, a (continuous, categorical) tuple, or a bare array
    when the support is purely continuous or purely categorical.
    """
    if isinstance(point, MixedPoints):
        return point.check(signature)
    mixed = signature.p_continuous > 0 and signature.n_categorical > 0
    if mixed and isinstance(point, tuple) and len(point) == 2:
        continuous = np.asarray(point[0], dtype=float).reshape(-1, signature.p_continuous)
        categorical = np.asarray(point[1], dtype=np.int64).reshape(-1, signature.n_categorical)
        return MixedPoints(continuous, categorical).check(signature)
    values = np.asarray(point)
    if signature.n_categorical == 0:
        return MixedPoints(values.astype(float).reshape(-1, signature.p_continuous)).check(signature)
    if signature.p_continuous == 0:
        categorical = values.astype(np.int64).reshape(-1, signature.n_categorical)
        return MixedPoints.categorical_only(categorical).check(signature)
    raise ShapeError("mixed supports need a (continuous, categorical) pair or MixedPoints")


def log_density(model: DensityModel, point: PointLike) -> float:
    """log f(x) for a single point"""
    points = as_points(point, model.signature)
    if points.n != 1:
        raise ShapeError(f"log_density takes one point, got {points.n}; use log_densities")
    return float(model.log_pdf(points)[0])


def log_densities(model: DensityModel, points: PointLike) -> np.ndarray:
    """log f(x) for every point of a batch"""
    return model.log_pdf(as_points(points, model.signature))


def sample(model: DensityModel, rng: np.random.Generator, n: int) -> MixedPoints:
    if n < 1:
        raise ArgumentError(f"sample size must be >= 1, got {n}")
    return model.draw(rng, int(n))


def marginalize(model: DensityModel, keep: Sequence[int]) -> DensityModel:
    """
    Analytic marginal over the variables in keep.

    Continuous variables come first in the index space. A MixedProduct that
    loses its whole continuous (categorical) block becomes a pure
    CategoricalProduct (Gaussian).
    """
    continuous, categorical = model.signature.split(keep)
    return _marginalize(model, continuous, categorical)


def _marginalize(model: DensityModel, continuous, categorical) -> DensityModel:
    if isinstance(model, Gaussian):
        return Gaussian(model.mean[continuous], model.cov[np.ix_(continuous, continuous)])
    if isinstance(model, CategoricalProduct):
        return CategoricalProduct([model.probs[k] for k in categorical])
    if isinstance(model, MixedProduct):
        if not categorical:
            return _marginalize(model.continuous, continuous, [])
        if not continuous:
            return _marginalize(model.discrete, [], categorical)
        return MixedProduct(_marginalize(model.continuous, continuous, []),
                            _marginalize(model.discrete, [], categorical))
    if isinstance(model, Mixture):
        return Mixture(model.weights,
                       [_marginalize(c, continuous, categorical) for c in model.components])
    raise ArgumentError(f"cannot marginalize {type(model).__name__}")


def _check_invertible(A: np.ndarray) -> None:
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ArgumentError(f"pushforward matrix must be square, got shape {A.shape}")
    # Hadamard's inequality bounds |det A| by the product of row norms.
    scale = float(np.prod(np.linalg.norm(A, axis=1)))
    if scale == 0.0 or abs(np.linalg.det(A)) <= SINGULARITY_TOLERANCE * scale:
        raise ArgumentError("pushforward matrix is numerically singular")


def _linear_image(model: DensityModel, A: np.ndarray, b: np.ndarray) -> DensityModel:
    if isinstance(model, Gaussian):
        if model.signature.p_continuous != A.shape[1]:
            raise ShapeError(
                f"matrix has {A.shape[1]} columns, model has {model.signature.p_continuous} coordinates"
            )
        return Gaussian(A @ model.mean + b, A @ model.cov @ A.T)
    if isinstance(model, Mixture):
        return Mixture(model.weights, [_linear_image(c, A, b) for c in model.components])
    raise ArgumentError(
        f"pushforwards are defined for Gaussians and Gaussian mixtures, not {type(model).__name__}"
    )


def affine_pushforward(model: DensityModel, A, b) -> DensityModel:
    """Exact law of A X + b for an invertible A"""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    _check_invertible(A)
    if b.shape != (A.shape[0],):
        raise ShapeError(f"offset has shape {b.shape}, expected ({A.shape[0]},)")
    return _linear_image(model, A, b)


def project(model: DensityModel, A, b=None) -> DensityModel:
    """Law of A X + b for a full-row-rank q x p matrix A (linear dimension reduction)"""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.zeros(A.shape[0]) if b is None else np.atleast_1d(np.asarray(b, dtype=float))
    if A.shape[0] > A.shape[1] or np.linalg.matrix_rank(A) < A.shape[0]:
        raise ArgumentError(f"projection matrix of shape {A.shape} is not full row rank")
    if b.shape != (A.shape[0],):
        raise ShapeError(f"offset has shape {b.shape}, expected ({A.shape[0]},)")
    return _linear_image(model, A, b)


def moments(model: DensityModel) -> Tuple[np.ndarray, np.ndarray]:
    """Mean and covariance of the continuous block"""
    if isinstance(model, Gaussian):
        return model.mean.copy(), model.cov.copy()
    if isinstance(model, MixedProduct):
        return moments(model.continuous)
    if isinstance(model, Mixture):
        parts = [moments(c) for c in model.components]
        mean = sum(w * m for w, (m, _) in zip(model.weights, parts))
        second = sum(w * (S + np.outer(m, m)) for w, (m, S) in zip(model.weights, parts))
        return mean, second - np.outer(mean, mean)
    raise ArgumentError(f"{type(model).__name__} has no continuous block")
