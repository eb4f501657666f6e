"""
Density models over mixed continuous/categorical supports.

A point lives in R^p x S, where S is a product of finite category sets.
Points travel in batches (MixedPoints): a (n, p) float block and a (n, d)
integer block of 0-based category indices. Variables are indexed with the
continuous coordinates first, then the categorical ones.

Models are immutable after construction. Covariances are factorized once,
when the model is built, and rejected there if they are not positive
definite.
"""

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import ClassVar, List, Sequence, Tuple

import numpy as np
from scipy import linalg
from scipy.special import logsumexp

from core.exceptions import ArgumentError, NumericError, ShapeError

logger = logging.getLogger(__name__)

PROBABILITY_TOLERANCE = 1e-12
LOG_2PI = np.log(2.0 * np.pi)


def _frozen(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


def check_probability_vector(values, name: str = 'probability vector') -> np.ndarray:
    """Validate a nonnegative vector summing to one and return it as float array"""
    vector = np.asarray(values, dtype=float)
    if vector.ndim != 1 or vector.size == 0:
        raise ArgumentError(f"{name} must be a nonempty 1-D vector")
    if not np.all(np.isfinite(vector)) or np.any(vector < 0):
        raise ArgumentError(f"{name} has negative or non-finite entries: {vector}")
    if abs(vector.sum() - 1.0) > PROBABILITY_TOLERANCE:
        raise ArgumentError(f"{name} sums to {vector.sum():.15g}, not 1")
    return vector


@dataclass(frozen=True)
class SupportSignature:
    """Number of continuous coordinates and the cardinality of each categorical variable"""

    p_continuous: int
    categorical_cardinalities: Tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, 'categorical_cardinalities',
                           tuple(int(c) for c in self.categorical_cardinalities))
        if self.p_continuous < 0:
            raise ArgumentError("p_continuous must be >= 0")
        if any(c < 2 for c in self.categorical_cardinalities):
            raise ArgumentError(
                f"categorical cardinalities must be >= 2, got {self.categorical_cardinalities}"
            )
        if self.n_variables == 0:
            raise ArgumentError("a support needs at least one variable")

    @property
    def n_categorical(self) -> int:
        return len(self.categorical_cardinalities)

    @property
    def n_variables(self) -> int:
        return self.p_continuous + self.n_categorical

    @property
    def n_states(self) -> int:
        return int(np.prod(self.categorical_cardinalities, dtype=np.int64)) if self.n_categorical else 1

    def split(self, keep: Sequence[int]) -> Tuple[List[int], List[int]]:
        """Split variable indices into (continuous indices, categorical indices)"""
        keep = sorted(set(int(i) for i in keep))
        if not keep:
            raise ArgumentError("keep must name at least one variable")
        if keep[0] < 0 or keep[-1] >= self.n_variables:
            raise ArgumentError(
                f"variable indices {keep} out of range for {self.n_variables} variables"
            )
        continuous = [i for i in keep if i < self.p_continuous]
        categorical = [i - self.p_continuous for i in keep if i >= self.p_continuous]
        return continuous, categorical


@dataclass(frozen=True, eq=False)
class MixedPoints:
    """A batch of n points: continuous block (n, p) and categorical block (n, d)"""

    continuous: np.ndarray
    categorical: np.ndarray = field(default=None)

    def __post_init__(self):
        continuous = np.asarray(self.continuous, dtype=float)
        if continuous.ndim == 1:
            continuous = continuous[:, None]
        categorical = self.categorical
        if categorical is None:
            categorical = np.zeros((continuous.shape[0], 0), dtype=np.int64)
        categorical = np.asarray(categorical, dtype=np.int64)
        if categorical.ndim == 1:
            categorical = categorical[:, None]
        if continuous.ndim != 2 or categorical.ndim != 2:
            raise ShapeError("point blocks must be 2-D")
        if continuous.shape[0] != categorical.shape[0]:
            raise ShapeError(
                f"continuous block has {continuous.shape[0]} rows, "
                f"categorical block has {categorical.shape[0]}"
            )
        object.__setattr__(self, 'continuous', continuous)
        object.__setattr__(self, 'categorical', categorical)

    @classmethod
    def empty(cls, signature: SupportSignature, n: int = 0) -> 'MixedPoints':
        return cls(np.zeros((n, signature.p_continuous)),
                   np.zeros((n, signature.n_categorical), dtype=np.int64))

    @classmethod
    def categorical_only(cls, categorical) -> 'MixedPoints':
        categorical = np.atleast_2d(np.asarray(categorical, dtype=np.int64))
        return cls(np.zeros((categorical.shape[0], 0)), categorical)

    @classmethod
    def concatenate(cls, batches: Sequence['MixedPoints']) -> 'MixedPoints':
        return cls(np.concatenate([b.continuous for b in batches], axis=0),
                   np.concatenate([b.categorical for b in batches], axis=0))

    @property
    def n(self) -> int:
        return self.continuous.shape[0]

    def __len__(self) -> int:
        return self.n

    def take(self, index) -> 'MixedPoints':
        return MixedPoints(self.continuous[index], self.categorical[index])

    def check(self, signature: SupportSignature) -> 'MixedPoints':
        if self.continuous.shape[1] != signature.p_continuous:
            raise ShapeError(
                f"points have {self.continuous.shape[1]} continuous coordinates, "
                f"model expects {signature.p_continuous}"
            )
        if self.categorical.shape[1] != signature.n_categorical:
            raise ShapeError(
                f"points have {self.categorical.shape[1]} categorical entries, "
                f"model expects {signature.n_categorical}"
            )
        if self.n and signature.n_categorical:
            cards = np.asarray(signature.categorical_cardinalities)
            if np.any(self.categorical < 0) or np.any(self.categorical >= cards):
                raise ShapeError("categorical entries must be valid 0-based category indices")
        return self


class DensityModel(ABC):
    """Evaluable and sampleable probability model on a mixed support"""

    kind: ClassVar[str]

    @property
    @abstractmethod
    def signature(self) -> SupportSignature:
        ...

    @abstractmethod
    def log_pdf(self, points: MixedPoints) -> np.ndarray:
        """Log density of every point in the batch, shape (n,)"""

    @abstractmethod
    def draw(self, rng: np.random.Generator, n: int) -> MixedPoints:
        """n i.i.d. draws"""

    def __repr__(self):
        return f"{type(self).__name__}({self.signature})"


class Gaussian(DensityModel):
    """Multivariate normal with a Cholesky factor computed at construction"""

    kind = 'gaussian'

    def __init__(self, mean, cov):
        mean = np.atleast_1d(np.asarray(mean, dtype=float)).copy()
        cov = np.atleast_2d(np.asarray(cov, dtype=float)).copy()
        p = mean.shape[0]
        if mean.ndim != 1 or cov.shape != (p, p):
            raise ShapeError(f"mean of length {p} needs a {p}x{p} covariance, got {cov.shape}")
        if not np.all(np.isfinite(mean)) or not np.all(np.isfinite(cov)):
            raise NumericError("Gaussian parameters must be finite")
        scale = max(1.0, float(np.max(np.abs(cov))))
        if np.max(np.abs(cov - cov.T)) > 1e-10 * scale:
            raise NumericError("covariance matrix is not symmetric")
        cov = 0.5 * (cov + cov.T)
        try:
            chol = linalg.cholesky(cov, lower=True)
        except linalg.LinAlgError as exc:
            raise NumericError(f"covariance matrix is not positive definite: {exc}") from exc
        if np.any(np.diag(chol) <= 0):
            raise NumericError("covariance matrix is not positive definite")
        self._mean = _frozen(mean)
        self._cov = _frozen(cov)
        self._chol = _frozen(chol)
        self._half_log_det = float(np.sum(np.log(np.diag(chol))))
        self._signature = SupportSignature(p)

    @property
    def signature(self) -> SupportSignature:
        return self._signature

    @property
    def mean(self) -> np.ndarray:
        return self._mean

    @property
    def cov(self) -> np.ndarray:
        return self._cov

    @property
    def chol(self) -> np.ndarray:
        return self._chol

    def log_pdf(self, points: MixedPoints) -> np.ndarray:
        return self.log_pdf_continuous(points.continuous)

    def log_pdf_continuous(self, x: np.ndarray) -> np.ndarray:
        diff = (x - self._mean).T
        solved = linalg.solve_triangular(self._chol, diff, lower=True, check_finite=False)
        p = self._mean.shape[0]
        return -0.5 * np.sum(solved ** 2, axis=0) - self._half_log_det - 0.5 * p * LOG_2PI

    def draw_continuous(self, rng: np.random.Generator, n: int) -> np.ndarray:
        z = rng.standard_normal((n, self._mean.shape[0]))
        return self._mean + z @ self._chol.T

    def draw(self, rng: np.random.Generator, n: int) -> MixedPoints:
        return MixedPoints(self.draw_continuous(rng, n))


class CategoricalProduct(DensityModel):
    """Independent categorical variables, one probability vector each"""

    kind = 'catprod'

    def __init__(self, probs: Sequence):
        if len(probs) == 0:
            raise ArgumentError("CategoricalProduct needs at least one variable")
        vectors = []
        for k, vector in enumerate(probs):
            vector = check_probability_vector(vector, name=f"category probabilities of variable {k}")
            vectors.append(_frozen(vector.copy()))
        self._probs = tuple(vectors)
        with np.errstate(divide='ignore'):
            self._log_probs = tuple(_frozen(np.log(v)) for v in vectors)
        self._signature = SupportSignature(0, tuple(v.size for v in vectors))

    @property
    def signature(self) -> SupportSignature:
        return self._signature

    @property
    def probs(self) -> Tuple[np.ndarray, ...]:
        return self._probs

    def log_pdf(self, points: MixedPoints) -> np.ndarray:
        return self.log_pmf(points.categorical)

    def log_pmf(self, categorical: np.ndarray) -> np.ndarray:
        total = np.zeros(categorical.shape[0])
        for k, log_p in enumerate(self._log_probs):
            total = total + log_p[categorical[:, k]]
        return total

    def draw_categorical(self, rng: np.random.Generator, n: int) -> np.ndarray:
        columns = [rng.choice(v.size, size=n, p=v) for v in self._probs]
        return np.column_stack(columns).astype(np.int64) if columns else np.zeros((n, 0), dtype=np.int64)

    def draw(self, rng: np.random.Generator, n: int) -> MixedPoints:
        return MixedPoints.categorical_only(self.draw_categorical(rng, n).reshape(n, -1))

    def joint_pmf(self) -> np.ndarray:
        """Full joint probability table, one axis per variable"""
        table = self._probs[0]
        for vector in self._probs[1:]:
            table = np.multiply.outer(table, vector)
        return table


class MixedProduct(DensityModel):
    """Gaussian block times categorical block, independent within a component"""

    kind = 'mixed'

    def __init__(self, continuous: Gaussian, discrete: CategoricalProduct):
        if not isinstance(continuous, Gaussian) or not isinstance(discrete, CategoricalProduct):
            raise ArgumentError("MixedProduct needs a Gaussian and a CategoricalProduct")
        self._continuous = continuous
        self._discrete = discrete
        self._signature = SupportSignature(continuous.signature.p_continuous,
                                           discrete.signature.categorical_cardinalities)

    @property
    def signature(self) -> SupportSignature:
        return self._signature

    @property
    def continuous(self) -> Gaussian:
        return self._continuous

    @property
    def discrete(self) -> CategoricalProduct:
        return self._discrete

    def log_pdf(self, points: MixedPoints) -> np.ndarray:
        return (self._continuous.log_pdf_continuous(points.continuous)
                + self._discrete.log_pmf(points.categorical))

    def draw(self, rng: np.random.Generator, n: int) -> MixedPoints:
        x = self._continuous.draw_continuous(rng, n)
        c = self._discrete.draw_categorical(rng, n).reshape(n, -1)
        return MixedPoints(x, c)


class Mixture(DensityModel):
    """Finite mixture; every component shares one support signature"""

    kind = 'mixture'

    def __init__(self, weights, components: Sequence[DensityModel]):
        weights = check_probability_vector(weights, name='mixture weights')
        components = tuple(components)
        if len(components) != weights.size:
            raise ShapeError(f"{weights.size} weights for {len(components)} components")
        signature = components[0].signature
        for component in components[1:]:
            if component.signature != signature:
                raise ShapeError(
                    f"mixture components disagree on support: {signature} vs {component.signature}"
                )
        self._weights = _frozen(weights.copy())
        with np.errstate(divide='ignore'):
            self._log_weights = _frozen(np.log(weights))
        self._components = components
        self._signature = signature

    @property
    def signature(self) -> SupportSignature:
        return self._signature

    @property
    def weights(self) -> np.ndarray:
        return self._weights

    @property
    def components(self) -> Tuple[DensityModel, ...]:
        return self._components

    def log_pdf(self, points: MixedPoints) -> np.ndarray:
        terms = np.stack([lw + c.log_pdf(points)
                          for lw, c in zip(self._log_weights, self._components)])
        return logsumexp(terms, axis=0)

    def draw(self, rng: np.random.Generator, n: int) -> MixedPoints:
        labels = rng.choice(self._weights.size, size=n, p=self._weights)
        out_continuous = np.zeros((n, self._signature.p_continuous))
        out_categorical = np.zeros((n, self._signature.n_categorical), dtype=np.int64)
        for index, component in enumerate(self._components):
            members = np.flatnonzero(labels == index)
            if members.size == 0:
                continue
            batch = component.draw(rng, members.size)
            out_continuous[members] = batch.continuous
            out_categorical[members] = batch.categorical
        return MixedPoints(out_continuous, out_categorical)
