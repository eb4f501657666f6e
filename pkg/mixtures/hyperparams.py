"""
Data-adaptive hyperparameters for the two samplers.

DPM: location and scale priors come from an initial K-means partition of
the continuous block; Dirichlet parameters from the category proportions
scaled by a pseudo-count. LDDP: everything comes from an OLS fit.
"""

import logging
from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np
from scipy import linalg
from sklearn.cluster import KMeans

from core.dataset import MixedDataset
from core.exceptions import ArgumentError, NumericError, ShapeError
from core.utils import RandomLike

logger = logging.getLogger(__name__)

RIDGE_SCALE = 1e-6
RIDGE_FLOOR = 1e-6
LDDP_RIDGE_SCALE = 1e-8
ETA_FLOOR = 1e-2
B_FLOOR = 1e-12
KMEANS_MAX_ITER = 50
KMEANS_RESTARTS = 10


def is_positive_definite(matrix: np.ndarray) -> bool:
    if matrix.size == 0:
        return True
    try:
        linalg.cholesky(matrix, lower=True)
    except linalg.LinAlgError:
        return False
    return True


def ridge_repair(matrix, label: str = 'matrix', scale: float = RIDGE_SCALE) -> Tuple[np.ndarray, bool]:
    """
    Return a symmetric positive definite version of matrix.

    Adds scale * trace / p to the diagonal (RIDGE_FLOOR when the trace is
    zero), growing it tenfold until the Cholesky factorization succeeds.
    The flag is True when a ridge was added.
    """
    matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
    matrix = 0.5 * (matrix + matrix.T)
    if is_positive_definite(matrix):
        return matrix, False
    p = matrix.shape[0]
    ridge = scale * float(np.trace(matrix)) / p
    if not np.isfinite(ridge) or ridge <= 0.0:
        ridge = RIDGE_FLOOR
    for _ in range(12):
        repaired = matrix + ridge * np.eye(p)
        if is_positive_definite(repaired):
            logger.warning(f"Ridge-repaired {label} with {ridge:.3g} on the diagonal")
            return repaired, True
        ridge *= 10.0
    raise NumericError(f"{label} could not be made positive definite")


def _check_pd(matrix: np.ndarray, name: str) -> None:
    if matrix.shape[0] != matrix.shape[1] or not np.allclose(matrix, matrix.T, atol=1e-10):
        raise NumericError(f"{name} must be a symmetric square matrix")
    if not is_positive_definite(matrix):
        raise NumericError(f"{name} is not positive definite")


@dataclass(frozen=True, eq=False)
class DpmHyperparams:
    m0: np.ndarray
    L0: np.ndarray
    nu0: float
    S0: np.ndarray
    eta: List[np.ndarray] = field(default_factory=list)
    ridge_repairs: int = 0
    eta_floors: int = 0

    def __post_init__(self):
        m0 = np.atleast_1d(np.asarray(self.m0, dtype=float))
        p = m0.size
        L0 = np.asarray(self.L0, dtype=float).reshape(p, p)
        S0 = np.asarray(self.S0, dtype=float).reshape(p, p)
        if p:
            _check_pd(L0, 'L0')
            _check_pd(S0, 'S0')
        if self.nu0 <= p + 1:
            raise ArgumentError(f"nu0 must exceed p + 1 = {p + 1}, got {self.nu0}")
        eta = [np.asarray(vector, dtype=float) for vector in self.eta]
        for index, vector in enumerate(eta):
            if vector.ndim != 1 or vector.size < 2 or np.any(vector <= 0):
                raise ArgumentError(f"eta for categorical variable {index} must be positive with >= 2 entries")
        object.__setattr__(self, 'm0', m0)
        object.__setattr__(self, 'L0', L0)
        object.__setattr__(self, 'S0', S0)
        object.__setattr__(self, 'eta', eta)

    @property
    def p(self) -> int:
        return int(self.m0.size)

    @property
    def cardinalities(self) -> Tuple[int, ...]:
        return tuple(vector.size for vector in self.eta)

    def to_dict(self) -> dict:
        return {
            'm0': self.m0.tolist(),
            'L0': self.L0.tolist(),
            'nu0': float(self.nu0),
            'S0': self.S0.tolist(),
            'eta': [vector.tolist() for vector in self.eta],
            'ridge_repairs': self.ridge_repairs,
            'eta_floors': self.eta_floors,
        }


@dataclass(frozen=True, eq=False)
class LddpHyperparams:
    m0: np.ndarray
    S0: np.ndarray
    nu: float
    Psi: np.ndarray
    a: float
    b: float
    sigma2: float = float('nan')
    b_floored: bool = False
    ridge_repaired: bool = False

    def __post_init__(self):
        m0 = np.atleast_1d(np.asarray(self.m0, dtype=float))
        q = m0.size
        S0 = np.asarray(self.S0, dtype=float).reshape(q, q)
        Psi = np.asarray(self.Psi, dtype=float).reshape(q, q)
        _check_pd(S0, 'S0')
        _check_pd(Psi, 'Psi')
        if self.nu <= q + 1:
            raise ArgumentError(f"nu must exceed dim + 1 = {q + 1}, got {self.nu}")
        if self.a <= 0 or self.b <= 0:
            raise ArgumentError("a and b must be positive")
        object.__setattr__(self, 'm0', m0)
        object.__setattr__(self, 'S0', S0)
        object.__setattr__(self, 'Psi', Psi)

    @property
    def dim(self) -> int:
        return int(self.m0.size)

    def to_dict(self) -> dict:
        return {
            'm0': self.m0.tolist(),
            'S0': self.S0.tolist(),
            'nu': float(self.nu),
            'Psi': self.Psi.tolist(),
            'a': float(self.a),
            'b': float(self.b),
            'sigma2': float(self.sigma2),
            'b_floored': self.b_floored,
            'ridge_repaired': self.ridge_repaired,
        }


def kmeans_labels(points: np.ndarray, k: int, rng: RandomLike = None) -> Tuple[np.ndarray, np.ndarray]:
    """Seeded K-means, 50 iterations, best of 10 restarts; returns (labels, centroids)"""
    generator = np.random.default_rng(rng)
    model = KMeans(
        n_clusters=k,
        n_init=KMEANS_RESTARTS,
        max_iter=KMEANS_MAX_ITER,
        random_state=int(generator.integers(2 ** 31 - 1)),
    )
    labels = model.fit_predict(points)
    return labels.astype(np.int64), model.cluster_centers_


def dirichlet_parameters(codes: np.ndarray, cardinality: int, tau_k: float) -> Tuple[np.ndarray, int]:
    """tau_k times the empirical category proportions, floored at ETA_FLOOR"""
    n = codes.size
    proportions = np.bincount(codes, minlength=cardinality) / n if n else np.full(cardinality, 1.0 / cardinality)
    eta = tau_k * proportions
    floored = int(np.sum(eta < ETA_FLOOR))
    return np.maximum(eta, ETA_FLOOR), floored


def derive_dpm_hyperparams(data: MixedDataset, kmeans_k: int, rng: RandomLike = None,
                           tau_k: float = 10.0) -> DpmHyperparams:
    """
    Weakly informative DPM hyperparameters from an initial K-means partition.

    Args:
        data: dataset to be clustered; every column enters the kernel
        kmeans_k: number of K-means clusters
        rng: seed or generator for K-means
        tau_k: pseudo-count of the Dirichlet priors

    Returns:
        DpmHyperparams with m0 the sample mean, L0 the centroid covariance,
        nu0 = p + 2 and S0 = (nu0 + p + 1) times the average within-cluster
        covariance, so the inverse-Wishart mode matches that covariance.
    """
    if kmeans_k < 2:
        raise ArgumentError(f"kmeans_k must be >= 2, got {kmeans_k}")
    n = data.n_rows
    if n < 2 * kmeans_k:
        raise ArgumentError(f"{n} rows are too few for {kmeans_k} K-means clusters (need {2 * kmeans_k})")

    y = data.continuous_block()
    p = y.shape[1]
    nu0 = p + 2.0
    repairs = 0

    if p == 0:
        m0, L0, S0 = np.zeros(0), np.zeros((0, 0)), np.zeros((0, 0))
    else:
        m0 = y.mean(axis=0)
        distinct = np.unique(y, axis=0).shape[0]
        if distinct == 1:
            logger.warning("Continuous block is constant; prior scales fall back to a ridge")
            L0, _ = ridge_repair(np.zeros((p, p)), 'centroid covariance')
            within, _ = ridge_repair(np.zeros((p, p)), 'within-cluster covariance')
            repairs += 2
        elif distinct < kmeans_k:
            raise ArgumentError(f"only {distinct} distinct rows for {kmeans_k} K-means clusters")
        else:
            labels, centroids = kmeans_labels(y, kmeans_k, rng)
            L0, repaired = ridge_repair(np.cov(centroids, rowvar=False).reshape(p, p), 'centroid covariance')
            repairs += int(repaired)
            covariances = [np.cov(y[labels == k], rowvar=False).reshape(p, p)
                           for k in range(kmeans_k) if np.sum(labels == k) >= 2]
            within = np.mean(covariances, axis=0) if covariances else np.zeros((p, p))
            within, repaired = ridge_repair(within, 'within-cluster covariance')
            repairs += int(repaired)
        S0 = (nu0 + p + 1) * within

    eta, floors = [], 0
    codes = data.categorical_block()
    for index, cardinality in enumerate(data.cardinalities()):
        vector, floored = dirichlet_parameters(codes[:, index], cardinality, tau_k)
        eta.append(vector)
        floors += floored
    if floors:
        logger.warning(f"Floored {floors} Dirichlet parameter(s) at {ETA_FLOOR}")

    return DpmHyperparams(m0=m0, L0=L0, nu0=nu0, S0=S0, eta=eta, ridge_repairs=repairs, eta_floors=floors)


def add_intercept(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    x = x.reshape(x.shape[0], -1)
    return np.column_stack([np.ones(x.shape[0]), x])


def derive_lddp_hyperparams(y, X, psi_scale: float = 30.0) -> LddpHyperparams:
    """
    LDDP hyperparameters from ordinary least squares.

    Args:
        y: response vector of length n
        X: design matrix with the intercept column included
        psi_scale: multiplier of sigma^2 (X'X)^-1 in Psi

    Returns:
        m0 = beta_OLS, S0 = sigma^2 (X'X)^-1, nu = dim + 2,
        Psi = psi_scale * sigma^2 (X'X)^-1, a = 2, b = sigma^2 / 2
    """
    y = np.asarray(y, dtype=float).ravel()
    X = np.atleast_2d(np.asarray(X, dtype=float))
    n, q = X.shape
    if y.size != n:
        raise ShapeError(f"design has {n} rows but the response has {y.size} values")
    if n <= q + 1:
        raise ArgumentError(f"{n} observations are too few for {q} regression coefficients")

    gram = X.T @ X
    ridge_repaired = False
    if np.linalg.matrix_rank(gram) < q:
        ridge = LDDP_RIDGE_SCALE * float(np.trace(gram))
        logger.warning(f"Design matrix is rank deficient; adding ridge {ridge:.3g} to X'X")
        gram = gram + ridge * np.eye(q)
        ridge_repaired = True

    beta = linalg.solve(gram, X.T @ y, assume_a='pos')
    residuals = y - X @ beta
    sigma2 = float(residuals @ residuals) / (n - q)
    b = sigma2 / 2.0
    b_floored = b < B_FLOOR
    if b_floored:
        logger.warning(f"Residual variance {sigma2:.3g} is numerically zero; b floored at {B_FLOOR}")
        b = B_FLOOR
    scale = max(sigma2, 2.0 * B_FLOOR)
    gram_inverse = linalg.inv(gram)
    gram_inverse = 0.5 * (gram_inverse + gram_inverse.T)

    return LddpHyperparams(
        m0=beta,
        S0=scale * gram_inverse,
        nu=q + 2.0,
        Psi=psi_scale * scale * gram_inverse,
        a=2.0,
        b=b,
        sigma2=sigma2,
        b_floored=b_floored,
        ridge_repaired=ridge_repaired,
    )
