"""
Simulation Service for the benchmark examples

Generates the synthetic datasets used to exercise the marginal (A, B) and
conditional (C1, C2, D) pipelines. Each generator is deterministic given its
seed; the response column is always named y.
"""

import logging
from typing import Dict

import numpy as np
from scipy import stats

from core.dataset import MixedDataset
from core.exceptions import ArgumentError

logger = logging.getLogger(__name__)

MIN_ROWS = 10


class SimulationService:
    """Generators for Examples A, B, C1, C2 and D"""

    DEFAULT_SIZES = {'A': 600, 'B': 600, 'C1': 800, 'C2': 800, 'D': 1000}
    NOISE_SD = 0.1
    MIXTURE_SD = 0.4

    # Example D
    D_DIMENSION = 20
    D_MEAN = 4.0
    D_VARIANCE = 4.0
    D_CORRELATION = 0.75
    D_BETA = ((0.0, 1.0), (4.5, 0.1))
    D_VARIANCES = (1.0 / 16.0, 1.0 / 8.0)
    D_GATE_MEANS = (4.0, 6.0)
    D_GATE_PRECISIONS = (2.0, 2.0)

    DESCRIPTIONS = {
        'A': "y depends on x through three bands",
        'B': "y depends on the product x1 * x2 only",
        'C1': "slopes of xc differ across xd",
        'C2': "slopes of xc are shared across xd",
        'D': "x1-gated regression mixture with 20 correlated covariates",
    }

    def __init__(self, seed: int):
        self.seed = int(seed)
        self.rng = np.random.default_rng(self.seed)

    @classmethod
    def default_size(cls, example: str, desk_scale: bool = False) -> int:
        size = cls.DEFAULT_SIZES[cls.check_example(example)]
        return size // 2 if desk_scale else size

    @classmethod
    def check_example(cls, example: str) -> str:
        key = str(example).upper()
        if key not in cls.DEFAULT_SIZES:
            raise ArgumentError(f"unknown example {example!r}; expected one of {sorted(cls.DEFAULT_SIZES)}")
        return key

    def simulate(self, example: str, n: int = None) -> MixedDataset:
        """
        Generate one dataset

        Args:
            example: one of A, B, C1, C2, D
            n: number of rows, defaults to the example's standard size

        Returns:
            MixedDataset with y first, then the covariates
        """
        key = self.check_example(example)
        n = self.DEFAULT_SIZES[key] if n is None else int(n)
        if n < MIN_ROWS:
            raise ArgumentError(f"n must be >= {MIN_ROWS}, got {n}")
        generator = {
            'A': self._example_a,
            'B': self._example_b,
            'C1': lambda size: self._example_c(size, low_slope=2.0),
            'C2': lambda size: self._example_c(size, low_slope=12.0),
            'D': self._example_d,
        }[key]
        logger.info(f"Simulating example {key} ({self.DESCRIPTIONS[key]}), n={n}, seed={self.seed}")
        return generator(n)

    def _example_a(self, n: int) -> MixedDataset:
        x = self.rng.uniform(-3.0, 3.0, n)
        mean = 2.0 * (x <= -1.0) - 5.0 * (x >= 1.0)
        y = mean + self.NOISE_SD * self.rng.standard_normal(n)
        return MixedDataset.from_arrays(continuous={'y': y, 'x': x})

    def _example_b(self, n: int) -> MixedDataset:
        x1 = self.rng.uniform(-2.0, 2.0, n)
        x2 = self.rng.uniform(-2.0, 2.0, n)
        wave = np.sin(x1 * x2 * np.pi / 2.0)
        mean = np.where(wave <= 0.0, 1.0, -1.0)
        y = mean + self.NOISE_SD * self.rng.standard_normal(n)
        return MixedDataset.from_arrays(continuous={'y': y, 'x1': x1, 'x2': x2})

    def _example_c(self, n: int, low_slope: float) -> MixedDataset:
        """xd = 1 uses slopes +-low_slope around 0; xd = 2 uses +-12 around 80"""
        xc = self.rng.uniform(-3.0, 3.0, n)
        xd = self.rng.integers(0, 2, n)
        slope = np.where(xd == 0, low_slope, 12.0)
        intercept = np.where(xd == 0, 0.0, 80.0)
        sign = np.where(self.rng.random(n) < 0.5, -1.0, 1.0)
        y = intercept + sign * slope * xc + self.MIXTURE_SD * self.rng.standard_normal(n)
        return MixedDataset.from_arrays(
            continuous={'y': y, 'xc': xc},
            categorical={'xd': (xd, ('1', '2'))},
        )

    @classmethod
    def example_d_covariance(cls) -> np.ndarray:
        """Variance 4; correlation 0.75 within the odd and within the even coordinates, 0 across"""
        p = cls.D_DIMENSION
        parity = np.arange(p) % 2
        same_group = parity[:, None] == parity[None, :]
        cov = np.where(same_group, cls.D_CORRELATION * cls.D_VARIANCE, 0.0)
        np.fill_diagonal(cov, cls.D_VARIANCE)
        return cov

    @classmethod
    def example_d_gate(cls, x1) -> np.ndarray:
        """Probability of the first regression given x1"""
        x1 = np.asarray(x1, dtype=float)
        (mu1, mu2), (tau1, tau2) = cls.D_GATE_MEANS, cls.D_GATE_PRECISIONS
        first = tau1 * np.exp(-0.5 * tau1 ** 2 * (x1 - mu1) ** 2)
        second = tau2 * np.exp(-0.5 * tau2 ** 2 * (x1 - mu2) ** 2)
        total = first + second
        # both kernels underflow far from the gate means; split evenly there
        return np.divide(first, total, out=np.full_like(total, 0.5), where=total > 0)

    def _example_d(self, n: int) -> MixedDataset:
        p = self.D_DIMENSION
        x = stats.multivariate_normal(np.full(p, self.D_MEAN), self.example_d_covariance()).rvs(
            size=n, random_state=self.rng,
        ).reshape(n, p)
        first = self.rng.random(n) < self.example_d_gate(x[:, 0])
        (b10, b11), (b20, b21) = self.D_BETA
        mean = np.where(first, b10 + b11 * x[:, 0], b20 + b21 * x[:, 0])
        sd = np.sqrt(np.where(first, self.D_VARIANCES[0], self.D_VARIANCES[1]))
        y = mean + sd * self.rng.standard_normal(n)
        continuous: Dict[str, np.ndarray] = {'y': y}
        continuous.update({f'x{j + 1}': x[:, j] for j in range(p)})
        return MixedDataset.from_arrays(continuous=continuous)


def simulate(example: str, n: int = None, seed: int = 0) -> MixedDataset:
    return SimulationService(seed).simulate(example, n)
