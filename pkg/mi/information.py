"""
Monte Carlo mutual information between a group label Z and a variable X.

The joint law is p(k, x) = pi_k f_k(x). All quantities are in nats.
"""

import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np
import pandas as pd
from scipy import stats
from scipy.special import logsumexp

from core.exceptions import ArgumentError
from core.utils import RandomLike, derive_seed, map_ordered
from density.distributions import DensityModel, Gaussian, MixedPoints, check_probability_vector
from density.operations import shared_signature
from unl.estimator import estimate_unl, variance_bound

logger = logging.getLogger(__name__)

MI_Z_CEILING = 1.0 + 1e-6


@dataclass(frozen=True, eq=False)
class LabeledMixture:
    """Group prevalences pi and group densities f_k"""

    priors: np.ndarray
    groups: Sequence[DensityModel]

    def __post_init__(self):
        priors = check_probability_vector(self.priors, name='label priors')
        groups = tuple(self.groups)
        if len(groups) != priors.size:
            raise ArgumentError(f"{priors.size} priors for {len(groups)} groups")
        shared_signature(groups)
        object.__setattr__(self, 'priors', priors)
        object.__setattr__(self, 'groups', groups)

    @property
    def k_groups(self) -> int:
        return len(self.groups)


@dataclass(frozen=True)
class MutualInformationEstimate:
    value: float
    stderr: float
    m: int


def entropy_labels(priors) -> float:
    """Shannon entropy of the label distribution, 0 log 0 = 0"""
    priors = check_probability_vector(priors, name='label priors')
    return float(stats.entropy(priors))


def estimate_mutual_information(model: LabeledMixture, m: int, rng: RandomLike = None) -> MutualInformationEstimate:
    """Average of log f_z(x) - log p_X(x) over m joint draws, clipped below at 0"""
    if m < 1:
        raise ArgumentError(f"m must be >= 1, got {m}")
    generator = np.random.default_rng(rng)
    counts = generator.multinomial(m, model.priors)
    labels = np.repeat(np.arange(model.k_groups), counts)
    batches = [group.draw(generator, int(count))
               for group, count in zip(model.groups, counts) if count > 0]
    points = MixedPoints.concatenate(batches)

    log_f = np.stack([group.log_pdf(points) for group in model.groups])
    with np.errstate(divide='ignore'):
        log_priors = np.log(model.priors)
    log_marginal = logsumexp(log_f + log_priors[:, None], axis=0)
    terms = log_f[labels, np.arange(m)] - log_marginal
    stderr = float(terms.std(ddof=1) / math.sqrt(m)) if m > 1 else 0.0
    return MutualInformationEstimate(value=max(0.0, float(terms.mean())), stderr=stderr, m=int(m))


def mutual_information(model: LabeledMixture, m: int, rng: RandomLike = None) -> float:
    return estimate_mutual_information(model, m, rng).value


def normalized_mi_z(mi: float, priors) -> float:
    """I(Z; X) / H(Z), clamped to [0, 1 + 1e-6]"""
    entropy = entropy_labels(priors)
    if entropy <= 0.0:
        raise ArgumentError("label entropy is zero; MI_Z is undefined for a degenerate prior")
    return float(min(max(mi / entropy, 0.0), MI_Z_CEILING))


BALANCED = (1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0)
IMBALANCED = (0.495, 0.01, 0.495)


@dataclass(frozen=True)
class CurveScenario:
    """
    Three unit-variance Gaussian groups indexed by a separation D.

    symmetric: means (-D, 0, D).
    shifted:   means (-0.1, D, 0); the second group, the rare one under the
               imbalanced prevalence, is the one moved away.
    """

    family: str = 'symmetric'
    prevalence: str = 'balanced'

    FAMILIES = ('symmetric', 'shifted')
    PREVALENCES = {'balanced': BALANCED, 'imbalanced': IMBALANCED}

    def __post_init__(self):
        if self.family not in self.FAMILIES:
            raise ArgumentError(f"unknown curve family {self.family!r}; expected one of {self.FAMILIES}")
        if self.prevalence not in self.PREVALENCES:
            raise ArgumentError(
                f"unknown prevalence {self.prevalence!r}; expected one of {sorted(self.PREVALENCES)}"
            )

    @property
    def priors(self) -> np.ndarray:
        priors = np.asarray(self.PREVALENCES[self.prevalence])
        return priors / priors.sum()

    def means(self, d: float) -> List[float]:
        if self.family == 'symmetric':
            return [-d, 0.0, d]
        return [-0.1, d, 0.0]

    def groups(self, d: float) -> List[Gaussian]:
        return [Gaussian(mean, 1.0) for mean in self.means(d)]

    def labeled_mixture(self, d: float) -> LabeledMixture:
        return LabeledMixture(self.priors, self.groups(d))


def mi_unl_curve(scenario: CurveScenario, d_grid: Sequence[float], m: int, seed: int,
                 workers: Optional[int] = None, bits: bool = False) -> pd.DataFrame:
    """
    UNL and MI_Z along a grid of separations.

    Columns: D, unl, unl_stderr_bound, mi_z, mi (nats unless bits=True).
    """
    d_grid = [float(d) for d in d_grid]
    if not d_grid:
        raise ArgumentError("the separation grid is empty")
    priors = scenario.priors

    def row(index: int) -> dict:
        d = d_grid[index]
        estimate = estimate_unl(scenario.groups(d), m, rng=derive_seed(seed, 2 * index))
        mi = mutual_information(scenario.labeled_mixture(d), m, rng=derive_seed(seed, 2 * index + 1))
        return {
            'D': d,
            'unl': estimate.value,
            'unl_stderr_bound': math.sqrt(variance_bound(estimate.k_groups, estimate.value, m)),
            'mi_z': normalized_mi_z(mi, priors),
            'mi': mi / math.log(2.0) if bits else mi,
        }

    logger.info(f"Computing UNL/MI_Z curve: {scenario.family}, {scenario.prevalence}, {len(d_grid)} points")
    return pd.DataFrame(map_ordered(row, range(len(d_grid)), workers=workers))
