"""
Importance-sampling estimator of the underlap coefficient.

The proposal is the equally weighted mixture q = (1/K) sum_k f_k. With that
choice every weight max_k f_k / q lies in [1, K], so the estimate does too
and its variance is at most UNL (K - UNL) / M.
"""

import logging
import math
from dataclasses import asdict, dataclass
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from core.exceptions import ArgumentError, ShapeError
from core.utils import RandomLike, derive_seed, map_ordered, seed_of
from density.distributions import DensityModel, MixedPoints
from density.operations import shared_signature

logger = logging.getLogger(__name__)

BOUND_TOLERANCE = 1e-9


@dataclass(frozen=True)
class UnlEstimate:
    """One importance-sampling estimate with weight diagnostics"""

    value: float
    m: int
    k_groups: int
    weight_mean: float
    weight_max: float
    ess: float
    seed: Optional[int]

    @property
    def variance_bound(self) -> float:
        return variance_bound(self.k_groups, self.value, self.m)

    def to_dict(self) -> Dict:
        payload = asdict(self)
        payload['variance_bound'] = self.variance_bound
        return payload


@dataclass(frozen=True)
class UnlPosterior:
    """UNL estimates, one per posterior draw of the group densities"""

    draws: List[UnlEstimate]

    def __post_init__(self):
        if not self.draws:
            raise ArgumentError("a UNL posterior needs at least one draw")
        first = self.draws[0]
        for draw in self.draws[1:]:
            if draw.k_groups != first.k_groups or draw.m != first.m:
                raise ShapeError("all posterior draws must share K and M")

    @property
    def k_groups(self) -> int:
        return self.draws[0].k_groups

    @property
    def m(self) -> int:
        return self.draws[0].m

    @property
    def values(self) -> np.ndarray:
        return np.array([draw.value for draw in self.draws])

    def summary(self) -> Dict[str, float]:
        values = self.values
        low, median, high = np.quantile(values, [0.025, 0.5, 0.975])
        return {
            'mean': float(values.mean()),
            'sd': float(values.std(ddof=1)) if values.size > 1 else 0.0,
            'q025': float(low),
            'median': float(median),
            'q975': float(high),
            'n_draws': int(values.size),
            'k_groups': self.k_groups,
            'm': self.m,
        }

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            's': np.arange(1, len(self.draws) + 1),
            'value': self.values,
            'ess': [draw.ess for draw in self.draws],
            'weight_max': [draw.weight_max for draw in self.draws],
            'variance_bound': [draw.variance_bound for draw in self.draws],
        })

    def to_csv(self, path) -> None:
        self.to_frame().to_csv(path, index=False)

    def to_dict(self) -> Dict:
        return {
            'summary': self.summary(),
            'draws': [draw.to_dict() for draw in self.draws],
        }


def importance_weights(groups: Sequence[DensityModel], points: MixedPoints) -> np.ndarray:
    """
    Weights max_k f_k(x) / q(x) for the equal-weight mixture proposal.

    Shifting by the row maximum gives w = K / sum_k exp(log f_k - max log f),
    so identical groups produce weights of exactly 1 and perfectly separated
    groups weights of exactly K.
    """
    log_f = np.stack([group.log_pdf(points) for group in groups])
    shifted = log_f - log_f.max(axis=0)
    return len(groups) / np.exp(shifted).sum(axis=0)


def draw_from_proposal(groups: Sequence[DensityModel], rng: np.random.Generator, m: int) -> MixedPoints:
    """Ancestral sampling from (1/K) sum_k f_k: group counts first, then group draws"""
    k = len(groups)
    counts = rng.multinomial(m, np.full(k, 1.0 / k))
    batches = [group.draw(rng, int(count)) for group, count in zip(groups, counts) if count > 0]
    return MixedPoints.concatenate(batches)


def estimate_unl(groups: Sequence[DensityModel], m: int, rng: RandomLike = None) -> UnlEstimate:
    """Importance-sampling UNL estimate from m proposal draws"""
    groups = list(groups)
    if len(groups) < 2:
        raise ArgumentError(f"UNL needs at least two groups, got {len(groups)}")
    if m < 1:
        raise ArgumentError(f"m must be >= 1, got {m}")
    shared_signature(groups)
    seed = seed_of(rng)
    generator = np.random.default_rng(rng)

    points = draw_from_proposal(groups, generator, int(m))
    weights = importance_weights(groups, points)
    total = float(weights.sum())
    value = total / m
    return UnlEstimate(
        value=value,
        m=int(m),
        k_groups=len(groups),
        weight_mean=value,
        weight_max=float(weights.max()),
        ess=total ** 2 / float(np.sum(weights ** 2)),
        seed=seed,
    )


def estimate_unl_posterior(
    group_draws: Sequence[Sequence[DensityModel]],
    m: int,
    seed: int,
    workers: Optional[int] = None,
) -> UnlPosterior:
    """
    One UNL estimate per row of an S x K matrix of group densities.

    Row s is estimated under derive_seed(seed, s), so results do not depend
    on the number of workers.
    """
    rows = [list(row) for row in group_draws]
    if not rows:
        raise ArgumentError("group_draws must contain at least one row")
    k = len(rows[0])
    signature = shared_signature(rows[0]) if k else None
    for index, row in enumerate(rows):
        if len(row) != k:
            raise ShapeError(f"row {index} has {len(row)} groups, expected {k}")
        if shared_signature(row) != signature:
            raise ShapeError(f"row {index} has support {row[0].signature}, expected {signature}")

    logger.info(f"Estimating UNL for {len(rows)} posterior draws (K={k}, M={m})")

    def run(index: int) -> UnlEstimate:
        return estimate_unl(rows[index], m, rng=derive_seed(seed, index))

    return UnlPosterior(map_ordered(run, range(len(rows)), workers=workers))


def variance_bound(k_groups: int, unl: float, m: int) -> float:
    """Upper bound UNL (K - UNL) / M on the estimator variance"""
    if m < 1:
        raise ArgumentError(f"m must be >= 1, got {m}")
    if not (1.0 - BOUND_TOLERANCE <= unl <= k_groups + BOUND_TOLERANCE):
        raise ArgumentError(f"UNL {unl} lies outside [1, {k_groups}]")
    unl = min(max(unl, 1.0), float(k_groups))
    return unl * (k_groups - unl) / m


def conservative_sample_size(k_groups: int, max_variance: float) -> int:
    """
    Smallest M whose worst-case bound stays below max_variance.

    UNL (K - UNL) peaks at K^2 / 4 over [1, K] for K >= 2.
    """
    if k_groups < 2:
        raise ArgumentError("K must be >= 2")
    if max_variance <= 0:
        raise ArgumentError("max_variance must be positive")
    return int(math.ceil(k_groups ** 2 / (4.0 * max_variance)))


def overlap_coefficient(groups: Sequence[DensityModel], m: int, rng: RandomLike = None) -> float:
    """OVL = 2 - UNL for two groups"""
    if len(groups) != 2:
        raise ArgumentError("the overlap coefficient is defined for exactly two groups")
    return 2.0 - estimate_unl(groups, m, rng).value
