"""
Posterior predictive sampling and the statistics used by predictive checks.
"""

import logging
from typing import List, Optional, Sequence, Union

import numpy as np
import pandas as pd
from scipy import stats

from core.exceptions import ArgumentError, ShapeError
from core.utils import RandomLike
from density.distributions import MixedPoints
from mixtures.draws import PosteriorDraws

logger = logging.getLogger(__name__)

Replicates = Union[List[MixedPoints], np.ndarray]


def _lddp_replicate(draws: PosteriorDraws, s: int, x_new: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    components = rng.choice(draws.truncation, size=x_new.shape[0], p=draws.weights[s])
    beta = draws.params['beta'][s][components]
    scale = 1.0 / np.sqrt(draws.params['tau'][s][components])
    return np.sum(x_new * beta, axis=1) + scale * rng.standard_normal(x_new.shape[0])


def posterior_predictive(draws: PosteriorDraws, n_rep: int, rng: RandomLike = None,
                         x_new=None, n_obs: Optional[int] = None) -> Replicates:
    """
    Replicated datasets from the posterior predictive distribution.

    Each replicate picks a retained iteration uniformly at random, then a
    component per observation from that iteration's weights, then a value
    from the component kernel.

    Args:
        draws: fitted chain
        n_rep: number of replicated datasets (0 gives an empty result)
        rng: seed or generator
        x_new: design rows, intercept included; required for LDDP draws and
            rejected for DPM draws
        n_obs: observations per DPM replicate, defaults to the fitted n

    Returns:
        DPM: list of MixedPoints. LDDP: (n_rep, rows of x_new) array.
    """
    if n_rep < 0:
        raise ArgumentError(f"n_rep must be >= 0, got {n_rep}")
    if draws.n_draws == 0:
        raise ArgumentError("the draws hold no retained iterations")
    generator = np.random.default_rng(rng)

    if draws.kind == 'lddp':
        if x_new is None:
            raise ArgumentError("design rows are required for LDDP predictive draws")
        x_new = np.atleast_2d(np.asarray(x_new, dtype=float))
        width = draws.params['beta'].shape[2]
        if x_new.shape[1] != width:
            raise ShapeError(f"design rows have {x_new.shape[1]} columns, the fit has {width}")
        out = np.zeros((n_rep, x_new.shape[0]))
        for r in range(n_rep):
            out[r] = _lddp_replicate(draws, int(generator.integers(draws.n_draws)), x_new, generator)
        return out

    if x_new is not None:
        raise ArgumentError("DPM predictive draws take no design rows")
    size = draws.n if n_obs is None else int(n_obs)
    if size < 1:
        raise ArgumentError("replicates need at least one observation")
    return [draws.mixture(int(generator.integers(draws.n_draws))).draw(generator, size)
            for _ in range(n_rep)]


def sample_statistics(values) -> dict:
    """Skewness, excess kurtosis, standard deviation and maximum of one sample"""
    values = np.asarray(values, dtype=float).ravel()
    return {
        'skewness': float(stats.skew(values)),
        'kurtosis': float(stats.kurtosis(values)),
        'sd': float(values.std(ddof=1)) if values.size > 1 else 0.0,
        'max': float(values.max()),
    }


def predictive_statistics(replicates, observed=None) -> pd.DataFrame:
    """
    One row of sample statistics per replicate.

    replicates is an (n_rep, n) array of responses. With observed, a final
    row labelled 'observed' carries the same statistics for the data.
    """
    replicates = np.atleast_2d(np.asarray(replicates, dtype=float))
    rows = [dict(replicate=str(r + 1), **sample_statistics(values))
            for r, values in enumerate(replicates) if values.size]
    if observed is not None:
        rows.append(dict(replicate='observed', **sample_statistics(observed)))
    return pd.DataFrame(rows, columns=['replicate', 'skewness', 'kurtosis', 'sd', 'max'])


def interval_edges(values, cutoffs: Optional[Sequence[float]] = None) -> np.ndarray:
    """
    Interval boundaries on a covariate; quartiles when no cutoffs are given.

    Returns -inf, the sorted cutoffs, +inf.
    """
    values = np.asarray(values, dtype=float)
    if cutoffs is None:
        cutoffs = np.quantile(values, [0.25, 0.5, 0.75])
    cutoffs = np.unique(np.asarray(cutoffs, dtype=float))
    return np.concatenate([[-np.inf], cutoffs, [np.inf]])


def conditional_interval_samples(draws: PosteriorDraws, X, covariate: int, n_rep: int,
                                 rng: RandomLike = None,
                                 cutoffs: Optional[Sequence[float]] = None) -> pd.DataFrame:
    """
    Predictive responses at the observed design rows, grouped by intervals
    of one covariate, for conditional density plots made elsewhere.

    covariate indexes a column of X (the intercept is column 0). Columns of
    the result: interval, lower, upper, replicate, y.
    """
    if draws.kind != 'lddp':
        raise ArgumentError("conditional predictive samples need LDDP draws")
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if not 0 <= covariate < X.shape[1]:
        raise ArgumentError(f"covariate index {covariate} outside the {X.shape[1]} design columns")
    generator = np.random.default_rng(rng)
    edges = interval_edges(X[:, covariate], cutoffs)

    frames = []
    for interval, (lower, upper) in enumerate(zip(edges[:-1], edges[1:]), start=1):
        rows = X[(X[:, covariate] > lower) & (X[:, covariate] <= upper)]
        if rows.shape[0] == 0:
            logger.warning(f"Covariate interval ({lower}, {upper}] holds no observations")
            continue
        replicates = posterior_predictive(draws, n_rep, generator, x_new=rows)
        frames.append(pd.DataFrame({
            'interval': interval,
            'lower': lower,
            'upper': upper,
            'replicate': np.repeat(np.arange(1, n_rep + 1), rows.shape[0]),
            'y': replicates.ravel(),
        }))
    if not frames:
        return pd.DataFrame(columns=['interval', 'lower', 'upper', 'replicate', 'y'])
    return pd.concat(frames, ignore_index=True)
