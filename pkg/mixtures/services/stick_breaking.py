"""Steps shared by both truncated blocked Gibbs samplers"""

from typing import Tuple

import numpy as np

STICK_CEILING = 1.0 - 1e-12


def stick_weights(sticks: np.ndarray) -> np.ndarray:
    """w_l = v_l prod_{m<l} (1 - v_m)"""
    remaining = np.concatenate([[1.0], np.cumprod(1.0 - sticks[:-1])])
    return sticks * remaining


def update_sticks(allocations: np.ndarray, truncation: int, alpha: float,
                  rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray]:
    """
    v_l ~ Beta(1 + n_l, alpha + sum_{m>l} n_m) for l < L, v_L = 1.

    Returns (sticks, weights).
    """
    counts = np.bincount(allocations, minlength=truncation).astype(float)
    tail = np.concatenate([np.cumsum(counts[::-1])[::-1][1:], [0.0]])
    sticks = np.ones(truncation)
    if truncation > 1:
        sticks[:-1] = rng.beta(1.0 + counts[:-1], alpha + tail[:-1])
        sticks[:-1] = np.minimum(sticks[:-1], STICK_CEILING)
    return sticks, stick_weights(sticks)


def update_alpha(sticks: np.ndarray, a_alpha: float, b_alpha: float, rng: np.random.Generator) -> float:
    """alpha ~ Gamma(a_alpha + L - 1, rate b_alpha - sum_{l<L} log(1 - v_l))"""
    truncation = sticks.size
    rate = b_alpha - float(np.sum(np.log1p(-sticks[:-1])))
    return float(rng.gamma(a_alpha + truncation - 1, 1.0 / rate))


def sample_allocations(log_prob: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """One categorical draw per row of an (n, L) matrix of unnormalized log probabilities"""
    n, truncation = log_prob.shape
    if n == 0:
        return np.zeros(0, dtype=np.int64)
    prob = np.exp(log_prob - log_prob.max(axis=1, keepdims=True))
    cdf = np.cumsum(prob, axis=1)
    u = rng.random(n) * cdf[:, -1]
    labels = (cdf <= u[:, None]).sum(axis=1)
    return np.minimum(labels, truncation - 1).astype(np.int64)


def log_weights(weights: np.ndarray) -> np.ndarray:
    with np.errstate(divide='ignore'):
        return np.log(weights)
