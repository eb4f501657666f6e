"""
Posterior similarity matrices and representative partitions.

The representative partition is the sampled partition minimizing the
Jensen lower bound to the posterior expected Variation of Information
(base-2 logarithms). Only partitions visited by the sampler are scored.
"""

import logging
from dataclasses import dataclass
from typing import Iterator, List

import numpy as np
import pandas as pd
from django.conf import settings

from core.exceptions import ArgumentError, CapacityError, ShapeError

logger = logging.getLogger(__name__)

ONE_HOT_COLUMNS = 4096


def canonicalize(labels) -> np.ndarray:
    """Relabel clusters 1..k in order of first appearance"""
    labels = np.asarray(labels).ravel()
    if labels.size == 0:
        return labels.astype(np.int64)
    _, first, inverse = np.unique(labels, return_index=True, return_inverse=True)
    rank = np.empty(first.size, dtype=np.int64)
    rank[np.argsort(first)] = np.arange(first.size)
    return rank[inverse] + 1


@dataclass(frozen=True, eq=False)
class Partition:
    """Cluster labels, canonical 1..k by first appearance"""

    labels: np.ndarray

    def __post_init__(self):
        canonical = canonicalize(self.labels)
        canonical.setflags(write=False)
        object.__setattr__(self, 'labels', canonical)

    @property
    def n(self) -> int:
        return int(self.labels.size)

    @property
    def k(self) -> int:
        return int(self.labels.max()) if self.labels.size else 0

    def sizes(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.k + 1)[1:]

    def members(self, cluster: int) -> np.ndarray:
        return np.flatnonzero(self.labels == cluster)

    def __eq__(self, other):
        return isinstance(other, Partition) and np.array_equal(self.labels, other.labels)

    def __hash__(self):
        return hash(self.labels.tobytes())

    def to_csv(self, path) -> None:
        pd.DataFrame({'cluster': self.labels}).to_csv(path, index=False)

    @classmethod
    def from_csv(cls, path) -> 'Partition':
        return cls(pd.read_csv(path)['cluster'].to_numpy())


@dataclass(frozen=True, eq=False)
class SimilarityMatrix:
    """Co-clustering frequencies; symmetric with unit diagonal"""

    values: np.ndarray

    @property
    def n(self) -> int:
        return int(self.values.shape[0])

    def to_csv(self, path) -> None:
        limit = getattr(settings, 'UNDERLAP_MAX_PSM_EXPORT', 5000)
        if self.n > limit:
            raise CapacityError(f"refusing to write a dense {self.n}x{self.n} similarity matrix (limit {limit})")
        pd.DataFrame(self.values).to_csv(path, index=False, header=False)


def _allocation_matrix(draws) -> np.ndarray:
    allocations = np.asarray(getattr(draws, 'allocations', draws))
    if allocations.ndim == 1:
        allocations = allocations[None, :]
    if allocations.ndim != 2 or allocations.shape[0] < 1:
        raise ArgumentError("at least one retained allocation vector is required")
    return allocations


def _one_hot(labels: np.ndarray) -> np.ndarray:
    _, inverse = np.unique(labels, return_inverse=True)
    encoded = np.zeros((labels.size, int(inverse.max()) + 1))
    encoded[np.arange(labels.size), inverse] = 1.0
    return encoded


def similarity_matrix(draws) -> SimilarityMatrix:
    """Fraction of retained iterations in which i and j share a cluster"""
    allocations = _allocation_matrix(draws)
    n_draws, n = allocations.shape
    counts = np.zeros((n, n))
    block: List[np.ndarray] = []
    width = 0
    for labels in allocations:
        encoded = _one_hot(labels)
        block.append(encoded)
        width += encoded.shape[1]
        if width >= ONE_HOT_COLUMNS:
            stacked = np.hstack(block)
            counts += stacked @ stacked.T
            block, width = [], 0
    if block:
        stacked = np.hstack(block)
        counts += stacked @ stacked.T
    values = counts / n_draws
    np.fill_diagonal(values, 1.0)
    return SimilarityMatrix(values)


def vi_lower_bound(candidate, psm: SimilarityMatrix) -> float:
    """
    (1/n) sum_i [ log2 |c_i| + log2 sum_j p_ij - 2 log2 sum_{j in c_i} p_ij ]
    """
    labels = candidate.labels if isinstance(candidate, Partition) else canonicalize(candidate)
    values = psm.values if isinstance(psm, SimilarityMatrix) else np.asarray(psm)
    n = labels.size
    if values.shape != (n, n):
        raise ShapeError(f"candidate has {n} labels, similarity matrix is {values.shape}")
    return float(np.mean(_vi_terms(labels, values, values.sum(axis=1))))


def _vi_terms(labels: np.ndarray, values: np.ndarray, row_sums: np.ndarray) -> np.ndarray:
    encoded = _one_hot(labels)
    _, inverse = np.unique(labels, return_inverse=True)
    sizes = encoded.sum(axis=0)[inverse]
    shared = (values @ encoded)[np.arange(labels.size), inverse]
    return np.log2(sizes) + np.log2(row_sums) - 2.0 * np.log2(shared)


def representative_partition(draws) -> Partition:
    """Sampled partition with the smallest VI lower bound; ties go to the earliest iteration"""
    allocations = _allocation_matrix(draws)
    psm = similarity_matrix(allocations)
    row_sums = psm.values.sum(axis=1)

    best_labels, best_score, seen = None, np.inf, set()
    for labels in allocations:
        canonical = canonicalize(labels)
        key = canonical.tobytes()
        if key in seen:
            continue
        seen.add(key)
        score = float(np.mean(_vi_terms(canonical, psm.values, row_sums)))
        if score < best_score:
            best_labels, best_score = canonical, score

    logger.info(f"Representative partition: {int(best_labels.max())} clusters, "
                f"VI lower bound {best_score:.4f} over {len(seen)} distinct partitions")
    return Partition(best_labels)


def set_partitions(n: int) -> Iterator[List[List[int]]]:
    """Every set partition of {0, ..., n-1}, as lists of blocks"""
    if n == 0:
        yield []
        return
    for partial in set_partitions(n - 1):
        for index in range(len(partial)):
            yield partial[:index] + [partial[index] + [n - 1]] + partial[index + 1:]
        yield partial + [[n - 1]]


def partition_labels(blocks: List[List[int]], n: int) -> np.ndarray:
    labels = np.zeros(n, dtype=np.int64)
    for cluster, block in enumerate(blocks, start=1):
        labels[block] = cluster
    return canonicalize(labels)
