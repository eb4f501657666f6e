"""
Deterministic UNL oracles: exact summation for categorical models, a
tensor-grid midpoint rule for up to two continuous coordinates, and the
brute-force supremum over set partitions of a tiny discrete space.
"""

import itertools
import logging
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from core.exceptions import ArgumentError, CapacityError, NumericError, PreconditionError
from density.distributions import CategoricalProduct, DensityModel, MixedPoints, SupportSignature
from density.operations import shared_signature
from partitions.similarity import set_partitions

logger = logging.getLogger(__name__)

MAX_EXACT_STATES = 10 ** 7
MAX_QUADRATURE_DIMENSION = 2
COVERAGE_TOLERANCE = 1e-6
REFINEMENT_TOLERANCE = 1e-4
QUADRATURE_CHUNK = 2 ** 18


def _check_categorical(groups: Sequence[CategoricalProduct]) -> SupportSignature:
    groups = list(groups)
    if len(groups) < 1:
        raise ArgumentError("at least one group is required")
    for group in groups:
        if not isinstance(group, CategoricalProduct):
            raise ArgumentError(f"expected CategoricalProduct groups, got {type(group).__name__}")
    return shared_signature(groups)


def unl_exact_discrete(groups: Sequence[CategoricalProduct]) -> float:
    """Sum over the product state space of max_k p_k"""
    signature = _check_categorical(groups)
    if signature.n_states > MAX_EXACT_STATES:
        raise CapacityError(
            f"state space has {signature.n_states} states; the exact sum is limited to {MAX_EXACT_STATES}"
        )
    envelope = groups[0].joint_pmf()
    for group in groups[1:]:
        envelope = np.maximum(envelope, group.joint_pmf())
    return float(envelope.sum())


def tv_partition_sup_discrete(groups: Sequence[CategoricalProduct], max_states: int = 6) -> float:
    """
    sup over set partitions {A_j} of the state space of sum_j max_k P_k(A_j).

    Equals the exact UNL; kept as an independent brute-force check.
    """
    signature = _check_categorical(groups)
    if signature.n_states > max_states:
        raise CapacityError(
            f"state space has {signature.n_states} states; partition enumeration is limited to {max_states}"
        )
    tables = np.stack([group.joint_pmf().ravel() for group in groups])
    best = -np.inf
    for blocks in set_partitions(signature.n_states):
        total = sum(tables[:, block].sum(axis=1).max() for block in blocks)
        best = max(best, total)
    return float(best)


@dataclass(frozen=True)
class QuadratureGrid:
    """Per-dimension integration bounds and a common step for the midpoint rule"""

    bounds: Tuple[Tuple[float, float], ...]
    step: float

    def __post_init__(self):
        object.__setattr__(self, 'bounds', tuple((float(lo), float(hi)) for lo, hi in self.bounds))
        if self.step <= 0:
            raise ArgumentError("quadrature step must be positive")
        for lo, hi in self.bounds:
            if not hi > lo:
                raise ArgumentError(f"invalid quadrature bounds ({lo}, {hi})")

    @classmethod
    def cube(cls, lo: float, hi: float, step: float, dimension: int) -> 'QuadratureGrid':
        return cls(tuple((lo, hi) for _ in range(dimension)), step)

    def refined(self) -> 'QuadratureGrid':
        return QuadratureGrid(self.bounds, self.step / 2.0)

    def midpoints(self) -> Tuple[np.ndarray, float]:
        """All cell midpoints as a (n_cells, p) array, and the cell volume"""
        axes = []
        volume = 1.0
        for lo, hi in self.bounds:
            cells = max(1, int(round((hi - lo) / self.step)))
            width = (hi - lo) / cells
            axes.append(lo + width * (np.arange(cells) + 0.5))
            volume *= width
        if not axes:
            return np.zeros((1, 0)), 1.0
        mesh = np.meshgrid(*axes, indexing='ij')
        return np.column_stack([axis.ravel() for axis in mesh]), volume


def _grid_integrals(groups: Sequence[DensityModel], grid: QuadratureGrid,
                    signature: SupportSignature) -> Tuple[float, np.ndarray]:
    """(integral of max_k f_k, per-group mass) over the grid and every categorical state"""
    nodes, volume = grid.midpoints()
    envelope = 0.0
    masses = np.zeros(len(groups))
    states = itertools.product(*[range(c) for c in signature.categorical_cardinalities])
    for state in states:
        for start in range(0, nodes.shape[0], QUADRATURE_CHUNK):
            chunk = nodes[start:start + QUADRATURE_CHUNK]
            categorical = np.tile(np.asarray(state, dtype=np.int64), (chunk.shape[0], 1))
            points = MixedPoints(chunk, categorical.reshape(chunk.shape[0], len(state)))
            densities = np.exp(np.stack([group.log_pdf(points) for group in groups]))
            envelope += float(densities.max(axis=0).sum()) * volume
            masses += densities.sum(axis=1) * volume
    return envelope, masses


def unl_quadrature(groups: Sequence[DensityModel], grid: Optional[QuadratureGrid] = None,
                   self_check: bool = True) -> float:
    """
    Midpoint-rule UNL on a tensor grid, summed over all categorical states.

    The grid must hold at least 1 - 1e-6 of every group's mass. With
    self_check, the value is recomputed on a grid with half the step and
    must move by less than 1e-4; the refined value is returned.
    """
    groups = list(groups)
    signature = shared_signature(groups)
    if signature.p_continuous > MAX_QUADRATURE_DIMENSION:
        raise CapacityError(
            f"quadrature supports at most {MAX_QUADRATURE_DIMENSION} continuous coordinates, "
            f"got {signature.p_continuous}"
        )
    if signature.p_continuous == 0:
        grid = QuadratureGrid((), 1.0)
        self_check = False
    elif grid is None or len(grid.bounds) != signature.p_continuous:
        raise ArgumentError(f"a grid over {signature.p_continuous} continuous coordinates is required")

    value, masses = _grid_integrals(groups, grid, signature)
    short = np.flatnonzero(masses < 1.0 - COVERAGE_TOLERANCE)
    if short.size:
        raise PreconditionError(
            f"grid covers only {masses[short].min():.8f} of the mass of group(s) {short.tolist()}"
        )
    if not self_check:
        return value

    refined, _ = _grid_integrals(groups, grid.refined(), signature)
    if abs(refined - value) >= REFINEMENT_TOLERANCE:
        raise NumericError(
            f"quadrature did not settle: {value:.8f} at step {grid.step} vs {refined:.8f} at half step"
        )
    return refined


def total_variation_quadrature(first: DensityModel, second: DensityModel,
                               grid: Optional[QuadratureGrid] = None) -> float:
    """(1/2) integral of |f_1 - f_2| on the same grid rules as unl_quadrature"""
    signature = shared_signature([first, second])
    if signature.p_continuous > MAX_QUADRATURE_DIMENSION:
        raise CapacityError("total variation quadrature supports at most two continuous coordinates")
    if signature.p_continuous == 0:
        grid = QuadratureGrid((), 1.0)
    elif grid is None:
        raise ArgumentError("a grid is required for continuous supports")
    nodes, volume = grid.midpoints()
    total = 0.0
    for state in itertools.product(*[range(c) for c in signature.categorical_cardinalities]):
        categorical = np.tile(np.asarray(state, dtype=np.int64), (nodes.shape[0], 1))
        points = MixedPoints(nodes, categorical.reshape(nodes.shape[0], len(state)))
        total += float(np.abs(np.exp(first.log_pdf(points)) - np.exp(second.log_pdf(points))).sum()) * volume
    return 0.5 * total
