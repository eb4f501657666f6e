"""
Retained Gibbs states of a truncated stick-breaking mixture.

Allocations are held 0-based in memory and written 1-based. Arrays are
stacked over retained iterations: allocations (S, n), weights and sticks
(S, L), alpha (S,), and per-component parameters with a leading S axis.
"""

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
from pydantic import BaseModel, Field

from core.exceptions import ArgumentError, ShapeError
from density.distributions import (
    CategoricalProduct,
    DensityModel,
    Gaussian,
    MixedProduct,
    Mixture,
    SupportSignature,
)

logger = logging.getLogger(__name__)

WEIGHT_TOLERANCE = 1e-10
DRAWS_FORMAT = 'posterior-draws'
KINDS = ('dpm', 'lddp')


class FitReport(BaseModel):
    """Run diagnostics of one chain"""

    kind: str
    n_sweeps: int = 0
    n_retained: int = 0
    seconds: float = 0.0
    mean_sweep_seconds: float = 0.0
    ridge_repairs: int = 0
    eta_floors: int = 0
    seed: Optional[int] = None
    warnings: List[str] = Field(default_factory=list)


@dataclass(eq=False)
class PosteriorDraws:
    kind: str
    allocations: np.ndarray
    weights: np.ndarray
    sticks: np.ndarray
    alpha: np.ndarray
    params: Dict[str, np.ndarray]
    signature: Optional[SupportSignature] = None
    report: Optional[FitReport] = None
    meta: Dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ArgumentError(f"unknown draws kind {self.kind!r}")
        self.allocations = np.asarray(self.allocations, dtype=np.int64)
        self.weights = np.asarray(self.weights, dtype=float)
        self.sticks = np.asarray(self.sticks, dtype=float)
        self.alpha = np.asarray(self.alpha, dtype=float)
        self.params = {name: np.asarray(values) for name, values in self.params.items()}
        s = self.weights.shape[0]
        if self.allocations.ndim != 2 or self.allocations.shape[0] != s:
            raise ShapeError("allocations must be an (S, n) array aligned with the weights")
        if self.sticks.shape != self.weights.shape or self.alpha.shape != (s,):
            raise ShapeError("sticks, weights and alpha disagree on the number of draws")
        for name, values in self.params.items():
            if values.shape[0] != s:
                raise ShapeError(f"parameter {name!r} has {values.shape[0]} draws, expected {s}")
        self.validate()

    # -- shape ----------------------------------------------------------------

    @property
    def n_draws(self) -> int:
        return int(self.weights.shape[0])

    @property
    def n(self) -> int:
        return int(self.allocations.shape[1])

    @property
    def truncation(self) -> int:
        return int(self.weights.shape[1])

    def validate(self) -> None:
        """Stick and allocation invariants of every retained state"""
        if self.n_draws == 0:
            return
        if np.any(self.weights < 0):
            raise ShapeError("negative mixture weight")
        if np.max(np.abs(self.weights.sum(axis=1) - 1.0)) > WEIGHT_TOLERANCE:
            raise ShapeError("mixture weights do not sum to one")
        if not np.all(self.sticks[:, -1] == 1.0):
            raise ShapeError("the last stick must equal one")
        if self.n:
            if self.allocations.min() < 0 or self.allocations.max() >= self.truncation:
                raise ShapeError("allocation outside 1..L")
            referenced = np.take_along_axis(self.weights, self.allocations, axis=1)
            if np.any(referenced <= 0):
                raise ShapeError("allocation references a component with zero weight")

    # -- summaries ------------------------------------------------------------

    def n_clusters(self) -> np.ndarray:
        """Occupied components per retained iteration"""
        return np.array([np.unique(row).size for row in self.allocations], dtype=np.int64)

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame({
            'iteration': np.arange(1, self.n_draws + 1),
            'alpha': self.alpha,
            'n_clusters': self.n_clusters(),
        })
        for index in range(self.truncation):
            frame[f'w_{index + 1}'] = self.weights[:, index]
        return frame

    def to_csv(self, path) -> None:
        self.to_frame().to_csv(path, index=False)

    # -- density models -------------------------------------------------------

    def component(self, s: int, index: int) -> DensityModel:
        """Kernel of component `index` at retained iteration s (DPM draws only)"""
        if self.kind != 'dpm':
            raise ArgumentError("component densities are only defined for DPM draws")
        gaussian = None
        if self.signature.p_continuous:
            gaussian = Gaussian(self.params['mu'][s, index], self.params['sigma'][s, index])
        discrete = None
        if self.signature.n_categorical:
            discrete = CategoricalProduct([
                self.params[f'pi_{j}'][s, index] for j in range(self.signature.n_categorical)
            ])
        if gaussian is not None and discrete is not None:
            return MixedProduct(gaussian, discrete)
        return gaussian if gaussian is not None else discrete

    def mixture(self, s: int) -> Mixture:
        """Iteration s as a Mixture over the components with positive weight"""
        weights = self.weights[s]
        active = np.flatnonzero(weights > 0)
        return Mixture(weights[active] / weights[active].sum(),
                       [self.component(s, int(index)) for index in active])

    # -- combination ----------------------------------------------------------

    @classmethod
    def concatenate(cls, chains: Sequence['PosteriorDraws']) -> 'PosteriorDraws':
        """Pool chains fitted to the same data"""
        chains = list(chains)
        if not chains:
            raise ArgumentError("no chains to pool")
        first = chains[0]
        for chain in chains[1:]:
            if chain.kind != first.kind or chain.n != first.n or chain.truncation != first.truncation:
                raise ShapeError("chains disagree on kind, n or truncation")
        return cls(
            kind=first.kind,
            allocations=np.concatenate([c.allocations for c in chains]),
            weights=np.concatenate([c.weights for c in chains]),
            sticks=np.concatenate([c.sticks for c in chains]),
            alpha=np.concatenate([c.alpha for c in chains]),
            params={name: np.concatenate([c.params[name] for c in chains]) for name in first.params},
            signature=first.signature,
            report=first.report,
            meta=dict(first.meta, n_chains=len(chains)),
        )

    # -- NDJSON ---------------------------------------------------------------

    def header(self) -> Dict:
        header = {
            'format': DRAWS_FORMAT,
            'kind': self.kind,
            'n': self.n,
            'L': self.truncation,
            'n_draws': self.n_draws,
            'params': sorted(self.params),
            'report': self.report.model_dump() if self.report else None,
        }
        if self.signature is not None:
            header['p'] = self.signature.p_continuous
            header['categorical_cardinalities'] = list(self.signature.categorical_cardinalities)
        header.update({key: value for key, value in self.meta.items() if key not in header})
        return header

    def write_ndjson(self, path) -> None:
        """Header line, then one JSON object per retained iteration"""
        with open(path, 'w') as handle:
            handle.write(json.dumps(self.header(), sort_keys=True) + '\n')
            for s in range(self.n_draws):
                line = {
                    'iteration': s + 1,
                    'z': (self.allocations[s] + 1).tolist(),
                    'w': self.weights[s].tolist(),
                    'v': self.sticks[s].tolist(),
                    'alpha': float(self.alpha[s]),
                    'params': {name: values[s].tolist() for name, values in self.params.items()},
                }
                handle.write(json.dumps(line, sort_keys=True) + '\n')
        logger.info(f"Wrote {self.n_draws} {self.kind} draws to {path}")

    @classmethod
    def read_ndjson(cls, path) -> 'PosteriorDraws':
        lines = Path(path).read_text().splitlines()
        if not lines:
            raise ArgumentError(f"{path} is empty")
        header = json.loads(lines[0])
        if header.get('format') != DRAWS_FORMAT:
            raise ArgumentError(f"{path} is not a posterior draws file")
        rows = [json.loads(line) for line in lines[1:] if line.strip()]
        n, L = header['n'], header['L']
        names = header['params']

        signature = None
        if 'p' in header:
            signature = SupportSignature(header['p'], tuple(header.get('categorical_cardinalities', ())))
        report = FitReport(**header['report']) if header.get('report') else None
        meta = {key: value for key, value in header.items()
                if key not in ('format', 'kind', 'n', 'L', 'n_draws', 'params', 'report', 'p',
                               'categorical_cardinalities')}

        def stacked(key, width, dtype=float):
            if not rows:
                return np.zeros((0, width), dtype=dtype)
            return np.array([row[key] for row in rows], dtype=dtype)

        params = {}
        for name in names:
            values = [row['params'][name] for row in rows]
            params[name] = np.array(values, dtype=float) if values else np.zeros((0,))
        return cls(
            kind=header['kind'],
            allocations=stacked('z', n, np.int64) - 1 if rows else np.zeros((0, n), dtype=np.int64),
            weights=stacked('w', L),
            sticks=stacked('v', L),
            alpha=np.array([row['alpha'] for row in rows], dtype=float),
            params=params,
            signature=signature,
            report=report,
            meta=meta,
        )
