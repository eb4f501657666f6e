"""
Run and pipeline configuration.

A run config is one JSON file validated by RunConfig; command-line flags
override its fields. Paths are checked before any computation starts.
"""

import json
import logging
from pathlib import Path
from typing import Dict, List, Optional

from django.conf import settings
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from core.dataset import COLUMN_KINDS
from core.exceptions import ArgumentError
from mixtures.config import DpmConfig, LddpConfig, SamplerConfig

logger = logging.getLogger(__name__)


def _desk_scaled(sampler: SamplerConfig) -> SamplerConfig:
    """Desk-scale iteration counts, unless the config set them explicitly"""
    iterations = getattr(settings, 'UNDERLAP_DESK_ITERATIONS', 1000)
    update = {field: iterations for field in ('n_iter', 'n_burn') if field not in sampler.model_fields_set}
    return sampler.model_copy(update=update)


class PredictiveConfig(BaseModel):
    """Posterior predictive check settings"""

    model_config = ConfigDict(extra='forbid')

    n_rep: int = Field(200, ge=0)
    covariate: Optional[str] = None
    cutoffs: Optional[List[float]] = None


class CurveConfig(BaseModel):
    model_config = ConfigDict(extra='forbid')

    family: str = 'symmetric'
    prevalence: str = 'balanced'
    d_grid: List[float] = Field(default_factory=lambda: [0.0, 0.5, 1.0, 1.5, 2.0, 3.0, 4.0, 6.0])
    bits: bool = False


class PipelineConfig(BaseModel):
    """Everything a marginal or conditional pipeline needs besides the data"""

    model_config = ConfigDict(extra='forbid')

    response: List[str]
    covariates: List[str]
    regressors: Optional[List[str]] = None
    subsets: Dict[str, List[str]] = Field(default_factory=dict)
    m: int = Field(5000, ge=1)
    seed: int = Field(0, ge=0)
    workers: Optional[int] = Field(None, ge=1)
    dpm: DpmConfig = Field(default_factory=DpmConfig)
    covariate_dpm: DpmConfig = Field(default_factory=DpmConfig)
    lddp: LddpConfig = Field(default_factory=LddpConfig)
    predictive: Optional[PredictiveConfig] = None

    @model_validator(mode='after')
    def check_columns(self):
        if not self.response:
            raise ValueError("at least one response column is required")
        if not self.covariates:
            raise ValueError("at least one covariate column is required")
        overlap = set(self.response) & set(self.covariates)
        if overlap:
            raise ValueError(f"columns {sorted(overlap)} are both response and covariate")
        for name, columns in self.subsets.items():
            if not columns:
                raise ValueError(f"covariate subset {name!r} is empty")
            unknown = set(columns) - set(self.covariates)
            if unknown:
                raise ValueError(f"covariate subset {name!r} names non-covariates {sorted(unknown)}")
        return self

    def resolved_subsets(self) -> Dict[str, List[str]]:
        """Named subsets, defaulting to the joint set plus each covariate alone"""
        if self.subsets:
            return dict(self.subsets)
        subsets = {'joint': list(self.covariates)}
        if len(self.covariates) > 1:
            subsets.update({name: [name] for name in self.covariates})
        return subsets

    def resolved_regressors(self) -> List[str]:
        return list(self.regressors) if self.regressors is not None else list(self.covariates)


class RunConfig(BaseModel):
    """Contents of a --config file, after command-line overrides"""

    model_config = ConfigDict(extra='forbid')

    seed: int = Field(0, ge=0)
    desk_scale: bool = False
    out_dir: Path = Path('output')
    data: Optional[Path] = None
    columns: Optional[Dict[str, str]] = None
    draws: Optional[Path] = None
    example: Optional[str] = None
    n: Optional[int] = Field(None, ge=10)
    m: Optional[int] = Field(None, ge=1)
    workers: Optional[int] = Field(None, ge=1)
    chains: int = Field(1, ge=1)
    response: List[str] = Field(default_factory=list)
    covariates: List[str] = Field(default_factory=list)
    regressors: Optional[List[str]] = None
    subsets: Dict[str, List[str]] = Field(default_factory=dict)
    dpm: DpmConfig = Field(default_factory=DpmConfig)
    covariate_dpm: DpmConfig = Field(default_factory=DpmConfig)
    lddp: LddpConfig = Field(default_factory=LddpConfig)
    predictive: Optional[PredictiveConfig] = None
    curve: CurveConfig = Field(default_factory=CurveConfig)

    @field_validator('data', 'draws')
    @classmethod
    def check_input_exists(cls, value):
        if value is not None and not Path(value).exists():
            raise ValueError(f"file not found: {value}")
        return value

    @field_validator('columns')
    @classmethod
    def check_column_kinds(cls, value):
        if value is not None:
            bad = {name: kind for name, kind in value.items() if kind not in COLUMN_KINDS}
            if bad:
                raise ValueError(f"unknown column kinds {bad}; expected one of {COLUMN_KINDS}")
        return value

    @classmethod
    def load(cls, path=None, **overrides) -> 'RunConfig':
        """Read the JSON file (if any) and apply the non-None overrides"""
        values = {}
        if path is not None:
            path = Path(path)
            if not path.exists():
                raise ArgumentError(f"config file not found: {path}")
            try:
                values = json.loads(path.read_text())
            except json.JSONDecodeError as exc:
                raise ArgumentError(f"{path} is not valid JSON: {exc}") from exc
        values.update({key: value for key, value in overrides.items() if value is not None})
        try:
            return cls.model_validate(values)
        except ValidationError as exc:
            raise ArgumentError(f"invalid run configuration: {exc}") from exc

    # -- resolved settings ----------------------------------------------------

    def require(self, *fields: str) -> None:
        missing = [name for name in fields if not getattr(self, name)]
        if missing:
            raise ArgumentError(f"missing required setting(s): {', '.join(missing)}")

    @property
    def mc_draws(self) -> int:
        if self.m is not None:
            return self.m
        key = 'UNDERLAP_DESK_M' if self.desk_scale else 'UNDERLAP_DEFAULT_M'
        return int(getattr(settings, key))

    def dpm_config(self) -> DpmConfig:
        return _desk_scaled(self.dpm) if self.desk_scale else self.dpm

    def covariate_dpm_config(self) -> DpmConfig:
        return _desk_scaled(self.covariate_dpm) if self.desk_scale else self.covariate_dpm

    def lddp_config(self) -> LddpConfig:
        return _desk_scaled(self.lddp) if self.desk_scale else self.lddp

    def pipeline_config(self) -> PipelineConfig:
        try:
            return PipelineConfig(
                response=self.response,
                covariates=self.covariates,
                regressors=self.regressors,
                subsets=self.subsets,
                m=self.mc_draws,
                seed=self.seed,
                workers=self.workers,
                dpm=self.dpm_config(),
                covariate_dpm=self.covariate_dpm_config(),
                lddp=self.lddp_config(),
                predictive=self.predictive,
            )
        except ValidationError as exc:
            raise ArgumentError(f"invalid pipeline configuration: {exc}") from exc

    def echo(self) -> dict:
        """JSON-safe copy for reports"""
        return json.loads(self.model_dump_json())
