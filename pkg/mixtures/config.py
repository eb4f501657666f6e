"""
Sampler configuration.

Validated with pydantic so a JSON run config and command-line overrides go
through the same checks.
"""

import math
from typing import Optional

from django.conf import settings
from pydantic import BaseModel, ConfigDict, Field


class SamplerConfig(BaseModel):
    """Settings shared by both blocked Gibbs samplers"""

    model_config = ConfigDict(extra='forbid')

    truncation: int = Field(10, ge=1, description="Number of stick-breaking components L")
    a_alpha: float = Field(2.0, gt=0, description="Gamma shape of the concentration prior")
    b_alpha: float = Field(2.0, gt=0, description="Gamma rate of the concentration prior")
    alpha_init: float = Field(1.0, gt=0)
    n_iter: int = Field(10000, ge=1, description="Sweeps after burn-in")
    n_burn: int = Field(10000, ge=0)
    thin: int = Field(1, ge=1)
    seed: Optional[int] = None

    @property
    def n_retained(self) -> int:
        return math.ceil(self.n_iter / self.thin)

    @classmethod
    def desk_scale(cls, **overrides):
        """Short runs for tests and quick looks"""
        iterations = getattr(settings, 'UNDERLAP_DESK_ITERATIONS', 1000)
        values = {'n_iter': iterations, 'n_burn': iterations}
        values.update(overrides)
        return cls(**values)


class DpmConfig(SamplerConfig):
    """Gaussian x categorical product-kernel DPM"""

    tau_k: float = Field(10.0, gt=0, description="Prior pseudo-count behind the Dirichlet parameters")
    kmeans_k: int = Field(3, ge=3, le=10, description="K-means clusters used to set hyperparameters")


class LddpConfig(SamplerConfig):
    """Single-weights mixture of linear regressions"""

    truncation: int = Field(20, ge=1, description="Number of stick-breaking components L")
    psi_scale: float = Field(30.0, gt=0, description="Multiplier of sigma^2 (X'X)^-1 in Psi")
    init_clusters: int = Field(3, ge=1, description="K-means clusters on y for the first allocation")
