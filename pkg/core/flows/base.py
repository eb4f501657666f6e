"""
Stages shared by the marginal and conditional pipelines.

Both pipelines cluster the data, pick a representative partition, fit a
covariate density inside every cluster and estimate a UNL posterior for
each requested covariate subset. They differ only in the clustering model.
"""

import logging
from contextlib import contextmanager
from typing import Dict, List, Optional

from core.config import PipelineConfig
from core.dataset import MixedDataset
from core.exceptions import ArgumentError, PipelineStageError
from core.flows.state import PipelineState, UnlSubsetResult
from core.utils import derive_seed
from density.distributions import DensityModel
from density.operations import marginalize
from mixtures.draws import PosteriorDraws
from mixtures.services import cluster_covariate_densities
from partitions.similarity import Partition, representative_partition
from unl.estimator import UnlPosterior, estimate_unl_posterior

logger = logging.getLogger(__name__)

SINGLE_CLUSTER_NOTICE = "K=1, UNL undefined for one group"

# offsets into the master seed; subsets use UNL_SEED + index
HYPERPARAMS_SEED = 0
FIT_SEED = 1
COVARIATE_SEED = 2
PREDICTIVE_SEED = 3
UNL_SEED = 10


class BasePipelineFlow:
    kind = ''
    FIT_FIELDS_EXCLUDED = {'seconds', 'mean_sweep_seconds'}

    def __init__(self, config: PipelineConfig):
        self.config = config
        self.state = PipelineState(kind=self.kind, config=config.model_dump(mode='json'))
        self.draws: Optional[PosteriorDraws] = None
        self.partition: Optional[Partition] = None
        self.densities: List[List[DensityModel]] = []
        self.posteriors: Dict[str, UnlPosterior] = {}
        self.timings: Dict[str, float] = {}

    def seed(self, offset: int) -> int:
        return derive_seed(self.config.seed, offset)

    @contextmanager
    def stage(self, name: str):
        """Tag any failure inside the block with the stage name"""
        self.state.stage = name
        logger.info(f"[{self.kind}] stage {name} started")
        try:
            yield
        except PipelineStageError:
            raise
        except Exception as e:
            logger.error(f"[{self.kind}] stage {name} failed: {e}")
            raise PipelineStageError(name, e) from e

    # -- shared stages --------------------------------------------------------

    def check_columns(self, data: MixedDataset) -> None:
        needed = list(self.config.response) + list(self.config.covariates)
        missing = [name for name in needed if name not in data.names]
        if missing:
            raise ArgumentError(f"dataset has no column(s) {missing}")
        self.state.n_rows = data.n_rows
        self.state.dropped_rows = data.dropped_count

    def record_fit(self, draws: PosteriorDraws) -> None:
        self.draws = draws
        if draws.report is not None:
            self.state.fit = draws.report.model_dump(exclude=self.FIT_FIELDS_EXCLUDED)
            self.timings['fit_seconds'] = draws.report.seconds

    def select_partition(self) -> Partition:
        self.partition = representative_partition(self.draws)
        self.state.n_clusters = self.partition.k
        self.state.cluster_sizes = self.partition.sizes().tolist()
        self.state.partition = self.partition.labels.tolist()
        return self.partition

    def fit_covariate_densities(self, data: MixedDataset) -> None:
        config = self.config
        self.densities = cluster_covariate_densities(
            self.partition, data.select(config.covariates), config.covariate_dpm,
            seed=self.seed(COVARIATE_SEED), workers=config.workers,
        )

    def estimate_subsets(self, data: MixedDataset) -> None:
        config = self.config
        matrix = self.densities
        for index, (name, columns) in enumerate(config.resolved_subsets().items()):
            keep = data.variable_indices(columns, within=config.covariates)
            rows = [[marginalize(model, keep) for model in row] for row in matrix]
            posterior = estimate_unl_posterior(rows, config.m, seed=self.seed(UNL_SEED + index),
                                               workers=config.workers)
            self.posteriors[name] = posterior
            summary = posterior.summary()
            logger.info(f"UNL({', '.join(columns)}): mean {summary['mean']:.3f}, "
                        f"95% interval [{summary['q025']:.3f}, {summary['q975']:.3f}]")
            self.state.unl.append(UnlSubsetResult(
                name=name,
                columns=list(columns),
                summary=summary,
                draws=[{'value': d.value, 'variance_bound': d.variance_bound, 'ess': d.ess}
                       for d in posterior.draws],
            ))

    def run_unl_stages(self, data: MixedDataset) -> None:
        with self.stage('partition'):
            self.select_partition()
        if self.partition.k < 2:
            logger.warning(SINGLE_CLUSTER_NOTICE)
            self.state.notices.append(SINGLE_CLUSTER_NOTICE)
            return
        with self.stage('covariate_densities'):
            self.fit_covariate_densities(data)
        with self.stage('unl'):
            self.estimate_subsets(data)
