import logging

import numpy as np

from core.dataset import CONTINUOUS, MixedDataset
from core.exceptions import ArgumentError
from core.flows.base import FIT_SEED, PREDICTIVE_SEED, BasePipelineFlow
from core.flows.state import PipelineState
from core.utils import derive_seed
from mixtures.hyperparams import add_intercept, derive_lddp_hyperparams
from mixtures.services import (
    conditional_interval_samples,
    fit_lddp,
    posterior_predictive,
    predictive_statistics,
)

logger = logging.getLogger(__name__)


class ConditionalPipelineFlow(BasePipelineFlow):
    """Regress the response on covariates with the LDDP, then diagnose the single-weights assumption"""

    kind = 'conditional'

    def build_design(self, data: MixedDataset):
        config = self.config
        if len(config.response) != 1:
            raise ArgumentError("the conditional pipeline takes exactly one response column")
        name = config.response[0]
        if data.column(name).kind != CONTINUOUS:
            raise ArgumentError(f"response {name!r} must be continuous")
        regressors = config.resolved_regressors()
        missing = [column for column in regressors if column not in data.names]
        if missing:
            raise ArgumentError(f"dataset has no regressor column(s) {missing}")
        design, labels = data.design_matrix(regressors)
        self.y = data.continuous_block([name])[:, 0]
        self.X = add_intercept(design)
        self.design_labels = ['(intercept)'] + labels

    def fit_regression(self) -> None:
        lddp = self.config.lddp
        with self.stage('hyperparameters'):
            hp = derive_lddp_hyperparams(self.y, self.X, psi_scale=lddp.psi_scale)
        with self.stage('fit'):
            self.record_fit(fit_lddp(self.y, self.X, hp, lddp, rng=self.seed(FIT_SEED)))

    def check_predictive(self) -> None:
        settings = self.config.predictive
        seed = self.seed(PREDICTIVE_SEED)
        replicates = posterior_predictive(self.draws, settings.n_rep, rng=derive_seed(seed, 0), x_new=self.X)
        statistics = predictive_statistics(replicates, observed=self.y)
        block = {'statistics': statistics.to_dict(orient='records')}
        if settings.covariate is not None:
            label = settings.covariate
            if label not in self.design_labels:
                raise ArgumentError(f"{label!r} is not a design column; choose from {self.design_labels[1:]}")
            samples = conditional_interval_samples(
                self.draws, self.X, self.design_labels.index(label), settings.n_rep,
                rng=derive_seed(seed, 1), cutoffs=settings.cutoffs,
            )
            self.interval_samples = samples
            block['covariate'] = label
            block['intervals'] = (samples[['interval', 'lower', 'upper']].drop_duplicates()
                                  .replace({np.inf: None, -np.inf: None}).to_dict(orient='records'))
        self.state.predictive = block

    def kickoff(self, data: MixedDataset) -> PipelineState:
        logger.info(f"Conditional pipeline started: response={self.config.response}, "
                    f"covariates={self.config.covariates}")
        self.interval_samples = None
        with self.stage('validate'):
            self.check_columns(data)
            self.build_design(data)
        self.fit_regression()
        self.run_unl_stages(data)
        if self.config.predictive is not None:
            with self.stage('predictive'):
                self.check_predictive()
        self.state.stage = 'done'
        return self.state


def run_conditional_pipeline(data: MixedDataset, config) -> ConditionalPipelineFlow:
    flow = ConditionalPipelineFlow(config)
    flow.kickoff(data)
    return flow
