import logging

from core.dataset import MixedDataset
from core.flows.base import FIT_SEED, HYPERPARAMS_SEED, BasePipelineFlow
from core.flows.state import PipelineState
from mixtures.hyperparams import derive_dpm_hyperparams
from mixtures.services import fit_dpm

logger = logging.getLogger(__name__)


class MarginalPipelineFlow(BasePipelineFlow):
    """Cluster the response alone with a DPM, then measure how the partition depends on the covariates"""

    kind = 'marginal'

    def fit_response(self, data: MixedDataset) -> None:
        config = self.config
        response = data.select(config.response)
        with self.stage('hyperparameters'):
            hp = derive_dpm_hyperparams(response, config.dpm.kmeans_k,
                                        rng=self.seed(HYPERPARAMS_SEED), tau_k=config.dpm.tau_k)
        with self.stage('fit'):
            self.record_fit(fit_dpm(response, hp, config.dpm, rng=self.seed(FIT_SEED)))

    def kickoff(self, data: MixedDataset) -> PipelineState:
        """Run every stage and return the final state"""
        logger.info(f"Marginal pipeline started: response={self.config.response}, "
                    f"covariates={self.config.covariates}")
        with self.stage('validate'):
            self.check_columns(data)
        self.fit_response(data)
        self.run_unl_stages(data)
        self.state.stage = 'done'
        return self.state


def run_marginal_pipeline(data: MixedDataset, config) -> MarginalPipelineFlow:
    flow = MarginalPipelineFlow(config)
    flow.kickoff(data)
    return flow
