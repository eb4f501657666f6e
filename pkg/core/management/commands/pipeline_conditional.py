from core.config import PredictiveConfig
from core.flows.conditional_pipeline_flow.flow import run_conditional_pipeline
from core.management.base import UnderlapCommand, run_dataset, split_columns
from core.management.commands.pipeline_marginal import pipeline_arguments, pipeline_overrides, pipeline_summary
from core.management.commands.ppc import parse_cutoffs
from core.reports import write_pipeline_outputs


class Command(UnderlapCommand):
    help = "Cluster the response with the LDDP regression and score how the clusters depend on the covariates"
    command_name = 'pipeline_conditional'

    def add_command_arguments(self, parser):
        pipeline_arguments(parser)
        parser.add_argument('--regressors', help="Comma-separated regressors (default: the covariates)")
        parser.add_argument('--ppc', action='store_true', help="Run posterior predictive checks")
        parser.add_argument('--n-rep', type=int, help="Replicated datasets for the checks")
        parser.add_argument('--covariate', help="Design column for conditional interval samples")
        parser.add_argument('--cutoffs', help="Comma-separated interval cutoffs (default: quartiles)")

    def overrides(self, options):
        overrides = pipeline_overrides(options)
        overrides['regressors'] = split_columns(options.get('regressors'))
        return overrides

    def execute_run(self, run, options):
        run.require('response', 'covariates')
        wants_ppc = options.get('ppc') or options.get('n_rep') is not None or options.get('covariate')
        if wants_ppc:
            predictive = run.predictive or PredictiveConfig()
            run.predictive = predictive.model_copy(update={
                key: value for key, value in {
                    'n_rep': options.get('n_rep'),
                    'covariate': options.get('covariate'),
                    'cutoffs': parse_cutoffs(options.get('cutoffs')),
                }.items() if value is not None
            })
        dataset = run_dataset(run)
        flow = run_conditional_pipeline(dataset, run.pipeline_config())
        write_pipeline_outputs(flow, self.command_name, run.out_dir, run_config=run.echo())
        return pipeline_summary(flow)
