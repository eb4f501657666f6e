from core.flows.marginal_pipeline_flow.flow import run_marginal_pipeline
from core.management.base import UnderlapCommand, parse_subsets, run_dataset, split_columns
from core.reports import write_pipeline_outputs


def pipeline_arguments(parser):
    parser.add_argument('--data', help="CSV file")
    parser.add_argument('--example', help="Simulate this example instead of reading --data")
    parser.add_argument('--response', help="Comma-separated response columns")
    parser.add_argument('--covariates', help="Comma-separated covariate columns")
    parser.add_argument('--subset', action='append', dest='subsets', metavar='NAME=COLS',
                        help="Covariate subset to score; repeatable (default: joint and each covariate)")
    parser.add_argument('--m', type=int, help="Importance-sampling draws per UNL estimate")


def pipeline_overrides(options):
    return {
        'data': options.get('data'),
        'example': options.get('example'),
        'response': split_columns(options.get('response')),
        'covariates': split_columns(options.get('covariates')),
        'subsets': parse_subsets(options.get('subsets')),
        'm': options.get('m'),
    }


def pipeline_summary(flow):
    summary = {'clusters': flow.state.n_clusters}
    for result in flow.state.unl:
        summary[f"UNL {result.name}"] = round(result.summary['mean'], 4)
    for notice in flow.state.notices:
        summary['notice'] = notice
    return summary


class Command(UnderlapCommand):
    help = "Cluster the response with a DPM and score how the clusters depend on the covariates"
    command_name = 'pipeline_marginal'

    def add_command_arguments(self, parser):
        pipeline_arguments(parser)

    def overrides(self, options):
        return pipeline_overrides(options)

    def execute_run(self, run, options):
        run.require('response', 'covariates')
        dataset = run_dataset(run)
        flow = run_marginal_pipeline(dataset, run.pipeline_config())
        write_pipeline_outputs(flow, self.command_name, run.out_dir, run_config=run.echo())
        return pipeline_summary(flow)
