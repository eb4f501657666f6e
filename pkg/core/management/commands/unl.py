from pathlib import Path

from core.exceptions import ArgumentError
from core.management.base import UnderlapCommand
from core.reports import build_report, write_report
from density.serializers import load_group_matrix
from unl.estimator import estimate_unl_posterior


class Command(UnderlapCommand):
    help = "Estimate UNL for group densities given as JSON documents"
    command_name = 'unl'

    def add_command_arguments(self, parser):
        parser.add_argument('--models', required=True,
                            help="JSON list of K density documents, or a list of such lists (one per draw)")
        parser.add_argument('--m', type=int, help="Importance-sampling draws per estimate")

    def overrides(self, options):
        return {'m': options.get('m')}

    def execute_run(self, run, options):
        if not Path(options['models']).is_file():
            raise ArgumentError(f"models file not found: {options['models']}")
        rows = load_group_matrix(options['models'])
        posterior = estimate_unl_posterior(rows, run.mc_draws, seed=run.seed, workers=run.workers)
        posterior.to_csv(run.out_dir / 'draws.csv')
        summary = posterior.summary()
        write_report(build_report(self.command_name, {
            'models_file': str(options['models']),
            'unl': posterior.to_dict(),
            'run_config': run.echo(),
        }), run.out_dir)
        return {'K': summary['k_groups'], 'draws': summary['n_draws'], 'mean UNL': round(summary['mean'], 4)}
