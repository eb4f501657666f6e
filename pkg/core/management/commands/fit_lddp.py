from core.exceptions import ArgumentError
from core.management.base import UnderlapCommand, run_dataset, split_columns
from core.reports import build_report, write_report
from core.utils import derive_seed
from mixtures.draws import PosteriorDraws
from mixtures.hyperparams import add_intercept, derive_lddp_hyperparams
from mixtures.services import fit_chains, fit_lddp


def regression_inputs(run, dataset):
    """Response vector and intercept-augmented design from the run settings"""
    if len(run.response) != 1:
        raise ArgumentError("exactly one --response column is required")
    regressors = run.regressors if run.regressors is not None else run.covariates
    if not regressors:
        regressors = [name for name in dataset.names if name != run.response[0]]
    design, labels = dataset.design_matrix(regressors)
    y = dataset.continuous_block(run.response)[:, 0]
    return y, add_intercept(design), ['(intercept)'] + labels


class Command(UnderlapCommand):
    help = "Fit the single-weights LDDP mixture of linear regressions"
    command_name = 'fit_lddp'

    def add_command_arguments(self, parser):
        parser.add_argument('--data', help="CSV file")
        parser.add_argument('--example', help="Simulate this example instead of reading --data")
        parser.add_argument('--response', help="Response column")
        parser.add_argument('--regressors', help="Comma-separated regressors (default: every other column)")
        parser.add_argument('--chains', type=int, help="Independent chains to pool")

    def overrides(self, options):
        return {
            'data': options.get('data'),
            'example': options.get('example'),
            'response': split_columns(options.get('response')),
            'regressors': split_columns(options.get('regressors')),
            'chains': options.get('chains'),
        }

    def execute_run(self, run, options):
        dataset = run_dataset(run)
        y, X, labels = regression_inputs(run, dataset)
        cfg = run.lddp_config()
        hp = derive_lddp_hyperparams(y, X, psi_scale=cfg.psi_scale)
        chains = fit_chains(lambda rng: fit_lddp(y, X, hp, cfg, rng), run.chains,
                            seed=derive_seed(run.seed, 1), workers=run.workers)
        draws = PosteriorDraws.concatenate(chains) if len(chains) > 1 else chains[0]
        draws.meta['design_columns'] = labels

        draws.write_ndjson(run.out_dir / 'draws.ndjson')
        draws.to_csv(run.out_dir / 'draws.csv')
        clusters = draws.n_clusters()
        write_report(build_report(self.command_name, {
            'response': run.response[0],
            'design_columns': labels,
            'n': int(y.size),
            'chains': run.chains,
            'hyperparams': hp.to_dict(),
            'fit': [chain.report.model_dump(exclude={'seconds', 'mean_sweep_seconds'}) for chain in chains],
            'mean_clusters': float(clusters.mean()),
            'run_config': run.echo(),
        }), run.out_dir)
        return {'retained draws': draws.n_draws, 'mean clusters': round(float(clusters.mean()), 3)}
