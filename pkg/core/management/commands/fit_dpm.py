from core.management.base import UnderlapCommand, run_dataset, split_columns
from core.reports import build_report, write_report
from core.utils import derive_seed
from mixtures.draws import PosteriorDraws
from mixtures.hyperparams import derive_dpm_hyperparams
from mixtures.services import fit_chains, fit_dpm


class Command(UnderlapCommand):
    help = "Fit the product-kernel DPM to selected columns of a dataset"
    command_name = 'fit_dpm'

    def add_command_arguments(self, parser):
        parser.add_argument('--data', help="CSV file (schema from --config columns or a .schema.json sidecar)")
        parser.add_argument('--example', help="Simulate this example instead of reading --data")
        parser.add_argument('--columns', help="Comma-separated columns to cluster (default: all)")
        parser.add_argument('--chains', type=int, help="Independent chains to pool")

    def overrides(self, options):
        return {
            'data': options.get('data'),
            'example': options.get('example'),
            'response': split_columns(options.get('columns')),
            'chains': options.get('chains'),
        }

    def execute_run(self, run, options):
        dataset = run_dataset(run)
        if run.response:
            dataset = dataset.select(run.response)
        cfg = run.dpm_config()
        hp = derive_dpm_hyperparams(dataset, cfg.kmeans_k, rng=derive_seed(run.seed, 0), tau_k=cfg.tau_k)
        chains = fit_chains(lambda rng: fit_dpm(dataset, hp, cfg, rng), run.chains,
                            seed=derive_seed(run.seed, 1), workers=run.workers)
        draws = PosteriorDraws.concatenate(chains) if len(chains) > 1 else chains[0]
        draws.meta['columns'] = dataset.names

        draws.write_ndjson(run.out_dir / 'draws.ndjson')
        draws.to_csv(run.out_dir / 'draws.csv')
        clusters = draws.n_clusters()
        write_report(build_report(self.command_name, {
            'columns': dataset.names,
            'n': dataset.n_rows,
            'chains': run.chains,
            'hyperparams': hp.to_dict(),
            'fit': [chain.report.model_dump(exclude={'seconds', 'mean_sweep_seconds'}) for chain in chains],
            'mean_clusters': float(clusters.mean()) if clusters.size else 0.0,
            'alpha_mean': float(draws.alpha.mean()) if draws.n_draws else 0.0,
            'run_config': run.echo(),
        }), run.out_dir)
        return {'retained draws': draws.n_draws, 'mean clusters': round(float(clusters.mean()), 3)}
