import numpy as np
from django.core.management.base import CommandError

from core.dataset import CONTINUOUS
from core.exceptions import ArgumentError
from core.flows.base import PREDICTIVE_SEED
from core.management.base import UnderlapCommand, run_dataset, split_columns
from core.management.commands.fit_lddp import regression_inputs
from core.reports import build_report, write_report
from core.utils import derive_seed
from mixtures.draws import PosteriorDraws
from mixtures.services import conditional_interval_samples, posterior_predictive, predictive_statistics

DEFAULT_N_REP = 200


def parse_cutoffs(value):
    if value is None:
        return None
    try:
        return [float(item) for item in split_columns(value)]
    except ValueError:
        raise CommandError(f"--cutoffs must be comma-separated numbers, got {value!r}")


class Command(UnderlapCommand):
    help = "Posterior predictive checks for saved DPM or LDDP draws"
    command_name = 'ppc'

    def add_command_arguments(self, parser):
        parser.add_argument('--draws', help="draws.ndjson written by fit_dpm or fit_lddp")
        parser.add_argument('--data', help="CSV file the draws were fitted to")
        parser.add_argument('--example', help="Simulated example the draws were fitted to")
        parser.add_argument('--response', help="Response column")
        parser.add_argument('--regressors', help="Regressors used by fit_lddp")
        parser.add_argument('--n-rep', type=int, help=f"Replicated datasets (default {DEFAULT_N_REP})")
        parser.add_argument('--covariate', help="Design column for conditional interval samples (LDDP only)")
        parser.add_argument('--cutoffs', help="Comma-separated interval cutoffs (default: quartiles)")

    def overrides(self, options):
        return {
            'draws': options.get('draws'),
            'data': options.get('data'),
            'example': options.get('example'),
            'response': split_columns(options.get('response')),
            'regressors': split_columns(options.get('regressors')),
        }

    def execute_run(self, run, options):
        run.require('draws', 'response')
        draws = PosteriorDraws.read_ndjson(run.draws)
        dataset = run_dataset(run)
        n_rep = options.get('n_rep')
        if n_rep is None:
            n_rep = run.predictive.n_rep if run.predictive else DEFAULT_N_REP
        cutoffs = parse_cutoffs(options.get('cutoffs'))
        if cutoffs is None and run.predictive:
            cutoffs = run.predictive.cutoffs
        seed = derive_seed(run.seed, PREDICTIVE_SEED)

        payload = {'draws_file': str(run.draws), 'kind': draws.kind, 'n_rep': n_rep}
        if draws.kind == 'lddp':
            y, X, labels = regression_inputs(run, dataset)
            fitted = draws.meta.get('design_columns')
            if fitted is not None and fitted != labels:
                raise ArgumentError(f"design columns {labels} differ from the fitted ones {fitted}")
            statistics = predictive_statistics(
                posterior_predictive(draws, n_rep, rng=derive_seed(seed, 0), x_new=X), observed=y)
            covariate = options.get('covariate') or (run.predictive.covariate if run.predictive else None)
            if covariate is not None:
                if covariate not in labels[1:]:
                    raise ArgumentError(f"{covariate!r} is not a design column; choose from {labels[1:]}")
                samples = conditional_interval_samples(draws, X, labels.index(covariate), n_rep,
                                                       rng=derive_seed(seed, 1), cutoffs=cutoffs)
                samples.to_csv(run.out_dir / 'interval_samples.csv', index=False)
                payload['covariate'] = covariate
                payload['intervals'] = (samples[['interval', 'lower', 'upper']].drop_duplicates()
                                        .replace({np.inf: None, -np.inf: None}).to_dict(orient='records'))
        else:
            statistics = self.dpm_statistics(draws, dataset, run.response[0], n_rep, derive_seed(seed, 0))

        statistics.to_csv(run.out_dir / 'predictive_statistics.csv', index=False)
        payload['observed'] = statistics[statistics['replicate'] == 'observed'].iloc[0].to_dict()
        replicated = statistics[statistics['replicate'] != 'observed']
        payload['replicated_mean'] = {
            column: float(replicated[column].mean()) for column in ('skewness', 'kurtosis', 'sd', 'max')
        } if len(replicated) else {}
        write_report(build_report(self.command_name, payload), run.out_dir)
        return {'replicates': len(replicated), 'observed sd': round(payload['observed']['sd'], 4)}

    @staticmethod
    def dpm_statistics(draws, dataset, response, n_rep, seed):
        """Statistics of one continuous column of the clustered variables"""
        columns = draws.meta.get('columns') or dataset.names
        fitted = dataset.select(columns)
        if response not in fitted.names or fitted.column(response).kind != CONTINUOUS:
            raise ArgumentError(f"{response!r} is not a continuous column of the fitted data {columns}")
        index = fitted.continuous_names().index(response)
        replicates = posterior_predictive(draws, n_rep, rng=seed)
        values = np.array([points.continuous[:, index] for points in replicates]) if replicates \
            else np.zeros((0, fitted.n_rows))
        return predictive_statistics(values, observed=fitted.continuous_block([response])[:, 0])
