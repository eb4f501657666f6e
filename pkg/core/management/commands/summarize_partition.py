from django.conf import settings

from core.management.base import UnderlapCommand
from core.reports import build_report, write_report
from mixtures.draws import PosteriorDraws
from partitions.similarity import representative_partition, similarity_matrix, vi_lower_bound


class Command(UnderlapCommand):
    help = "Select the representative partition of saved draws"
    command_name = 'summarize_partition'

    def add_command_arguments(self, parser):
        parser.add_argument('--draws', help="draws.ndjson written by fit_dpm or fit_lddp")
        parser.add_argument('--write-psm', action='store_true', help="Also write the dense similarity matrix")

    def overrides(self, options):
        return {'draws': options.get('draws')}

    def execute_run(self, run, options):
        run.require('draws')
        draws = PosteriorDraws.read_ndjson(run.draws)
        psm = similarity_matrix(draws)
        partition = representative_partition(draws)
        bound = vi_lower_bound(partition, psm)

        partition.to_csv(run.out_dir / 'partition.csv')
        if options.get('write_psm'):
            if psm.n > settings.UNDERLAP_MAX_PSM_EXPORT:
                self.stderr.write(f"Similarity matrix not written: n={psm.n} exceeds "
                                  f"{settings.UNDERLAP_MAX_PSM_EXPORT}")
            else:
                psm.to_csv(run.out_dir / 'psm.csv')
        write_report(build_report(self.command_name, {
            'draws_file': str(run.draws),
            'kind': draws.kind,
            'n': draws.n,
            'n_draws': draws.n_draws,
            'n_clusters': partition.k,
            'cluster_sizes': partition.sizes().tolist(),
            'vi_lower_bound': bound,
        }), run.out_dir)
        return {'clusters': partition.k, 'VI lower bound': round(bound, 4)}
