from django.core.management.base import CommandError

from core.management.base import UnderlapCommand, split_columns
from core.reports import build_report, write_report
from mi.information import CurveScenario, mi_unl_curve


class Command(UnderlapCommand):
    help = "Trace UNL against normalized mutual information over a separation grid"
    command_name = 'mi_curve'

    def add_command_arguments(self, parser):
        parser.add_argument('--family', choices=CurveScenario.FAMILIES)
        parser.add_argument('--prevalence', choices=sorted(CurveScenario.PREVALENCES))
        parser.add_argument('--d-grid', help="Comma-separated separations D")
        parser.add_argument('--m', type=int, help="Monte Carlo draws per grid point")
        parser.add_argument('--bits', action='store_true', help="Report raw MI in bits")

    def overrides(self, options):
        return {'m': options.get('m')}

    def execute_run(self, run, options):
        curve = run.curve.model_copy(update={
            key: value for key, value in {
                'family': options.get('family'),
                'prevalence': options.get('prevalence'),
                'd_grid': parse_grid(options.get('d_grid')),
                'bits': True if options.get('bits') else None,
            }.items() if value is not None
        })
        scenario = CurveScenario(curve.family, curve.prevalence)
        frame = mi_unl_curve(scenario, curve.d_grid, run.mc_draws, seed=run.seed,
                             workers=run.workers, bits=curve.bits)
        frame.to_csv(run.out_dir / 'curve.csv', index=False)
        write_report(build_report(self.command_name, {
            'family': curve.family,
            'prevalence': curve.prevalence,
            'priors': scenario.priors.tolist(),
            'm': run.mc_draws,
            'mi_units': 'bits' if curve.bits else 'nats',
            'curve': frame.to_dict(orient='records'),
        }), run.out_dir)
        return {'grid points': len(frame), 'max UNL': round(float(frame['unl'].max()), 4)}


def parse_grid(value):
    if value is None:
        return None
    try:
        return [float(d) for d in split_columns(value)]
    except ValueError:
        raise CommandError(f"--d-grid must be comma-separated numbers, got {value!r}")
