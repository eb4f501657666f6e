from core.dataset import schema_path_for
from core.management.base import UnderlapCommand
from core.reports import build_report, write_report
from core.services.simulation_service import SimulationService


class Command(UnderlapCommand):
    help = "Simulate one of the benchmark examples (A, B, C1, C2, D) to CSV"
    command_name = 'simulate'

    def add_command_arguments(self, parser):
        parser.add_argument('--example', help="Example id: A, B, C1, C2 or D")
        parser.add_argument('--n', type=int, help="Rows (default: the example's standard size)")

    def overrides(self, options):
        return {'example': options.get('example'), 'n': options.get('n')}

    def execute_run(self, run, options):
        run.require('example')
        example = SimulationService.check_example(run.example)
        n = run.n or SimulationService.default_size(example, desk_scale=run.desk_scale)
        dataset = SimulationService(run.seed).simulate(example, n)

        csv_path = run.out_dir / f'example_{example}.csv'
        dataset.to_csv(csv_path)
        dataset.write_schema(schema_path_for(csv_path))
        write_report(build_report(self.command_name, {
            'example': example,
            'n': dataset.n_rows,
            'seed': run.seed,
            'columns': dataset.schema(),
            'data_file': csv_path.name,
        }), run.out_dir)
        return {'example': example, 'rows': dataset.n_rows, 'file': str(csv_path)}
