"""
Shared plumbing of the management commands.

Every command accepts --config, --seed, --desk-scale, --out-dir and
--workers, resolves a RunConfig before computing anything, records a RunLog
row and turns library errors into CommandError.
"""

import logging
import time
from pathlib import Path
from typing import Dict, Optional

from django.core.management.base import BaseCommand, CommandError
from django.db import DatabaseError

from audit.models import RunLog
from core.config import RunConfig
from core.dataset import MixedDataset, load_dataset
from core.exceptions import ArgumentError, UnderlapError
from core.services.simulation_service import SimulationService

logger = logging.getLogger(__name__)


class UnderlapCommand(BaseCommand):
    command_name = ''

    def add_arguments(self, parser):
        parser.add_argument('--config', type=Path, help="JSON run configuration")
        parser.add_argument('--seed', type=int, help="Master seed")
        parser.add_argument('--desk-scale', action='store_true',
                            help="Short chains, fewer IS draws and halved simulated n")
        parser.add_argument('--out-dir', type=Path, help="Directory for report files")
        parser.add_argument('--workers', type=int, help="Worker threads (default UNDERLAP_WORKERS)")
        self.add_command_arguments(parser)

    def add_command_arguments(self, parser):
        pass

    def overrides(self, options) -> Dict:
        """Command-specific flags mapped onto RunConfig fields"""
        return {}

    def execute_run(self, run: RunConfig, options) -> Dict:
        raise NotImplementedError

    def handle(self, *args, **options):
        started = time.perf_counter()
        overrides = {
            'seed': options.get('seed'),
            'desk_scale': True if options.get('desk_scale') else None,
            'out_dir': options.get('out_dir'),
            'workers': options.get('workers'),
        }
        overrides.update(self.overrides(options))
        run: Optional[RunConfig] = None
        try:
            run = RunConfig.load(options.get('config'), **overrides)
            run.out_dir.mkdir(parents=True, exist_ok=True)
            summary = self.execute_run(run, options)
        except UnderlapError as e:
            logger.error(f"{self.command_name} failed: {e}")
            self.log_run(run, started, success=False, error_message=str(e))
            raise CommandError(str(e)) from e

        self.log_run(run, started, summary=summary)
        self.stdout.write(self.style.SUCCESS(f"{self.command_name} finished; outputs in {run.out_dir}"))
        for key, value in (summary or {}).items():
            self.stdout.write(f"  {key}: {value}")

    def log_run(self, run: Optional[RunConfig], started: float, summary=None, success=True, error_message=''):
        try:
            RunLog.log_run(
                command=self.command_name,
                parameters=run.echo() if run else {},
                summary=summary,
                seed=run.seed if run else None,
                desk_scale=run.desk_scale if run else False,
                output_dir=run.out_dir if run else '',
                duration_seconds=time.perf_counter() - started,
                success=success,
                error_message=error_message,
            )
        except DatabaseError as e:
            logger.warning(f"Could not record the run in the audit table: {e}")


def split_columns(value: Optional[str]):
    """'a,b , c' -> ['a', 'b', 'c']; None stays None"""
    if value is None:
        return None
    return [item.strip() for item in value.split(',') if item.strip()]


def parse_subsets(values) -> Optional[Dict]:
    """['odd=x1,x3', 'x1=x1'] -> {'odd': ['x1', 'x3'], 'x1': ['x1']}"""
    if not values:
        return None
    subsets = {}
    for value in values:
        name, sep, columns = value.partition('=')
        if not sep:
            raise CommandError(f"subset {value!r} must look like NAME=col1,col2")
        subsets[name.strip()] = split_columns(columns)
    return subsets


def run_dataset(run: RunConfig) -> MixedDataset:
    """The --data CSV, or a simulated example when only --example is given"""
    if run.data is not None:
        return load_dataset(run.data, run.columns)
    if run.example is not None:
        n = run.n or SimulationService.default_size(run.example, desk_scale=run.desk_scale)
        return SimulationService(run.seed).simulate(run.example, n)
    raise ArgumentError("either a data file or an example id is required")
