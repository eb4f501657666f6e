"""
Report files written by the management commands.

report.json carries a schema version and a created_at timestamp; with the
timestamp removed, identical configs and seeds give byte-identical JSON.
"""

import json
import logging
from pathlib import Path
from typing import Dict, Optional

import pandas as pd
from django.conf import settings
from django.utils import timezone

from core.utils import render_markdown

logger = logging.getLogger(__name__)

REPORT_FILE = 'report.json'
DRAWS_FILE = 'draws.csv'
PARTITION_FILE = 'partition.csv'
SUMMARY_FILE = 'summary.md'
TIMESTAMP_FIELD = 'created_at'


def build_report(command: str, payload: Dict) -> Dict:
    report = {
        'schema_version': getattr(settings, 'UNDERLAP_REPORT_SCHEMA_VERSION', '1.0'),
        'command': command,
        TIMESTAMP_FIELD: timezone.now().isoformat(),
    }
    report.update(payload)
    return report


def dump_report(report: Dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2, allow_nan=False)


def write_report(report: Dict, out_dir) -> Path:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / REPORT_FILE
    path.write_text(dump_report(report) + '\n')
    logger.info(f"Wrote {path}")
    return path


def comparable(report_text: str) -> Dict:
    """Parsed report without the timestamp, for reproducibility checks"""
    report = json.loads(report_text)
    report.pop(TIMESTAMP_FIELD, None)
    return report


def unl_draws_frame(posteriors: Dict) -> pd.DataFrame:
    """Long table of UNL draws: subset, s, value, ess, weight_max, variance_bound"""
    frames = []
    for name, posterior in posteriors.items():
        frame = posterior.to_frame()
        frame.insert(0, 'subset', name)
        frames.append(frame)
    if not frames:
        return pd.DataFrame(columns=['subset', 's', 'value', 'ess', 'weight_max', 'variance_bound'])
    return pd.concat(frames, ignore_index=True)


def write_summary(template_name: str, context: Dict, out_dir) -> Path:
    path = Path(out_dir) / SUMMARY_FILE
    path.write_text(render_markdown(template_name=template_name, context=context, template_dir='reports/templates'))
    return path


def write_pipeline_outputs(flow, command: str, out_dir, run_config: Optional[Dict] = None) -> Dict:
    """report.json, draws.csv, partition.csv and summary.md for a finished pipeline"""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    payload = flow.state.model_dump(mode='json')
    if run_config is not None:
        payload['run_config'] = run_config
    report = build_report(command, payload)
    write_report(report, out_dir)

    unl_draws_frame(flow.posteriors).to_csv(out_dir / DRAWS_FILE, index=False)
    if flow.partition is not None:
        flow.partition.to_csv(out_dir / PARTITION_FILE)
    interval_samples = getattr(flow, 'interval_samples', None)
    if interval_samples is not None:
        interval_samples.to_csv(out_dir / 'interval_samples.csv', index=False)

    write_summary('pipeline_summary.md', {
        'command': command,
        'report': report,
        'timings': flow.timings,
    }, out_dir)
    return report
