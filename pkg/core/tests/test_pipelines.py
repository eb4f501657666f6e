"""
End-to-end pipeline runs on the simulated examples at desk scale.

The benchmark pipelines marked slow take minutes each; run them with -m slow.
"""

import json

import numpy as np
import pytest
from django.core.management import call_command
from scipy.optimize import linear_sum_assignment

from core.config import PipelineConfig, PredictiveConfig
from core.exceptions import PipelineStageError
from core.flows.base import SINGLE_CLUSTER_NOTICE
from core.flows.conditional_pipeline_flow.flow import run_conditional_pipeline
from core.flows.marginal_pipeline_flow.flow import run_marginal_pipeline
from core.services.simulation_service import simulate
from mixtures.config import DpmConfig, LddpConfig

DESK = {'n_burn': 1000, 'n_iter': 1000}
ODD = [f'x{j}' for j in range(1, 21, 2)]
EVEN = [f'x{j}' for j in range(2, 21, 2)]


def desk_config(**fields):
    fields.setdefault('m', 2000)
    return PipelineConfig(
        dpm=DpmConfig(**DESK), covariate_dpm=DpmConfig(**DESK), lddp=LddpConfig(**DESK), **fields,
    )


def unl_means(flow):
    return {result.name: result.summary['mean'] for result in flow.state.unl}


def agreement(labels, truth):
    """Share of matching labels under the best one-to-one relabeling"""
    table = np.zeros((labels.max() + 1, truth.max() + 1))
    np.add.at(table, (labels, truth), 1)
    rows, cols = linear_sum_assignment(-table)
    return table[rows, cols].sum() / labels.size


def test_single_cluster_skips_unl():
    data = simulate('A', 120, seed=3)
    cfg = PipelineConfig(response=['y'], covariates=['x'], m=100,
                         dpm=DpmConfig(truncation=1, n_burn=5, n_iter=5))
    flow = run_marginal_pipeline(data, cfg)
    assert flow.state.n_clusters == 1
    assert flow.state.unl == []
    assert flow.state.notices == [SINGLE_CLUSTER_NOTICE]
    assert flow.state.stage == 'done'


def test_stage_is_named_on_failure():
    data = simulate('A', 60, seed=1)
    cfg = PipelineConfig(response=['y'], covariates=['missing'], m=100)
    with pytest.raises(PipelineStageError) as caught:
        run_marginal_pipeline(data, cfg)
    assert caught.value.stage == 'validate'


@pytest.mark.slow
def test_example_a_recovers_three_bands():
    data = simulate('A', 300, seed=11)
    flow = run_marginal_pipeline(data, desk_config(response=['y'], covariates=['x'], seed=11))
    x = data.continuous_block(['x'])[:, 0]
    truth = np.where(x <= -1, 0, np.where(x >= 1, 2, 1))
    assert flow.partition.k == 3
    assert agreement(flow.partition.labels - 1, truth) >= 0.95
    assert unl_means(flow)['joint'] >= 2.7


@pytest.mark.slow
def test_example_b_needs_both_covariates():
    data = simulate('B', 300, seed=12)
    flow = run_marginal_pipeline(data, desk_config(response=['y'], covariates=['x1', 'x2'], seed=12))
    means = unl_means(flow)
    assert means['joint'] >= 1.8
    assert means['x1'] <= 1.2 and means['x2'] <= 1.2


@pytest.mark.slow
def test_example_c1_depends_on_the_indicator():
    data = simulate('C1', 400, seed=13)
    flow = run_conditional_pipeline(data, desk_config(response=['y'], covariates=['xc', 'xd'], seed=13))
    means = unl_means(flow)
    assert flow.partition.k >= 3
    assert means['xd'] >= 1.6
    assert means['joint'] >= 1.6


@pytest.mark.slow
def test_example_c2_is_close_to_independence():
    data = simulate('C2', 400, seed=14)
    flow = run_conditional_pipeline(data, desk_config(response=['y'], covariates=['xc', 'xd'], seed=14))
    assert flow.partition.k == 2
    assert all(mean <= 1.2 for mean in unl_means(flow).values())


@pytest.mark.slow
def test_example_d_odd_covariates_carry_the_dependence():
    data = simulate('D', 500, seed=15)
    cfg = desk_config(
        response=['y'], covariates=ODD + EVEN, regressors=['x1'], seed=15,
        subsets={'odd': ODD, 'even': EVEN, 'x1': ['x1']},
        predictive=PredictiveConfig(n_rep=20, covariate='x1'),
    )
    flow = run_conditional_pipeline(data, cfg)
    means = unl_means(flow)
    assert means['odd'] - means['even'] >= 0.3
    assert abs(means['x1'] - means['odd']) <= 0.3
    statistics = flow.state.predictive['statistics']
    assert len(statistics) == 21
    assert {'skewness', 'kurtosis', 'sd', 'max'} <= set(statistics[0])
    assert flow.interval_samples['interval'].nunique() == 4


@pytest.mark.slow
@pytest.mark.django_db
def test_pipeline_command_outputs(tmp_path):
    out = tmp_path / 'a'
    call_command('pipeline_marginal', example='A', response='y', covariates='x',
                 desk_scale=True, seed=21, out_dir=out)
    report = json.loads((out / 'report.json').read_text())
    assert report['kind'] == 'marginal' and report['stage'] == 'done'
    assert report['n_rows'] == 300
    assert [result['name'] for result in report['unl']] == ['joint']
    assert 'seconds' not in report['fit']
    for name in ('draws.csv', 'partition.csv', 'summary.md'):
        assert (out / name).exists()

    again = tmp_path / 'again'
    call_command('pipeline_marginal', example='A', response='y', covariates='x',
                 desk_scale=True, seed=21, out_dir=again)
    first = json.loads((out / 'report.json').read_text())
    second = json.loads((again / 'report.json').read_text())
    first.pop('created_at'), second.pop('created_at')
    first['run_config'].pop('out_dir'), second['run_config'].pop('out_dir')
    assert first == second
