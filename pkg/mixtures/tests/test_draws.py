import json

import numpy as np
import pytest

from core.dataset import MixedDataset
from core.exceptions import ArgumentError, ShapeError, UndersizeClusterError
from mixtures.config import DpmConfig, LddpConfig
from mixtures.draws import PosteriorDraws
from mixtures.hyperparams import add_intercept, derive_dpm_hyperparams, derive_lddp_hyperparams
from mixtures.services import (
    cluster_covariate_densities,
    conditional_interval_samples,
    fit_dpm,
    fit_lddp,
    posterior_predictive,
    predictive_statistics,
)
from mixtures.services.covariate_densities import cluster_kmeans_k
from mixtures.services.predictive import interval_edges, sample_statistics
from partitions.similarity import Partition


@pytest.fixture
def dpm_draws(rng):
    codes = rng.integers(2, size=80)
    data = MixedDataset.from_arrays({'y': rng.normal(size=80) + 5 * codes}, {'c': (codes, ['u', 'v'])})
    hp = derive_dpm_hyperparams(data, 3, rng=0)
    return fit_dpm(data, hp, DpmConfig(truncation=5, n_burn=30, n_iter=40), rng=1)


@pytest.fixture
def regression(rng):
    x = rng.uniform(0, 4, size=120)
    X = add_intercept(x)
    y = 1.0 + 0.5 * x + rng.normal(scale=0.4, size=120)
    draws = fit_lddp(y, X, derive_lddp_hyperparams(y, X), LddpConfig(truncation=4, n_burn=30, n_iter=40), rng=2)
    return y, X, draws


class TestPosteriorDraws:
    def test_weights_must_sum_to_one(self):
        with pytest.raises(ShapeError):
            PosteriorDraws('dpm', allocations=[[0, 0]], weights=[[0.5, 0.4]], sticks=[[0.5, 1.0]],
                           alpha=[1.0], params={})

    def test_last_stick_is_one(self):
        with pytest.raises(ShapeError):
            PosteriorDraws('dpm', allocations=[[0, 1]], weights=[[0.5, 0.5]], sticks=[[0.5, 0.9]],
                           alpha=[1.0], params={})

    def test_allocations_need_positive_weight(self):
        with pytest.raises(ShapeError):
            PosteriorDraws('lddp', allocations=[[0, 1]], weights=[[1.0, 0.0]], sticks=[[1.0, 1.0]],
                           alpha=[1.0], params={})

    def test_unknown_kind(self):
        with pytest.raises(ArgumentError):
            PosteriorDraws('hdp', allocations=[[0]], weights=[[1.0]], sticks=[[1.0]], alpha=[1.0], params={})

    def test_frame(self, dpm_draws):
        frame = dpm_draws.to_frame()
        assert list(frame.columns[:3]) == ['iteration', 'alpha', 'n_clusters']
        assert [c for c in frame.columns if c.startswith('w_')] == [f'w_{l}' for l in range(1, 6)]
        assert len(frame) == 40

    def test_ndjson_file_layout(self, dpm_draws, tmp_path):
        path = tmp_path / 'draws.ndjson'
        dpm_draws.write_ndjson(path)
        lines = path.read_text().splitlines()
        header, first = json.loads(lines[0]), json.loads(lines[1])
        assert len(lines) == 41
        assert header['kind'] == 'dpm' and header['n'] == 80 and header['L'] == 5
        assert header['p'] == 1 and header['categorical_cardinalities'] == [2]
        assert min(first['z']) >= 1 and max(first['z']) <= 5
        assert first['iteration'] == 1

    def test_ndjson_restores_the_draws(self, dpm_draws, tmp_path):
        path = tmp_path / 'draws.ndjson'
        dpm_draws.meta['columns'] = ['y', 'c']
        dpm_draws.write_ndjson(path)
        restored = PosteriorDraws.read_ndjson(path)
        np.testing.assert_array_equal(restored.allocations, dpm_draws.allocations)
        np.testing.assert_allclose(restored.params['sigma'], dpm_draws.params['sigma'])
        assert restored.signature == dpm_draws.signature
        assert restored.report.n_retained == 40
        assert restored.meta['columns'] == ['y', 'c']

    def test_not_a_draws_file(self, tmp_path):
        path = tmp_path / 'other.ndjson'
        path.write_text('{"format": "something-else"}\n')
        with pytest.raises(ArgumentError):
            PosteriorDraws.read_ndjson(path)

    def test_component_densities_are_dpm_only(self, regression):
        _, _, draws = regression
        with pytest.raises(ArgumentError):
            draws.mixture(0)


class TestPredictive:
    def test_dpm_replicates(self, dpm_draws, rng):
        replicates = posterior_predictive(dpm_draws, 7, rng)
        assert len(replicates) == 7
        assert all(r.n == 80 and r.categorical.shape == (80, 1) for r in replicates)

    def test_dpm_rejects_design_rows(self, dpm_draws):
        with pytest.raises(ArgumentError):
            posterior_predictive(dpm_draws, 2, 0, x_new=np.ones((3, 2)))

    def test_lddp_replicates(self, regression):
        y, X, draws = regression
        replicates = posterior_predictive(draws, 5, 3, x_new=X[:10])
        assert replicates.shape == (5, 10)
        with pytest.raises(ArgumentError):
            posterior_predictive(draws, 5, 3)
        with pytest.raises(ShapeError):
            posterior_predictive(draws, 5, 3, x_new=np.ones((4, 3)))

    def test_zero_replicates(self, regression):
        _, X, draws = regression
        assert posterior_predictive(draws, 0, 1, x_new=X).shape == (0, X.shape[0])

    def test_statistics_table(self, regression):
        y, X, draws = regression
        table = predictive_statistics(posterior_predictive(draws, 4, 5, x_new=X), observed=y)
        assert list(table.columns) == ['replicate', 'skewness', 'kurtosis', 'sd', 'max']
        assert table['replicate'].tolist() == ['1', '2', '3', '4', 'observed']
        assert table.iloc[-1]['max'] == pytest.approx(y.max())

    def test_kurtosis_is_excess(self, rng):
        values = rng.normal(size=200_000)
        assert sample_statistics(values)['kurtosis'] == pytest.approx(0.0, abs=0.05)

    def test_quartile_edges(self):
        edges = interval_edges(np.arange(1, 10))
        np.testing.assert_array_equal(edges, [-np.inf, 3.0, 5.0, 7.0, np.inf])
        np.testing.assert_array_equal(interval_edges([0, 1], cutoffs=[2, 1, 2]), [-np.inf, 1, 2, np.inf])

    def test_conditional_interval_samples(self, regression):
        _, X, draws = regression
        samples = conditional_interval_samples(draws, X, 1, 3, rng=4, cutoffs=[1.0, 2.0])
        assert list(samples.columns) == ['interval', 'lower', 'upper', 'replicate', 'y']
        assert sorted(samples['interval'].unique()) == [1, 2, 3]
        in_first = int(np.sum(X[:, 1] <= 1.0))
        assert int(np.sum(samples['interval'] == 1)) == 3 * in_first

    def test_conditional_samples_need_lddp(self, dpm_draws):
        with pytest.raises(ArgumentError):
            conditional_interval_samples(dpm_draws, np.ones((80, 2)), 1, 2)


class TestCovariateDensities:
    def test_kmeans_k_shrinks_with_cluster_size(self):
        assert cluster_kmeans_k(100, 3) == 3
        assert cluster_kmeans_k(5, 3) == 2
        assert cluster_kmeans_k(4, 10) == 2

    def test_matrix_shape(self, rng):
        labels = np.repeat([1, 2, 3], 20)
        x = rng.normal(size=60) + 3 * labels
        covariates = MixedDataset.from_arrays({'x': x})
        cfg = DpmConfig(truncation=4, n_burn=20, n_iter=15)
        matrix = cluster_covariate_densities(Partition(labels), covariates, cfg, seed=3, workers=2)
        assert len(matrix) == 15
        assert all(len(row) == 3 for row in matrix)
        assert matrix[0][0].signature == covariates.signature()

    def test_results_do_not_depend_on_workers(self, rng):
        labels = np.repeat([1, 2], 15)
        covariates = MixedDataset.from_arrays({'x': rng.normal(size=30)})
        cfg = DpmConfig(truncation=3, n_burn=5, n_iter=5)
        serial = cluster_covariate_densities(Partition(labels), covariates, cfg, seed=8, workers=1)
        parallel = cluster_covariate_densities(Partition(labels), covariates, cfg, seed=8, workers=3)
        for row_a, row_b in zip(serial, parallel):
            for first, second in zip(row_a, row_b):
                np.testing.assert_array_equal(first.weights, second.weights)

    def test_small_clusters_are_rejected(self, rng):
        labels = np.array([1] * 20 + [2] * 4)
        covariates = MixedDataset.from_arrays({'x': rng.normal(size=24)})
        with pytest.raises(UndersizeClusterError) as caught:
            cluster_covariate_densities(Partition(labels), covariates, DpmConfig(), seed=0)
        assert caught.value.cluster == 2 and caught.value.size == 4

    def test_partition_must_match_rows(self, rng):
        covariates = MixedDataset.from_arrays({'x': rng.normal(size=10)})
        with pytest.raises(ShapeError):
            cluster_covariate_densities(Partition(np.ones(12)), covariates, DpmConfig(), seed=0)
