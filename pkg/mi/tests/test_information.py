import numpy as np
import pytest

from core.exceptions import ArgumentError, ShapeError
from density.distributions import Gaussian
from mi.information import (
    BALANCED,
    IMBALANCED,
    CurveScenario,
    LabeledMixture,
    entropy_labels,
    estimate_mutual_information,
    mi_unl_curve,
    mutual_information,
    normalized_mi_z,
)
from mi.tests.quadrature import mutual_information_oracle, underlap_oracle


class TestEntropy:
    def test_uniform(self):
        assert entropy_labels(BALANCED) == pytest.approx(np.log(3), abs=1e-12)

    def test_imbalanced(self):
        assert entropy_labels(IMBALANCED) == pytest.approx(0.7401, abs=1e-4)

    def test_point_mass_has_zero_entropy(self):
        assert entropy_labels([1.0, 0.0, 0.0]) == 0.0

    def test_normalization_needs_positive_entropy(self):
        with pytest.raises(ArgumentError):
            normalized_mi_z(0.1, [1.0, 0.0])


class TestMutualInformation:
    def test_identical_groups_carry_no_information(self):
        model = LabeledMixture(np.array(BALANCED), [Gaussian(0, 1)] * 3)
        assert mutual_information(model, 20_000, rng=1) == pytest.approx(0.0, abs=1e-12)

    def test_separated_groups_reach_label_entropy(self):
        model = LabeledMixture(np.array(BALANCED), [Gaussian(-6, 1), Gaussian(0, 1), Gaussian(6, 1)])
        assert mutual_information(model, 100_000, rng=2) == pytest.approx(np.log(3), abs=0.01)

    def test_matches_quadrature(self):
        priors = np.array([0.2, 0.5, 0.3])
        means = [-1.0, 0.5, 2.0]
        model = LabeledMixture(priors, [Gaussian(mu, 1) for mu in means])
        estimate = estimate_mutual_information(model, 200_000, rng=3)
        oracle = mutual_information_oracle(priors, means)
        assert abs(estimate.value - oracle) <= 4 * estimate.stderr + 1e-3

    def test_shared_affine_map_leaves_oracle_unchanged(self):
        priors = [0.3, 0.3, 0.4]
        means, sds = np.array([-1.0, 0.0, 1.5]), np.array([1.0, 0.7, 1.2])
        before = mutual_information_oracle(priors, means, sds)
        after = mutual_information_oracle(priors, 1.5 * means + 2.0, 1.5 * sds)
        assert after == pytest.approx(before, abs=1e-3)

    def test_priors_and_groups_must_agree(self):
        with pytest.raises(ArgumentError):
            LabeledMixture(np.array([0.5, 0.5]), [Gaussian(0, 1)] * 3)

    def test_groups_share_support(self):
        with pytest.raises(ShapeError):
            LabeledMixture(np.array([0.5, 0.5]), [Gaussian(0, 1), Gaussian([0, 0], np.eye(2))])


class TestCurve:
    def test_unknown_family(self):
        with pytest.raises(ArgumentError):
            CurveScenario('diagonal')

    def test_balanced_symmetric_curve_matches_oracles(self):
        scenario = CurveScenario('symmetric', 'balanced')
        grid = [0.0, 1.5, 3.0, 6.0]
        frame = mi_unl_curve(scenario, grid, 100_000, seed=8)
        assert list(frame.columns) == ['D', 'unl', 'unl_stderr_bound', 'mi_z', 'mi']
        for row in frame.itertuples():
            means = scenario.means(row.D)
            assert row.unl == pytest.approx(underlap_oracle(means), abs=0.05)
            oracle_mi_z = mutual_information_oracle(scenario.priors, means) / np.log(3)
            assert row.mi_z == pytest.approx(oracle_mi_z, abs=0.05)
        first, last = frame.iloc[0], frame.iloc[-1]
        assert first['unl'] == pytest.approx(1.0, abs=0.02) and first['mi_z'] == pytest.approx(0.0, abs=0.02)
        assert last['unl'] == pytest.approx(3.0, abs=0.02) and last['mi_z'] == pytest.approx(1.0, abs=0.02)

    def test_imbalanced_shifted_family_separates_unl_from_mi(self):
        frame = mi_unl_curve(CurveScenario('shifted', 'imbalanced'), [6.0], 100_000, seed=9)
        assert frame.loc[0, 'unl'] == pytest.approx(2.04, abs=0.05)
        assert frame.loc[0, 'mi_z'] < 0.2

    def test_curve_rises_with_separation(self):
        frame = mi_unl_curve(CurveScenario(), np.linspace(0, 6, 9), 40_000, seed=10)
        smoothed = frame[['unl', 'mi_z']].rolling(3, center=True, min_periods=1).mean()
        slack = 2 * frame['unl_stderr_bound'].max()
        assert np.all(np.diff(smoothed['unl']) >= -slack)
        assert np.all(np.diff(smoothed['mi_z']) >= -0.01)

    def test_bits(self):
        nats = mi_unl_curve(CurveScenario(), [2.0], 5000, seed=1)
        bits = mi_unl_curve(CurveScenario(), [2.0], 5000, seed=1, bits=True)
        assert bits.loc[0, 'mi'] == pytest.approx(nats.loc[0, 'mi'] / np.log(2))
        assert bits.loc[0, 'mi_z'] == nats.loc[0, 'mi_z']

    def test_empty_grid(self):
        with pytest.raises(ArgumentError):
            mi_unl_curve(CurveScenario(), [], 100, seed=0)
