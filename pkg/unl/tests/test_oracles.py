import numpy as np
import pytest
from scipy import stats

from core.exceptions import CapacityError, PreconditionError
from density.distributions import CategoricalProduct, Gaussian, Mixture
from density.operations import affine_pushforward, marginalize, project
from unl.estimator import estimate_unl, variance_bound
from unl.oracles import (
    QuadratureGrid,
    total_variation_quadrature,
    tv_partition_sup_discrete,
    unl_exact_discrete,
    unl_quadrature,
)

LINE = QuadratureGrid.cube(-12.0, 12.0, 1e-3, 1)
WIDE_LINE = QuadratureGrid.cube(-30.0, 30.0, 1e-3, 1)
PLANE = QuadratureGrid.cube(-14.0, 14.0, 0.025, 2)
# unrefined midpoint rule
COARSE_PLANE = QuadratureGrid.cube(-12.0, 12.0, 0.05, 2)
COARSE_PLANE_ERROR = 3e-3

# K cycles through 2, 3 and 4
SEEDS = range(100)


def random_line_groups(rng, k):
    """Two-component univariate Gaussian mixtures"""
    return [Mixture(rng.dirichlet([2, 2]), [Gaussian(rng.uniform(-3, 3), 0.3 + 1.2 * rng.random()) for _ in range(2)])
            for _ in range(k)]


def random_plane_groups(rng, k):
    """Two-component bivariate Gaussian mixtures with moderate spread"""
    groups = []
    for _ in range(k):
        components = []
        for _ in range(2):
            root = rng.normal(scale=0.2, size=(2, 2)) + np.eye(2)
            components.append(Gaussian(rng.uniform(-2, 2, size=2), root @ root.T + 0.3 * np.eye(2)))
        groups.append(Mixture(rng.dirichlet([2, 2]), components))
    return groups


class TestDiscrete:
    def test_hand_values(self):
        assert unl_exact_discrete([CategoricalProduct([[0.7, 0.3]]), CategoricalProduct([[0.4, 0.6]])]) \
            == pytest.approx(1.3, abs=1e-12)
        groups = [CategoricalProduct([[1.0, 0.0]]), CategoricalProduct([[0.0, 1.0]]),
                  CategoricalProduct([[0.5, 0.5]])]
        assert unl_exact_discrete(groups) == pytest.approx(2.0, abs=1e-12)

    def test_identical_pmfs(self):
        model = CategoricalProduct([[0.2, 0.5, 0.3], [0.6, 0.4]])
        assert unl_exact_discrete([model] * 4) == pytest.approx(1.0, abs=1e-12)

    def test_partition_sup_three_states(self):
        groups = [CategoricalProduct([[0.5, 0.3, 0.2]]), CategoricalProduct([[0.2, 0.3, 0.5]])]
        assert tv_partition_sup_discrete(groups) == pytest.approx(1.3, abs=1e-12)

    def test_partition_sup_equals_exact_value(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            states = int(rng.integers(2, 5))
            groups = [CategoricalProduct([rng.dirichlet(np.ones(states))]) for _ in range(2)]
            assert abs(tv_partition_sup_discrete(groups) - unl_exact_discrete(groups)) <= 1e-12

    def test_partition_enumeration_is_capped(self):
        groups = [CategoricalProduct([np.full(7, 1 / 7)])] * 2
        with pytest.raises(CapacityError):
            tv_partition_sup_discrete(groups)

    def test_exact_sum_is_capped(self):
        big = CategoricalProduct([np.full(10, 0.1)] * 8)
        with pytest.raises(CapacityError):
            unl_exact_discrete([big, big])


class TestQuadrature:
    def test_identical_normals(self):
        grid = QuadratureGrid.cube(-8.0, 8.0, 1e-3, 1)
        assert unl_quadrature([Gaussian(0, 1), Gaussian(0, 1)], grid) == pytest.approx(1.0, abs=1e-4)

    def test_closed_form_pair(self):
        assert unl_quadrature([Gaussian(0, 1), Gaussian(2, 1)], LINE) \
            == pytest.approx(2 * stats.norm.cdf(1), abs=1e-4)

    def test_three_separated_groups(self):
        grid = QuadratureGrid.cube(-14.0, 14.0, 1e-3, 1)
        groups = [Gaussian(-6, 1), Gaussian(0, 1), Gaussian(6, 1)]
        assert unl_quadrature(groups, grid) == pytest.approx(3.0, abs=1e-3)

    def test_coverage_is_checked(self):
        grid = QuadratureGrid.cube(-2.0, 2.0, 1e-2, 1)
        with pytest.raises(PreconditionError):
            unl_quadrature([Gaussian(0, 1), Gaussian(1, 1)], grid)

    def test_at_most_two_dimensions(self):
        groups = [Gaussian(np.zeros(3), np.eye(3))] * 2
        with pytest.raises(CapacityError):
            unl_quadrature(groups, QuadratureGrid.cube(-8, 8, 0.1, 3))

    def test_unl_is_one_plus_total_variation(self):
        first = Mixture([0.3, 0.7], [Gaussian(-1, 0.5), Gaussian(1, 1)])
        second = Gaussian(0.5, 2)
        tv = total_variation_quadrature(first, second, LINE)
        assert unl_quadrature([first, second], LINE) == pytest.approx(1.0 + tv, abs=1e-6)
        estimate = estimate_unl([first, second], 100_000, rng=4)
        assert abs(estimate.value - (1.0 + tv)) <= 4 * np.sqrt(variance_bound(2, 1.0 + tv, 100_000))


class TestProperties:
    @pytest.mark.parametrize('seed', SEEDS)
    def test_affine_invariance(self, seed):
        rng = np.random.default_rng(200 + seed)
        groups = random_line_groups(rng, 2 + seed % 3)
        scale, shift = rng.uniform(0.5, 2.0) * rng.choice([-1, 1]), rng.normal()
        moved = [affine_pushforward(g, [[scale]], [shift]) for g in groups]
        oracle = unl_quadrature(groups, WIDE_LINE)
        assert unl_quadrature(moved, WIDE_LINE) == pytest.approx(oracle, abs=1e-5)
        estimate = estimate_unl(moved, 50_000, rng=seed)
        assert abs(estimate.value - oracle) <= 5 * np.sqrt(variance_bound(len(groups), oracle, 50_000)) + 1e-5

    @pytest.mark.parametrize('seed', SEEDS)
    def test_adding_a_mixture_of_existing_groups(self, seed):
        rng = np.random.default_rng(300 + seed)
        groups = random_line_groups(rng, 2 + seed % 3)
        extra = Mixture(rng.dirichlet(np.ones(len(groups))), groups)
        oracle = unl_quadrature(groups, LINE)
        assert unl_quadrature(groups + [extra], LINE) == pytest.approx(oracle, abs=1e-5)
        k = len(groups) + 1
        estimate = estimate_unl(groups + [extra], 100_000, rng=seed)
        assert abs(estimate.value - oracle) <= 5 * np.sqrt(variance_bound(k, oracle, 100_000)) + 1e-5

    @pytest.mark.parametrize('seed', SEEDS)
    def test_estimates_agree_with_line_oracle(self, seed):
        rng = np.random.default_rng(400 + seed)
        k = 2 + seed % 3
        groups = random_line_groups(rng, k)
        oracle = unl_quadrature(groups, LINE)
        estimate = estimate_unl(groups, 100_000, rng=seed)
        assert abs(estimate.value - oracle) <= 5 * np.sqrt(variance_bound(k, oracle, 100_000)) + 1e-5

    def test_estimate_agrees_with_fine_plane_oracle(self):
        groups = random_plane_groups(np.random.default_rng(17), 2)
        oracle = unl_quadrature(groups, PLANE)
        estimate = estimate_unl(groups, 100_000, rng=17)
        assert abs(estimate.value - oracle) <= 4 * np.sqrt(variance_bound(2, oracle, 100_000))


@pytest.mark.slow
class TestPlaneProperties:
    @pytest.mark.parametrize('seed', SEEDS)
    def test_marginals_do_not_increase_underlap(self, seed):
        groups = random_plane_groups(np.random.default_rng(seed), 2 + seed % 3)
        joint = unl_quadrature(groups, COARSE_PLANE, self_check=False)
        for coordinate in (0, 1):
            marginal = unl_quadrature([marginalize(g, [coordinate]) for g in groups], LINE)
            assert joint >= marginal - COARSE_PLANE_ERROR

    @pytest.mark.parametrize('seed', SEEDS)
    def test_projection_does_not_increase_underlap(self, seed):
        rng = np.random.default_rng(100 + seed)
        groups = random_plane_groups(rng, 2 + seed % 3)
        direction = rng.normal(size=(1, 2))
        direction /= np.linalg.norm(direction)
        joint = unl_quadrature(groups, COARSE_PLANE, self_check=False)
        projected = unl_quadrature([project(g, direction) for g in groups], LINE)
        assert projected <= joint + COARSE_PLANE_ERROR

    @pytest.mark.parametrize('seed', SEEDS)
    def test_estimates_agree_with_plane_oracle(self, seed):
        rng = np.random.default_rng(500 + seed)
        k = 2 + seed % 3
        groups = random_plane_groups(rng, k)
        oracle = unl_quadrature(groups, COARSE_PLANE, self_check=False)
        estimate = estimate_unl(groups, 100_000, rng=seed)
        tolerance = 5 * np.sqrt(variance_bound(k, float(np.clip(oracle, 1, k)), 100_000)) + COARSE_PLANE_ERROR
        assert abs(estimate.value - oracle) <= tolerance
