import numpy as np
import pytest

from core.exceptions import ArgumentError
from core.services.simulation_service import SimulationService, simulate


class TestSimulationService:
    def test_example_a_bands(self):
        data = simulate('A', 600, seed=1)
        y, x = data.continuous_block(['y'])[:, 0], data.continuous_block(['x'])[:, 0]
        assert data.names == ['y', 'x']
        assert x.min() > -3 and x.max() < 3
        for mask, level in ((x <= -1, 2.0), ((x > -1) & (x < 1), 0.0), (x >= 1, -5.0)):
            assert np.abs(y[mask] - level).max() < 0.6
            assert np.std(y[mask]) == pytest.approx(0.1, rel=0.2)

    def test_example_b_sign(self):
        data = simulate('B', 600, seed=2)
        y, x1, x2 = (data.continuous_block([name])[:, 0] for name in ('y', 'x1', 'x2'))
        expected = np.where(np.sin(x1 * x2 * np.pi / 2) <= 0, 1.0, -1.0)
        assert np.abs(y - expected).max() < 0.6

    @pytest.mark.parametrize('example', ['C1', 'C2'])
    def test_example_c_columns(self, example):
        data = simulate(example, 200, seed=3)
        assert data.schema() == {'y': 'continuous', 'xc': 'continuous', 'xd': 'categorical'}
        assert data.column('xd').categories == ('1', '2')
        y, xd = data.continuous_block(['y'])[:, 0], data.categorical_block()[:, 0]
        assert abs(np.mean(y[xd == 1]) - 80.0) < 8.0

    def test_example_d_correlations(self):
        data = simulate('D', 1000, seed=4)
        assert data.names == ['y'] + [f'x{j}' for j in range(1, 21)]
        x = data.continuous_block([f'x{j}' for j in range(1, 21)])
        corr = np.corrcoef(x, rowvar=False)
        assert corr[0, 2] == pytest.approx(0.75, abs=0.05)
        assert corr[0, 1] == pytest.approx(0.0, abs=0.1)
        assert x.mean(axis=0) == pytest.approx(np.full(20, 4.0), abs=0.25)

    def test_example_d_gate(self):
        gate = SimulationService.example_d_gate([4.0, 5.0, 6.0, 100.0])
        assert gate[0] > 0.9 and gate[2] < 0.1
        assert gate[1] == pytest.approx(0.5)
        assert gate[3] == 0.5

    def test_seeded(self):
        first = simulate('B', 50, seed=9).frame
        second = simulate('B', 50, seed=9).frame
        assert first.equals(second)
        assert not first.equals(simulate('B', 50, seed=10).frame)

    def test_desk_scale_halves_sizes(self):
        assert SimulationService.default_size('d', desk_scale=True) == 500
        assert SimulationService.default_size('A') == 600

    def test_unknown_example(self):
        with pytest.raises(ArgumentError):
            simulate('E', 100)

    def test_too_few_rows(self):
        with pytest.raises(ArgumentError):
            simulate('A', 9)
