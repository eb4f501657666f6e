import numpy as np
import pytest
import hypothesis
from hypothesis import given, strategies as st

from core.exceptions import ArgumentError, CapacityError, ShapeError
from partitions.similarity import (
    Partition,
    canonicalize,
    partition_labels,
    representative_partition,
    set_partitions,
    similarity_matrix,
    vi_lower_bound,
)

BELL = [1, 1, 2, 5, 15, 52]

allocation_draws = st.integers(min_value=2, max_value=7).flatmap(
    lambda n: st.lists(st.lists(st.integers(min_value=0, max_value=3), min_size=n, max_size=n),
                       min_size=1, max_size=6)
)


def permuted(allocations, permutation):
    return np.asarray(permutation)[np.asarray(allocations)]


class TestCanonicalize:
    def test_first_appearance_order(self):
        np.testing.assert_array_equal(canonicalize([7, 7, 2, 9, 2]), [1, 1, 2, 3, 2])

    def test_partition_sizes(self):
        partition = Partition([3, 3, 1, 3])
        assert partition.k == 2
        np.testing.assert_array_equal(partition.sizes(), [3, 1])
        np.testing.assert_array_equal(partition.members(2), [2])

    def test_csv(self, tmp_path):
        partition = Partition([4, 2, 2, 4, 0])
        partition.to_csv(tmp_path / 'partition.csv')
        assert Partition.from_csv(tmp_path / 'partition.csv') == partition


class TestSimilarityMatrix:
    def test_hand_count(self):
        psm = similarity_matrix(np.array([[0, 0, 1], [0, 1, 1]])).values
        assert psm[0, 1] == psm[1, 2] == 0.5
        assert psm[0, 2] == 0.0
        np.testing.assert_array_equal(np.diag(psm), 1.0)

    def test_single_iteration_is_indicator(self):
        psm = similarity_matrix(np.array([2, 2, 0, 2])).values
        expected = np.array([[1, 1, 0, 1], [1, 1, 0, 1], [0, 0, 1, 0], [1, 1, 0, 1]], dtype=float)
        np.testing.assert_array_equal(psm, expected)

    def test_needs_a_draw(self):
        with pytest.raises(ArgumentError):
            similarity_matrix(np.zeros((0, 4), dtype=int))

    def test_export_is_capped(self, tmp_path, settings):
        settings.UNDERLAP_MAX_PSM_EXPORT = 3
        with pytest.raises(CapacityError):
            similarity_matrix(np.zeros(4, dtype=int)).to_csv(tmp_path / 'psm.csv')

    @given(allocation_draws, st.permutations([0, 1, 2, 3]))
    def test_label_invariance(self, allocations, permutation):
        before = similarity_matrix(np.array(allocations)).values
        after = similarity_matrix(permuted(allocations, permutation)).values
        np.testing.assert_array_equal(before, after)
        np.testing.assert_allclose(before, before.T, atol=1e-12)


class TestViLowerBound:
    def test_two_point_hand_values(self):
        psm = np.array([[1.0, 0.5], [0.5, 1.0]])
        assert vi_lower_bound(Partition([1, 2]), psm) == pytest.approx(np.log2(1.5), abs=1e-9)
        assert vi_lower_bound(Partition([1, 1]), psm) == pytest.approx(1 - np.log2(1.5), abs=1e-9)

    def test_length_mismatch(self):
        with pytest.raises(ShapeError):
            vi_lower_bound(Partition([1, 1, 2]), np.eye(2))

    @given(st.lists(st.integers(min_value=0, max_value=4), min_size=1, max_size=8), st.permutations(range(5)))
    def test_relabeling_candidate(self, labels, permutation):
        psm = similarity_matrix(np.array([labels, [0] * len(labels)]))
        relabeled = np.asarray(permutation)[np.asarray(labels)]
        assert vi_lower_bound(labels, psm) == pytest.approx(vi_lower_bound(relabeled, psm), abs=1e-12)

    @pytest.mark.parametrize('n', range(1, 6))
    def test_enumeration_against_single_partition(self, n):
        everything = [partition_labels(blocks, n) for blocks in set_partitions(n)]
        assert len(everything) == BELL[n]
        for truth in everything:
            psm = similarity_matrix(truth)
            for candidate in everything:
                bound = vi_lower_bound(candidate, psm)
                if np.array_equal(candidate, truth):
                    assert bound == pytest.approx(0.0, abs=1e-9)
                else:
                    assert bound > 1e-9

    def test_enumeration_matches_direct_formula(self):
        rng = np.random.default_rng(0)
        n = 5
        everything = [partition_labels(blocks, n) for blocks in set_partitions(n)]
        draws = np.array([everything[i] for i in rng.integers(len(everything), size=12)])
        psm = similarity_matrix(draws).values
        for candidate in everything:
            total = 0.0
            for i in range(n):
                same = candidate == candidate[i]
                total += np.log2(same.sum()) + np.log2(psm[i].sum()) - 2 * np.log2(psm[i, same].sum())
            assert vi_lower_bound(candidate, psm) == pytest.approx(total / n, abs=1e-9)


class TestRepresentativePartition:
    def test_identical_draws(self):
        draws = np.tile([2, 2, 5, 5, 5], (4, 1))
        assert representative_partition(draws) == Partition([1, 1, 2, 2, 2])

    def test_majority_partition_wins(self):
        p = [0, 0, 1, 1, 1]
        q = [0, 1, 1, 0, 1]
        draws = np.array([p] * 9 + [q])
        assert representative_partition(draws) == Partition(p)

    def test_ties_go_to_earliest_iteration(self):
        first, second = [0, 0, 1, 1], [0, 1, 0, 1]
        assert representative_partition(np.array([first, second])) == Partition(first)
        assert representative_partition(np.array([second, first])) == Partition(second)

    @hypothesis.settings(deadline=None, max_examples=50)
    @given(allocation_draws, st.permutations([0, 1, 2, 3]))
    def test_label_invariance(self, allocations, permutation):
        before = representative_partition(np.array(allocations))
        after = representative_partition(permuted(allocations, permutation))
        assert before == after
