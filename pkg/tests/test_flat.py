import numpy as np
import pytest
from pydantic import ValidationError

from src.arcorder.digraph import build_graph
from src.arcorder.flat import (
    PartitionConfig,
    best_window_permutation,
    default_partition_config,
    flat_partition_reorder,
    group_weight_matrix,
    partition_interval,
    resolve_partition_config,
)
from src.arcorder.metrics import forward_weight
from src.arcorder.ranking import Ranking
from src.arcorder.scc import condensation_order


@pytest.fixture
def two_groups():
    """P1={a,b}, P2={c,d}: c->a:5, d->b:5, a->b:1, c->d:1."""
    return build_graph(
        [("c", "a", 5), ("d", "b", 5), ("a", "b", 1), ("c", "d", 1)],
        nodes=("a", "b", "c", "d"),
    )


def _sizes(groups):
    return [int(group.size) for group in groups]


class TestPartition:
    def test_even_split(self):
        groups = partition_interval(Ranking.identity(4), PartitionConfig(arity=2, level=1))
        assert [g.tolist() for g in groups] == [[0, 1], [2, 3]]

    def test_balancing_puts_extra_nodes_first(self):
        assert _sizes(partition_interval(Ranking.identity(5), PartitionConfig(arity=2))) == [3, 2]
        assert _sizes(
            partition_interval(Ranking.identity(8), PartitionConfig(arity=2, level=2))
        ) == [2, 2, 2, 2]

    def test_groups_follow_rank_order(self):
        r = Ranking([3, 1, 0, 2])
        groups = partition_interval(r, PartitionConfig(arity=2, start=1, end=3))
        assert [g.tolist() for g in groups] == [[1, 0], [2]]

    def test_more_groups_than_nodes(self):
        groups = partition_interval(Ranking.identity(3), PartitionConfig(arity=4))
        assert _sizes(groups) == [1, 1, 1, 0]

    def test_invalid_interval(self):
        with pytest.raises(ValueError):
            partition_interval(Ranking.identity(3), PartitionConfig(arity=2, start=1, end=5))
        with pytest.raises(ValidationError):
            PartitionConfig(arity=2, start=3, end=1)
        with pytest.raises(ValidationError):
            PartitionConfig(arity=9)

    def test_default_config_targets_group_size(self):
        cfg = default_partition_config(1000, arity=4)
        assert cfg.level == 2
        assert (cfg.start, cfg.end) == (0, 999)
        assert default_partition_config(10).level == 1

    def test_resolve_keeps_explicit_values(self):
        cfg = resolve_partition_config(100, 2, level=3, start=10)
        assert (cfg.arity, cfg.level, cfg.start, cfg.end) == (2, 3, 10, 99)


class TestWindowPermutation:
    def test_two_group_swap(self, two_groups):
        window = [np.array([0, 1]), np.array([2, 3])]
        matrix = group_weight_matrix(two_groups, window)
        assert matrix.tolist() == [[0, 0], [10, 0]]
        choice = best_window_permutation(two_groups, window)
        assert choice.permutation == (1, 0)
        assert choice.gain == 10

    def test_no_inter_group_edges_keeps_identity(self, two_groups):
        # b and c share no edge
        choice = best_window_permutation(two_groups, [np.array([1]), np.array([2])])
        assert choice.is_identity
        assert choice.gain == 0

    def test_three_groups_lexicographic_tie(self):
        g = build_graph(
            [("p2", "p1", 4), ("p3", "p1", 4), ("p1", "p2", 1)], nodes=("p1", "p2", "p3")
        )
        window = [np.array([0]), np.array([1]), np.array([2])]
        choice = best_window_permutation(g, window)
        assert choice.permutation == (1, 2, 0)
        assert choice.gain == 7


class TestFlatReorder:
    def test_two_group_example(self, two_groups):
        r = Ranking.identity(4)
        cfg = PartitionConfig(arity=2, level=1, start=0, end=3)
        result, report = flat_partition_reorder(two_groups, r, cfg)
        assert result.external_ids(two_groups) == ["c", "d", "a", "b"]
        assert report.forward_weight_before == 2
        assert report.forward_weight_after == 12
        assert report.windows_applied == 1
        assert report.gain == 10
        assert r.order.tolist() == [0, 1, 2, 3]

    def test_topological_dag_unchanged(self, rng, dag_factory):
        g = dag_factory(rng, 30, 0.2)
        r = Ranking(condensation_order(g, np.arange(30)))
        for arity, level in ((2, 1), (2, 3), (4, 1), (3, 2)):
            result, report = flat_partition_reorder(g, r, PartitionConfig(arity=arity, level=level))
            assert result == r
            assert report.windows_applied == 0

    def test_empty_groups_are_skipped(self, two_groups):
        cfg = PartitionConfig(arity=8, level=1)
        result, report = flat_partition_reorder(two_groups, Ranking.identity(4), cfg)
        assert report.groups == 4
        assert report.windows == 1
        assert forward_weight(two_groups, result) == 12

    def test_arity_two_swaps_only_when_reverse_weight_wins(self, rng, graph_factory):
        for _ in range(50):
            g = graph_factory(rng, 8, 0.4)
            r = Ranking(rng.permutation(8))
            groups = partition_interval(r, PartitionConfig(arity=2))
            matrix = group_weight_matrix(g, groups)
            result, _ = flat_partition_reorder(g, r, PartitionConfig(arity=2))
            swapped = result != r
            assert swapped == bool(matrix[1, 0] > matrix[0, 1])

    def test_gain_is_exact_and_outside_ranks_untouched(self, rng, graph_factory):
        for _ in range(60):
            n = int(rng.integers(4, 60))
            g = graph_factory(rng, n, float(rng.uniform(0.05, 0.4)))
            r = Ranking(rng.permutation(n))
            start = int(rng.integers(0, n - 1))
            end = int(rng.integers(start, n))
            cfg = PartitionConfig(arity=int(rng.integers(2, 5)), level=1, start=start, end=end)
            result, report = flat_partition_reorder(g, r, cfg)
            assert report.forward_weight_after - report.forward_weight_before == report.gain
            assert forward_weight(g, result) == report.forward_weight_after
            assert np.array_equal(result.order[:start], r.order[:start])
            assert np.array_equal(result.order[end + 1 :], r.order[end + 1 :])
