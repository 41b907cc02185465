import csv
import io
import json

import pytest

from src.arcorder.digraph import Graph
from src.arcorder.metrics import (
    back_edge_distribution,
    back_edge_report,
    compare_rankings,
    forward_ratio,
    forward_weight,
    max_back_length,
    write_distribution_csv,
)
from src.arcorder.ranking import (
    Ranking,
    RankingValidationError,
    parse_ranking_lines,
    read_ranking,
    validate_ranking,
    write_ranking,
    write_ranking_stream,
)


def _ranking(g, ids):
    return validate_ranking(g, list(ids))


class TestRanking:
    def test_order_and_position_stay_inverse(self):
        r = Ranking([2, 0, 1])
        assert r.position.tolist() == [1, 2, 0]
        assert r.rank_of(2) == 0
        assert r.node_at(2) == 1
        r.assign(1, [1, 0])
        assert r.order.tolist() == [2, 1, 0]
        assert r.position.tolist() == [2, 1, 0]

    def test_assign_ranks_arbitrary_set(self):
        r = Ranking.identity(5)
        r.assign_ranks([0, 4], [4, 0])
        assert r.order.tolist() == [4, 1, 2, 3, 0]
        assert r.rank_of(4) == 0

    def test_from_position(self):
        r = Ranking.from_position([1, 2, 0])
        assert r.order.tolist() == [2, 0, 1]

    def test_rejects_non_permutation(self):
        with pytest.raises(ValueError):
            Ranking([0, 0, 1])
        with pytest.raises(ValueError):
            Ranking([0, 3, 1])

    def test_copy_is_independent(self):
        r = Ranking.identity(3)
        clone = r.copy()
        clone.assign(0, [2, 1, 0])
        assert r.order.tolist() == [0, 1, 2]

    def test_nodes_between(self):
        r = Ranking([3, 1, 0, 2])
        assert r.nodes_between(0, 3) == [1, 0]


class TestValidation:
    def test_valid_ranking(self, g3):
        r = _ranking(g3, "cab")
        assert r.rank_of(g3.index_of["c"]) == 0

    def test_missing_node(self, g3):
        with pytest.raises(RankingValidationError) as excinfo:
            validate_ranking(g3, ["c", "a"])
        assert excinfo.value.missing == ["b"]

    def test_duplicate_and_missing(self, g3):
        with pytest.raises(RankingValidationError) as excinfo:
            validate_ranking(g3, ["c", "a", "a"])
        assert excinfo.value.duplicates == ["a"]
        assert excinfo.value.missing == ["b"]

    def test_unknown_node(self, g3):
        with pytest.raises(RankingValidationError) as excinfo:
            validate_ranking(g3, ["c", "a", "b", "z"])
        assert excinfo.value.unknown == ["z"]

    def test_parse_plain_lines(self):
        assert parse_ranking_lines(["c\n", "a\n", "\n", "b"]) == ["c", "a", "b"]

    def test_parse_keyed_csv_with_header(self):
        lines = ["node_id,rank", "b,2", "c,0", "a,1"]
        assert parse_ranking_lines(lines) == ["c", "a", "b"]

    def test_parse_keyed_csv_repeated_rank(self):
        with pytest.raises(RankingValidationError, match="repeated"):
            parse_ranking_lines(["a,0", "b,0"])

    def test_file_round_trip(self, g3, tmp_path):
        r = _ranking(g3, "cab")
        path = write_ranking(tmp_path / "out" / "ranking.txt", g3, r)
        assert path.read_text(encoding="utf-8") == "c\na\nb\n"
        assert read_ranking(path, g3) == r
        # no temp files remain next to the target
        assert [p.name for p in path.parent.iterdir()] == ["ranking.txt"]

    def test_write_stream(self, g3):
        buffer = io.StringIO()
        write_ranking_stream(g3, _ranking(g3, "bca"), buffer)
        assert buffer.getvalue().splitlines() == ["b", "c", "a"]


class TestForwardWeight:
    def test_g3_orders(self, g3):
        assert forward_weight(g3, _ranking(g3, "abc")) == 8
        assert forward_weight(g3, _ranking(g3, "cab")) == 15
        assert forward_ratio(g3, _ranking(g3, "cab")) == pytest.approx(15 / 18)

    def test_size_mismatch(self, g3):
        with pytest.raises(ValueError, match="size mismatch"):
            forward_weight(g3, Ranking.identity(2))

    def test_reverse_complements_total(self, rng, graph_factory):
        for _ in range(200):
            g = graph_factory(rng, int(rng.integers(2, 15)), float(rng.uniform(0.1, 0.8)))
            r = Ranking(rng.permutation(g.node_count))
            assert forward_weight(g, r) + forward_weight(g, r.reversed()) == g.total_weight


class TestBackEdgeReport:
    def test_single_backward_edge(self, g3):
        report = back_edge_report(g3, _ranking(g3, "abc"))
        assert report.backward_edge_count == 1
        assert report.backward_weight == 10
        assert report.forward_weight == 8
        assert report.back_length_min == report.back_length_max == 2
        assert report.back_length_mean == 2.0
        assert report.back_length_std == 0.0

    def test_optimal_order(self, g3):
        report = back_edge_report(g3, _ranking(g3, "cab"))
        assert report.forward_weight == 15
        assert round(report.forward_ratio, 6) == 0.833333
        payload = report.to_dict()
        assert payload["forward_weight"] == "15"
        assert payload["forward_weight_fixed_point"] == 15
        json.dumps(payload)

    def test_format_lines(self, g3):
        lines = back_edge_report(g3, _ranking(g3, "abc")).format_lines()
        assert lines[0] == "forward weight: 8"
        assert "forward ratio: 0.444444 (0.4444)" in lines


class TestDistribution:
    def test_single_edge_histogram(self, g3):
        series = back_edge_distribution(g3, _ranking(g3, "abc"), 2)
        assert series.bins == [(1.0, 0), (1.5, 1)]
        assert series.cumulative == [(2, 1)]
        assert series.total == 1

    def test_g4_histogram(self, g4):
        series = back_edge_distribution(g4, Ranking.identity(3), 4)
        assert sum(count for _, count in series.bins) == 1
        assert series.cumulative == [(2, 1)]

    def test_shared_upper_bound_gives_identical_bins(self, g3):
        first, second = _ranking(g3, "abc"), _ranking(g3, "cab")
        upper = max(max_back_length(g3, first), max_back_length(g3, second))
        a = back_edge_distribution(g3, first, 4, upper=upper)
        b = back_edge_distribution(g3, second, 4, upper=upper)
        assert [lo for lo, _ in a.bins] == [lo for lo, _ in b.bins]

    def test_no_backward_edges_gives_empty_series(self, g4):
        dag = Graph.from_edge_arrays(g4.ids, [0, 1], [1, 2], [1, 1], precision=0)
        series = back_edge_distribution(dag, Ranking.identity(3), 3)
        assert series.bins == []
        assert series.total == 0

    @pytest.mark.parametrize("bins", [1, 4])
    def test_unit_lengths_stay_at_one(self, bins):
        g = Graph.from_edge_arrays(["a", "b", "c"], [0, 1], [1, 2], [1, 1], precision=0)
        series = back_edge_distribution(g, Ranking([2, 1, 0]), bins)
        assert series.bins == [(1.0, 2)]
        assert series.cumulative == [(1, 2)]

    def test_rejects_zero_bins(self, g3):
        with pytest.raises(ValueError):
            back_edge_distribution(g3, Ranking.identity(3), 0)

    def test_write_csv(self, g3, tmp_path):
        series = back_edge_distribution(g3, _ranking(g3, "abc"), 2)
        hist, cum = tmp_path / "h.csv", tmp_path / "c.csv"
        write_distribution_csv(series, hist, cum)
        with hist.open(encoding="utf-8") as fp:
            rows = list(csv.reader(fp))
        assert rows == [["bin_lower", "count"], ["1.0", "0"], ["1.5", "1"]]
        with cum.open(encoding="utf-8") as fp:
            assert list(csv.reader(fp)) == [["length", "cumulative_count"], ["2", "1"]]


def test_compare_rankings(g3):
    comparison = compare_rankings(g3, _ranking(g3, "abc"), _ranking(g3, "cab"))
    assert comparison.forward_weight_difference == 7
    assert comparison.difference_share == pytest.approx(7 / 18)
    payload = comparison.to_dict()
    assert payload["forward_weight_difference"] == "7"
    reverse = compare_rankings(g3, _ranking(g3, "cab"), _ranking(g3, "abc"))
    assert reverse.to_dict()["forward_weight_difference"] == "-7"
