"""
Objective evaluation and back-edge statistics for rankings.

This module scores a ranking against a graph:
1. Forward weight (the maximization objective) and the forward ratio
2. Back-edge count, weight and length statistics for reporting
3. Back-edge length histogram and cumulative series as plot-ready rows

Back-edge length is the rank distance ``pos[u] - pos[v]`` of a backward edge
``u -> v``. Standard deviations are population deviations (divide by N). All
comparisons elsewhere in the package use the exact integer forward weight;
ratios are for display only.
"""

from __future__ import annotations

import csv
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from .digraph import Graph, format_weight
from .logger import get_logger
from .ranking import Ranking, check_ranking

logger = get_logger(__name__)


def forward_weight(g: Graph, r: Ranking) -> int:
    """Exact total weight of edges ``u -> v`` with ``pos[u] < pos[v]``."""
    check_ranking(g, r)
    if g.edge_count == 0:
        return 0
    position = r.position
    forward = position[g.sources] < position[g.targets]
    return int(g.weights[forward].sum())


def forward_ratio(g: Graph, r: Ranking) -> float:
    """Forward weight over total weight; 1.0 for an edgeless or weightless graph."""
    fw = forward_weight(g, r)
    total = g.total_weight
    if total == 0:
        return 1.0
    return fw / total


def edge_forward_weight(g: Graph, position: np.ndarray, edge_ids: np.ndarray) -> int:
    """Forward weight restricted to the given edge ids under ``position``."""
    if edge_ids.size == 0:
        return 0
    src, tgt = g.sources[edge_ids], g.targets[edge_ids]
    forward = position[src] < position[tgt]
    return int(g.weights[edge_ids][forward].sum())


def _backward_edges(g: Graph, r: Ranking) -> Tuple[np.ndarray, np.ndarray]:
    """Return (lengths, weights) of all backward edges."""
    check_ranking(g, r)
    if g.edge_count == 0:
        empty = np.empty(0, dtype=np.int64)
        return empty, empty
    position = r.position
    src_rank, tgt_rank = position[g.sources], position[g.targets]
    backward = src_rank > tgt_rank
    return (src_rank - tgt_rank)[backward], g.weights[backward]


@dataclass
class MetricsReport:
    """Forward weight and back-edge statistics of one ranking."""

    forward_weight: int
    backward_weight: int
    total_weight: int
    forward_ratio: float
    backward_edge_count: int
    back_length_min: Optional[int] = None
    back_length_max: Optional[int] = None
    back_length_mean: Optional[float] = None
    back_length_std: Optional[float] = None
    back_weight_mean: Optional[float] = None
    back_weight_std: Optional[float] = None
    precision: int = 2

    def to_dict(self) -> Dict[str, Any]:
        """JSON-ready payload; weights rendered in weight units as strings."""
        payload = asdict(self)
        for key in ("forward_weight", "backward_weight", "total_weight"):
            payload[key] = format_weight(payload[key], self.precision)
        payload["forward_weight_fixed_point"] = self.forward_weight
        return payload

    def format_lines(self) -> List[str]:
        """Human-readable lines for the ``score`` command."""

        def _num(value: Optional[float]) -> str:
            return "n/a" if value is None else f"{value:.2f}"

        precision = self.precision
        return [
            f"forward weight: {format_weight(self.forward_weight, precision)}",
            f"total weight: {format_weight(self.total_weight, precision)}",
            f"forward ratio: {self.forward_ratio:.6f} ({self.forward_ratio:.4f})",
            f"backward edges: {self.backward_edge_count}",
            f"backward weight: {format_weight(self.backward_weight, precision)}",
            "back edge length: "
            f"min={self.back_length_min if self.back_length_min is not None else 'n/a'} "
            f"max={self.back_length_max if self.back_length_max is not None else 'n/a'} "
            f"mean={_num(self.back_length_mean)} std={_num(self.back_length_std)}",
            "back edge weight: "
            f"mean={_num(self.back_weight_mean)} std={_num(self.back_weight_std)}",
        ]


def back_edge_report(g: Graph, r: Ranking) -> MetricsReport:
    """Compute the full ``MetricsReport`` for ``r``."""
    lengths, weights = _backward_edges(g, r)
    backward = int(weights.sum())
    total = g.total_weight
    report = MetricsReport(
        forward_weight=total - backward,
        backward_weight=backward,
        total_weight=total,
        forward_ratio=(total - backward) / total if total else 1.0,
        backward_edge_count=int(lengths.size),
        precision=g.precision,
    )
    if lengths.size:
        unit_weights = weights / g.scale
        report.back_length_min = int(lengths.min())
        report.back_length_max = int(lengths.max())
        report.back_length_mean = float(lengths.mean())
        report.back_length_std = float(lengths.std())
        report.back_weight_mean = float(unit_weights.mean())
        report.back_weight_std = float(unit_weights.std())
    return report


@dataclass
class DistributionSeries:
    """Plot-ready back-edge length distribution of one ranking."""

    bins: List[Tuple[float, int]] = field(default_factory=list)
    cumulative: List[Tuple[int, int]] = field(default_factory=list)

    @property
    def total(self) -> int:
        return self.cumulative[-1][1] if self.cumulative else 0


def max_back_length(g: Graph, r: Ranking) -> int:
    lengths, _ = _backward_edges(g, r)
    return int(lengths.max()) if lengths.size else 0


def back_edge_distribution(
    g: Graph,
    r: Ranking,
    bin_count: int,
    *,
    upper: Optional[int] = None,
) -> DistributionSeries:
    """
    Histogram of back-edge lengths over equal-width bins on ``[1, upper]`` plus
    the cumulative count per distinct length.

    Args:
        upper: Shared upper bound when several rankings must use identical bins;
            defaults to this ranking's maximum back-edge length.
    """
    if bin_count < 1:
        raise ValueError("bin_count must be at least 1")
    lengths, _ = _backward_edges(g, r)
    if lengths.size == 0:
        return DistributionSeries()

    upper = max(int(lengths.max()), upper or 0)
    if upper == 1:
        # bins stay within [1, upper]
        bins = [(1.0, int(lengths.size))]
    else:
        counts, edges = np.histogram(lengths, bins=bin_count, range=(1, upper))
        bins = [(float(lo), int(c)) for lo, c in zip(edges[:-1], counts)]
    distinct, per_length = np.unique(lengths, return_counts=True)
    cumulative = np.cumsum(per_length)
    return DistributionSeries(
        bins=bins,
        cumulative=[(int(length), int(c)) for length, c in zip(distinct, cumulative)],
    )


def write_distribution_csv(
    series: DistributionSeries, histogram_path: Path, cumulative_path: Path
) -> None:
    """Write ``bin_lower,count`` and ``length,cumulative_count`` CSV files."""
    for path in (histogram_path, cumulative_path):
        path.parent.mkdir(parents=True, exist_ok=True)
    with histogram_path.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["bin_lower", "count"])
        writer.writerows(series.bins)
    with cumulative_path.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["length", "cumulative_count"])
        writer.writerows(series.cumulative)


@dataclass
class RankingComparison:
    """Side-by-side metrics of two rankings over the same graph."""

    first: MetricsReport
    second: MetricsReport

    @property
    def forward_weight_difference(self) -> int:
        """Second minus first, in fixed-point units."""
        return self.second.forward_weight - self.first.forward_weight

    @property
    def difference_share(self) -> float:
        """Difference as a fraction of total weight."""
        total = self.first.total_weight
        return self.forward_weight_difference / total if total else 0.0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "first": self.first.to_dict(),
            "second": self.second.to_dict(),
            "forward_weight_difference": format_weight(
                self.forward_weight_difference, self.first.precision
            )
            if self.forward_weight_difference >= 0
            else "-"
            + format_weight(-self.forward_weight_difference, self.first.precision),
            "difference_share": self.difference_share,
        }


def compare_rankings(g: Graph, first: Ranking, second: Ranking) -> RankingComparison:
    """Report both rankings and how much forward weight the second gains."""
    comparison = RankingComparison(
        first=back_edge_report(g, first), second=back_edge_report(g, second)
    )
    logger.info(
        "Compared rankings: difference %d fixed-point units (%.4f%% of total)",
        comparison.forward_weight_difference,
        comparison.difference_share * 100,
    )
    return comparison
