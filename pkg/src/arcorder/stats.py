"""
Descriptive statistics of a weighted directed graph.

Degrees count both directions (in + out) over stored edges, so parallel input
rows merged at load count once. Weight figures are reported in weight units
and the standard deviation is a population deviation.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Any, Dict, List

import numpy as np
from scipy.sparse.csgraph import connected_components

from .digraph import Graph
from .logger import get_logger
from .scc import compute_sccs

logger = get_logger(__name__)


@dataclass
class GraphStats:
    node_count: int = 0
    edge_count: int = 0
    avg_degree: float = 0.0
    max_degree: int = 0
    median_degree: float = 0.0
    density: float = 0.0
    wcc_count: int = 0
    scc_count: int = 0
    avg_scc_size: float = 0.0
    largest_scc_size: int = 0
    singleton_scc_count: int = 0
    weight_min: float = 0.0
    weight_max: float = 0.0
    weight_mean: float = 0.0
    weight_std: float = 0.0
    total_weight: float = 0.0
    dropped_self_loop_weight: float = 0.0

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    def format_lines(self) -> List[str]:
        return [
            f"nodes: {self.node_count}",
            f"edges: {self.edge_count}",
            f"average degree: {self.avg_degree:.2f}",
            f"max degree: {self.max_degree}",
            f"median degree: {self.median_degree:g}",
            f"density: {self.density:.6g}",
            f"weakly connected components: {self.wcc_count}",
            f"strongly connected components: {self.scc_count}",
            f"average SCC size: {self.avg_scc_size:.2f}",
            f"largest SCC: {self.largest_scc_size}",
            f"singleton SCCs: {self.singleton_scc_count}",
            f"weight min/max: {self.weight_min:g} / {self.weight_max:g}",
            f"weight mean/std: {self.weight_mean:.2f} / {self.weight_std:.2f}",
            f"total weight: {self.total_weight:g}",
            f"dropped self-loop weight: {self.dropped_self_loop_weight:g}",
        ]


def compute_stats(g: Graph) -> GraphStats:
    """Populate every ``GraphStats`` field for ``g``."""
    n, m = g.node_count, g.edge_count
    stats = GraphStats(
        node_count=n,
        edge_count=m,
        dropped_self_loop_weight=g.dropped_self_loop_weight / g.scale,
    )
    if n == 0:
        return stats

    degrees = np.bincount(g.sources, minlength=n) + np.bincount(g.targets, minlength=n)
    stats.avg_degree = float(degrees.sum()) / n
    stats.max_degree = int(degrees.max())
    stats.median_degree = float(np.median(degrees))
    stats.density = m / (n * (n - 1)) if n >= 2 else 0.0

    stats.wcc_count, _ = connected_components(
        g.structure_matrix(), directed=True, connection="weak"
    )
    stats.wcc_count = int(stats.wcc_count)
    sizes = compute_sccs(g).sizes()
    stats.scc_count = int(sizes.size)
    stats.avg_scc_size = float(sizes.mean())
    stats.largest_scc_size = int(sizes.max())
    stats.singleton_scc_count = int((sizes == 1).sum())

    if m:
        weights = g.weights / g.scale
        stats.weight_min = float(weights.min())
        stats.weight_max = float(weights.max())
        stats.weight_mean = float(weights.mean())
        stats.weight_std = float(weights.std())
        stats.total_weight = g.total_weight / g.scale

    logger.info(
        "Graph stats: %d nodes, %d edges, %d WCCs, %d SCCs (largest %d)",
        n,
        m,
        stats.wcc_count,
        stats.scc_count,
        stats.largest_scc_size,
    )
    return stats
