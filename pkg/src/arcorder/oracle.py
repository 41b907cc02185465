"""
Exact maximum-forward-weight orderings for small graphs.

Two interchangeable solvers back ``exact_optimal_ranking``:

- ``enumerate``: scores all n! permutations at once against a cached
  permutation table (lexicographic order), so the first maximizer found is the
  lexicographically smallest optimum. Up to 10 nodes.
- ``dp``: subset dynamic programming. ``best[S]`` is the largest forward
  weight obtainable by the nodes of ``S`` when they occupy the last ``|S|``
  ranks, ``best[S] = max over x in S of out(x -> S \\ {x}) + best[S \\ {x}]``,
  where ``x`` is placed first among ``S``. Optimum counts follow the same
  recurrence and the smallest optimal order is rebuilt by scanning candidates
  in ascending index order. Up to 20 nodes.

Both solvers return the same forward weight, optimum count and order.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import List, Literal, Tuple

import numpy as np

from .digraph import Graph
from .logger import get_logger
from .ranking import Ranking

logger = get_logger(__name__)

ENUMERATION_MAX_NODES = 10
DP_MAX_NODES = 20


class OracleLimitError(ValueError):
    """Raised when a graph is too large for exhaustive search."""


@dataclass
class OracleResult:
    """Optimal ranking, its forward weight and the number of optimal orders."""

    ranking: Ranking
    forward_weight: int
    optimum_count: int


@lru_cache(maxsize=ENUMERATION_MAX_NODES + 1)
def permutation_table(k: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    All permutations of ``range(k)`` in lexicographic order, with their inverses.

    Returns:
        (perms, positions) where ``perms[i, j]`` is the item at slot ``j`` of the
        i-th permutation and ``positions[i, item]`` is that item's slot.
    """
    if k > ENUMERATION_MAX_NODES:
        raise OracleLimitError(
            f"permutation table limited to {ENUMERATION_MAX_NODES} items, requested {k}"
        )
    perms = np.zeros((1, 0), dtype=np.int8)
    for size in range(1, k + 1):
        blocks = []
        for first in range(size):
            rest = np.array([x for x in range(size) if x != first], dtype=np.int8)
            tail = rest[perms] if perms.shape[1] else perms
            head = np.full((tail.shape[0], 1), first, dtype=np.int8)
            blocks.append(np.hstack((head, tail)))
        perms = np.vstack(blocks)
    positions = np.argsort(perms, axis=1).astype(np.int8)
    for arr in (perms, positions):
        arr.setflags(write=False)
    return perms, positions


def _dense_weights(g: Graph) -> np.ndarray:
    n = g.node_count
    dense = np.zeros((n, n), dtype=np.int64)
    if g.edge_count:
        dense[g.sources, g.targets] = g.weights
    return dense


def enumerate_forward_weights(g: Graph) -> np.ndarray:
    """Forward weight of every permutation of ``g`` in ``permutation_table`` order."""
    return score_permutations(_dense_weights(g))


def score_permutations(dense: np.ndarray) -> np.ndarray:
    """
    Forward weight of every permutation of ``range(k)`` given a ``k x k`` weight
    matrix; the diagonal is ignored.
    """
    n = dense.shape[0]
    _, positions = permutation_table(n)
    scores = np.zeros(positions.shape[0], dtype=np.int64)
    base = 0
    for a in range(n):
        for b in range(a + 1, n):
            w_ab, w_ba = int(dense[a, b]), int(dense[b, a])
            if w_ab == 0 and w_ba == 0:
                continue
            # pair contributes w_ab when a precedes b, else w_ba
            base += w_ba
            if w_ab != w_ba:
                scores += (w_ab - w_ba) * (positions[:, a] < positions[:, b])
    return scores + base


def best_order_by_enumeration(g: Graph) -> Tuple[List[int], int, int]:
    """Return (lexicographically smallest optimal order, its FW, optimum count)."""
    perms, _ = permutation_table(g.node_count)
    scores = enumerate_forward_weights(g)
    best = int(scores.max())
    index = int(np.argmax(scores))
    return perms[index].astype(np.int64).tolist(), best, int((scores == best).sum())


def _subset_gain(dense: np.ndarray, x: int, subsets: np.ndarray) -> np.ndarray:
    """Weight from ``x`` into each subset (bitmask array)."""
    gain = np.zeros(subsets.size, dtype=np.int64)
    for y in np.nonzero(dense[x])[0].tolist():
        gain += int(dense[x, y]) * ((subsets >> y) & 1)
    return gain


def best_order_by_subset_dp(g: Graph) -> Tuple[List[int], int, int]:
    """Return (lexicographically smallest optimal order, its FW, optimum count)."""
    n = g.node_count
    dense = _dense_weights(g)
    full = (1 << n) - 1
    subsets = np.arange(full + 1, dtype=np.int64)
    popcount = np.zeros(full + 1, dtype=np.int64)
    for bit in range(n):
        popcount += (subsets >> bit) & 1

    best = np.full(full + 1, -1, dtype=np.int64)
    counts = np.zeros(full + 1, dtype=np.int64)
    best[0], counts[0] = 0, 1

    for size in range(1, n + 1):
        layer = subsets[popcount == size]
        candidates = []
        for x in range(n):
            holds = ((layer >> x) & 1).astype(bool)
            members = layer[holds]
            rest = members ^ (1 << x)
            value = _subset_gain(dense, x, rest) + best[rest]
            candidates.append((members, rest, value))
            np.maximum.at(best, members, value)
        for members, rest, value in candidates:
            hit = value == best[members]
            np.add.at(counts, members[hit], counts[rest[hit]])

    order: List[int] = []
    remaining = full
    while remaining:
        for x in range(n):
            bit = 1 << x
            if not remaining & bit:
                continue
            rest = remaining ^ bit
            gain = sum(int(dense[x, y]) for y in range(n) if rest >> y & 1)
            if gain + int(best[rest]) == int(best[remaining]):
                order.append(x)
                remaining = rest
                break
    return order, int(best[full]), int(counts[full])


def exact_optimal_ranking(
    g: Graph,
    node_limit: int = 10,
    mode: Literal["enumerate", "dp"] = "enumerate",
) -> OracleResult:
    """
    Exhaustively find a maximum forward-weight ranking of ``g``.

    Raises:
        OracleLimitError: when ``g`` exceeds ``node_limit`` or the mode's cap
    """
    n = g.node_count
    cap = ENUMERATION_MAX_NODES if mode == "enumerate" else DP_MAX_NODES
    if n > node_limit or n > cap:
        raise OracleLimitError(
            f"graph has {n} nodes; oracle limit is {min(node_limit, cap)} in {mode} mode"
        )
    if mode == "enumerate":
        order, fw, count = best_order_by_enumeration(g)
    elif mode == "dp":
        order, fw, count = best_order_by_subset_dp(g)
    else:
        raise ValueError(f"Unsupported oracle mode: {mode}")
    logger.debug("Oracle (%s) on %d nodes: FW=%d, %d optima", mode, n, fw, count)
    return OracleResult(ranking=Ranking(order), forward_weight=fw, optimum_count=count)
