"""
Flat partition-based block reordering.

A rank interval ``[start, end]`` is split into ``arity ** level`` groups of
nearly equal size (the first ``count % groups`` groups take one extra node).
Consecutive, non-overlapping windows of ``arity`` groups are then reordered as
units: every group permutation of the window is scored against the group
weight matrix ``W[i][j]`` (weight from group ``i`` to group ``j``) and the best
one is written back into the ranks the window already occupies. Groups keep
their internal order, so intra-group edges never change direction.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, Field, model_validator

from .digraph import Graph
from .logger import get_logger
from .metrics import forward_weight
from .oracle import permutation_table, score_permutations
from .ranking import Ranking, check_ranking

logger = get_logger(__name__)

MAX_ARITY = 8
MAX_GROUPS = 2**20
TARGET_GROUP_SIZE = 64


class PartitionConfig(BaseModel):
    """Arity, level and rank interval of one flat partition pass."""

    arity: int = Field(default=4, ge=2, le=MAX_ARITY)
    level: int = Field(default=1, ge=1)
    start: int = Field(default=0, ge=0)
    end: Optional[int] = Field(default=None, ge=0)

    @model_validator(mode="after")
    def validate_shape(self) -> "PartitionConfig":
        if self.arity**self.level > MAX_GROUPS:
            raise ValueError(
                f"arity**level = {self.arity}**{self.level} exceeds {MAX_GROUPS} groups"
            )
        if self.end is not None and self.start > self.end:
            raise ValueError("start cannot exceed end")
        return self

    @property
    def group_count(self) -> int:
        return self.arity**self.level


def default_partition_config(
    n: int, arity: int = 4, target_group_size: int = TARGET_GROUP_SIZE
) -> PartitionConfig:
    """Whole-graph interval with the smallest level giving ~``target_group_size`` nodes per group."""
    level = 1
    while n / arity**level > target_group_size and arity ** (level + 1) <= MAX_GROUPS:
        level += 1
    return PartitionConfig(arity=arity, level=level, start=0, end=max(n - 1, 0))


def partition_interval(r: Ranking, cfg: PartitionConfig) -> List[np.ndarray]:
    """
    Nodes ranked in ``[start, end]`` split into ``arity ** level`` contiguous groups.

    Raises:
        ValueError: when the interval is empty or leaves ``[0, n)``
    """
    n = len(r)
    end = cfg.end if cfg.end is not None else n - 1
    if n == 0 or cfg.start > end:
        raise ValueError("empty rank interval")
    if end >= n:
        raise ValueError(f"rank interval [{cfg.start}, {end}] exceeds [0, {n})")
    nodes = r.order[cfg.start : end + 1].copy()
    base, extra = divmod(nodes.size, cfg.group_count)
    sizes = np.full(cfg.group_count, base, dtype=np.int64)
    sizes[:extra] += 1
    return np.split(nodes, np.cumsum(sizes)[:-1])


def group_weight_matrix(g: Graph, window: Sequence[np.ndarray]) -> np.ndarray:
    """``W[i][j]`` = weight of edges from ``window[i]`` to ``window[j]``; zero diagonal."""
    k = len(window)
    label = np.full(g.node_count, -1, dtype=np.int64)
    for index, group in enumerate(window):
        label[group] = index
    members = np.concatenate(window) if k else np.empty(0, dtype=np.int64)
    out_ptr = g.out_ptr
    edge_ids = np.concatenate(
        [np.arange(out_ptr[u], out_ptr[u + 1]) for u in members.tolist()]
        or [np.empty(0, dtype=np.int64)]
    ).astype(np.int64)
    src_group = label[g.sources[edge_ids]]
    tgt_group = label[g.targets[edge_ids]]
    keep = (tgt_group >= 0) & (src_group != tgt_group)
    matrix = np.zeros((k, k), dtype=np.int64)
    np.add.at(matrix, (src_group[keep], tgt_group[keep]), g.weights[edge_ids][keep])
    return matrix


@dataclass
class WindowChoice:
    """Best group order of a window and its gain over the current order."""

    permutation: Tuple[int, ...]
    gain: int
    matrix: np.ndarray = field(repr=False)

    @property
    def is_identity(self) -> bool:
        return self.permutation == tuple(range(len(self.permutation)))


def best_window_permutation(g: Graph, window: Sequence[np.ndarray]) -> WindowChoice:
    """
    Score every order of the window's groups; the identity wins ties, then the
    lexicographically smallest order.
    """
    matrix = group_weight_matrix(g, window)
    perms, _ = permutation_table(len(window))
    scores = score_permutations(matrix)
    best = int(np.argmax(scores))
    return WindowChoice(
        permutation=tuple(perms[best].tolist()),
        gain=int(scores[best] - scores[0]),
        matrix=matrix,
    )


@dataclass
class FlatReport:
    """Counters and objective values of one ``flat_partition_reorder`` pass."""

    arity: int
    level: int
    groups: int = 0
    windows: int = 0
    windows_applied: int = 0
    gain: int = 0
    forward_weight_before: int = 0
    forward_weight_after: int = 0
    accepted: bool = True


def flat_partition_reorder(
    g: Graph, r: Ranking, cfg: PartitionConfig
) -> Tuple[Ranking, FlatReport]:
    """
    Reorder each window of ``arity`` groups by its best group permutation.

    Ranks outside the interval are untouched. The result is kept only if the
    total forward weight does not decrease.

    Returns:
        (new ranking, report); the input ranking is left untouched.
    """
    check_ranking(g, r)
    started = time.perf_counter()
    result = r.copy()
    groups = partition_interval(result, cfg)
    fw_before = forward_weight(g, r)
    report = FlatReport(
        arity=cfg.arity,
        level=cfg.level,
        groups=sum(1 for group in groups if group.size),
        forward_weight_before=fw_before,
    )

    for first in range(0, len(groups), cfg.arity):
        window = [group for group in groups[first : first + cfg.arity] if group.size]
        if len(window) < 2:
            continue
        report.windows += 1
        choice = best_window_permutation(g, window)
        if choice.is_identity:
            continue
        base = result.rank_of(int(window[0][0]))
        result.assign(base, np.concatenate([window[i] for i in choice.permutation]))
        report.windows_applied += 1
        report.gain += choice.gain
        logger.debug(
            "Flat window at rank %d: order %s, gain %d", base, choice.permutation, choice.gain
        )

    fw_after = forward_weight(g, result)
    if fw_after < fw_before:
        logger.warning("Flat pass lowered FW (%d -> %d); discarded", fw_before, fw_after)
        report.accepted = False
        result = r.copy()
        fw_after = fw_before
    report.forward_weight_after = fw_after
    logger.info(
        "Flat (x=%d, level=%d): %d/%d windows reordered, FW %d -> %d (%.2fs)",
        cfg.arity,
        cfg.level,
        report.windows_applied,
        report.windows,
        fw_before,
        fw_after,
        time.perf_counter() - started,
    )
    return result, report


def resolve_partition_config(
    n: int,
    arity: int,
    level: Optional[int] = None,
    start: Optional[int] = None,
    end: Optional[int] = None,
) -> PartitionConfig:
    """Fill unset level/interval values from ``default_partition_config``."""
    defaults = default_partition_config(n, arity)
    return PartitionConfig(
        arity=arity,
        level=level if level is not None else defaults.level,
        start=start if start is not None else defaults.start,
        end=end if end is not None else defaults.end,
    )

