"""
Rankings (node permutations) and their on-disk formats.

A ``Ranking`` keeps both directions of the permutation: ``order[k]`` is the
node at rank ``k`` and ``position[v]`` is the rank of node ``v``. Passes mutate
rankings in place through ``assign``, which rewrites a contiguous rank range.

File formats:
- Plain: one external node ID per line, first line = rank 0
- Keyed CSV: ``node_id,rank`` rows (optional header), accepted on read
"""

from __future__ import annotations

import os
import tempfile
from collections import Counter
from pathlib import Path
from typing import Iterable, List, Sequence, TextIO

import numpy as np

from .digraph import Graph


class RankingValidationError(ValueError):
    """Raised when a candidate ordering is not a permutation of the graph's nodes."""

    def __init__(
        self,
        *,
        duplicates: Sequence[str] = (),
        unknown: Sequence[str] = (),
        missing: Sequence[str] = (),
        detail: str | None = None,
    ) -> None:
        self.duplicates = list(duplicates)
        self.unknown = list(unknown)
        self.missing = list(missing)
        parts = []
        if detail:
            parts.append(detail)
        for label, values in (
            ("duplicate", self.duplicates),
            ("unknown", self.unknown),
            ("missing", self.missing),
        ):
            if values:
                parts.append(f"{label} {', '.join(repr(v) for v in values)}")
        super().__init__("invalid ranking: " + "; ".join(parts))


class Ranking:
    """Permutation of dense node indices with its inverse kept in sync."""

    __slots__ = ("order", "position")

    def __init__(self, order: Iterable[int]) -> None:
        order_array = np.array(list(order) if not isinstance(order, np.ndarray) else order, dtype=np.int64)
        n = order_array.size
        position = np.full(n, -1, dtype=np.int64)
        if n:
            if order_array.min() < 0 or order_array.max() >= n:
                raise ValueError("ranking entries must lie in [0, n)")
            position[order_array] = np.arange(n, dtype=np.int64)
            if (position < 0).any():
                raise ValueError("ranking contains duplicate nodes")
        self.order = order_array
        self.position = position

    @classmethod
    def identity(cls, n: int) -> "Ranking":
        return cls(np.arange(n, dtype=np.int64))

    @classmethod
    def from_position(cls, position: Iterable[int]) -> "Ranking":
        position_array = np.asarray(list(position) if not isinstance(position, np.ndarray) else position, dtype=np.int64)
        order = np.full(position_array.size, -1, dtype=np.int64)
        order[position_array] = np.arange(position_array.size, dtype=np.int64)
        return cls(order)

    def __len__(self) -> int:
        return int(self.order.size)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Ranking):
            return NotImplemented
        return np.array_equal(self.order, other.order)

    def __repr__(self) -> str:
        preview = self.order[:8].tolist()
        suffix = ", ..." if len(self) > 8 else ""
        return f"Ranking({preview}{suffix})"

    def copy(self) -> "Ranking":
        clone = Ranking.__new__(Ranking)
        clone.order = self.order.copy()
        clone.position = self.position.copy()
        return clone

    def reversed(self) -> "Ranking":
        return Ranking(self.order[::-1].copy())

    def rank_of(self, node: int) -> int:
        return int(self.position[node])

    def node_at(self, rank: int) -> int:
        return int(self.order[rank])

    def nodes_between(self, low: int, high: int) -> List[int]:
        """Nodes with rank strictly between ``low`` and ``high``."""
        return self.order[low + 1 : high].tolist()

    def assign(self, start: int, nodes: Sequence[int]) -> None:
        """Place ``nodes`` at ranks ``start .. start+len(nodes)-1``."""
        block = np.asarray(nodes, dtype=np.int64)
        stop = start + block.size
        self.order[start:stop] = block
        self.position[block] = np.arange(start, stop, dtype=np.int64)

    def assign_ranks(self, ranks: Sequence[int], nodes: Sequence[int]) -> None:
        """Place ``nodes[i]`` at ``ranks[i]`` for an arbitrary rank set."""
        rank_array = np.asarray(ranks, dtype=np.int64)
        block = np.asarray(nodes, dtype=np.int64)
        self.order[rank_array] = block
        self.position[block] = rank_array

    def external_ids(self, g: Graph) -> List[str]:
        ids = g.ids
        return [ids[v] for v in self.order.tolist()]


def check_ranking(g: Graph, r: Ranking) -> None:
    """Raise ``ValueError`` when ``r`` does not cover exactly ``g``'s nodes."""
    if len(r) != g.node_count:
        raise ValueError(
            f"ranking size mismatch: ranking has {len(r)} nodes, graph has {g.node_count}"
        )


def validate_ranking(g: Graph, candidate: Sequence[str]) -> Ranking:
    """
    Turn a full ordering of external IDs into a ``Ranking``.

    Raises:
        RankingValidationError: enumerating duplicate, unknown and missing IDs
    """
    index_of = g.index_of
    counts = Counter(candidate)
    duplicates = [node_id for node_id, count in counts.items() if count > 1]
    unknown = [node_id for node_id in counts if node_id not in index_of]
    missing = [node_id for node_id in g.ids if node_id not in counts]
    if duplicates or unknown or missing:
        raise RankingValidationError(
            duplicates=duplicates, unknown=unknown, missing=missing
        )
    return Ranking([index_of[node_id] for node_id in candidate])


# --- Files ---


def parse_ranking_lines(lines: Iterable[str]) -> List[str]:
    """
    Parse ranking file lines into external IDs in rank order.

    Plain files list one ID per line; keyed files hold ``node_id,rank`` rows.
    """
    rows = [line.strip() for line in lines]
    rows = [row for row in rows if row]
    if not rows or "," not in rows[0]:
        return rows

    keyed = []
    for line_number, row in enumerate(rows, start=1):
        node_id, _, rank_text = row.rpartition(",")
        node_id, rank_text = node_id.strip(), rank_text.strip()
        if line_number == 1 and not rank_text.lstrip("-").isdigit():
            continue  # header
        if not rank_text.lstrip("-").isdigit():
            raise RankingValidationError(
                detail=f"row {line_number}: rank {rank_text!r} is not an integer"
            )
        keyed.append((int(rank_text), node_id))
    ranks = [rank for rank, _ in keyed]
    if len(set(ranks)) != len(ranks):
        repeated = sorted(rank for rank, count in Counter(ranks).items() if count > 1)
        raise RankingValidationError(detail=f"repeated ranks {repeated[:10]}")
    return [node_id for _, node_id in sorted(keyed)]


def read_ranking(path: str | Path, g: Graph) -> Ranking:
    """Read and validate a ranking file against ``g``."""
    with Path(path).expanduser().open("r", encoding="utf-8") as handle:
        return validate_ranking(g, parse_ranking_lines(handle))


def write_ranking_stream(g: Graph, r: Ranking, stream: TextIO) -> None:
    for node_id in r.external_ids(g):
        stream.write(node_id)
        stream.write("\n")


def write_ranking(path: str | Path, g: Graph, r: Ranking) -> Path:
    """Write ``r`` atomically: temp file in the target directory, then rename."""
    target = Path(path).expanduser()
    target.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(prefix=f".{target.name}.", dir=target.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as handle:
            write_ranking_stream(g, r, handle)
        os.replace(tmp_name, target)
    except BaseException:
        Path(tmp_name).unlink(missing_ok=True)
        raise
    return target
