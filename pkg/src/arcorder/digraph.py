"""
Weighted directed graph representation and edge-list ingestion.

The ``Graph`` is immutable after construction and stores its edges in two
compressed sparse row layouts (by source and by target) so every pass can scan
adjacency in contiguous memory. Weights are exact fixed-point integers: a
decimal input ``"2.5"`` loaded with ``precision=2`` is stored as ``250``.

Key Concepts:
- Dense node indices in ``[0, n)`` assigned by first appearance of external IDs
- Self-loops are dropped at construction; their weight is kept separately
- Parallel edges are merged by summing weights
- ``induced_subgraph`` carries a local-to-parent index mapping
"""

from __future__ import annotations

import csv
import hashlib
import io
from array import array
from bisect import bisect_left
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation
from functools import cached_property
from pathlib import Path
from typing import BinaryIO, Iterable, Iterator, List, Optional, Sequence, TextIO, Tuple

import numpy as np
import scipy.sparse as sp

from .logger import get_logger

logger = get_logger(__name__)

DEFAULT_COLUMNS = ("from", "to", "weight")

# Largest fixed-point value an int64 weight, or a sum of all weights, may reach.
MAX_WEIGHT = 2**63 - 1


class GraphFormatError(ValueError):
    """Raised when an edge list cannot be parsed; names the offending line."""

    def __init__(self, message: str, line: int | None = None) -> None:
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(f"{prefix}{message}")


# --- Fixed-point weights ---


def parse_weight(text: str, precision: int) -> int:
    """
    Parse a decimal string into a fixed-point integer with ``precision`` digits.

    Raises:
        ValueError: when the text is not a finite non-negative decimal or carries
            more fractional digits than ``precision`` allows.
    """
    text = text.strip()
    if text.isdigit():
        scaled = int(text) * 10**precision
        if scaled > MAX_WEIGHT:
            raise ValueError(f"weight {text!r} exceeds the fixed-point range")
        return scaled
    try:
        value = Decimal(text)
    except InvalidOperation as exc:
        raise ValueError(f"unparsable weight {text!r}") from exc
    if not value.is_finite():
        raise ValueError(f"unparsable weight {text!r}")
    if value < 0:
        raise ValueError(f"negative weight {text!r}")
    scaled = value.scaleb(precision)
    if scaled > MAX_WEIGHT:
        raise ValueError(f"weight {text!r} exceeds the fixed-point range")
    if scaled != scaled.to_integral_value():
        raise ValueError(
            f"weight {text!r} has more than {precision} decimal places"
        )
    return int(scaled)


def format_weight(value: int, precision: int, *, fixed: bool = False) -> str:
    """Render a fixed-point weight as a decimal string."""
    number = Decimal(int(value)).scaleb(-precision)
    if fixed:
        return f"{number:f}"
    normalized = number.normalize()
    return f"{normalized:f}"


@dataclass(frozen=True)
class CsvFormat:
    """Column layout of an edge-list CSV."""

    source_column: str | int = DEFAULT_COLUMNS[0]
    target_column: str | int = DEFAULT_COLUMNS[1]
    weight_column: str | int = DEFAULT_COLUMNS[2]
    header: Optional[bool] = None  # None = auto-detect
    precision: int = 2

    @property
    def scale(self) -> int:
        return 10**self.precision

    @classmethod
    def from_model(cls, model) -> "CsvFormat":
        """Build a format from the ``input`` configuration section."""
        return cls(
            source_column=model.source_column,
            target_column=model.target_column,
            weight_column=model.weight_column,
            header=model.header,
            precision=model.precision,
        )

    @classmethod
    def from_columns_spec(cls, spec: str, **kwargs) -> "CsvFormat":
        """Parse a ``--format-cols`` value such as ``from,to,weight`` or ``0,1,2``."""
        parts = [part.strip() for part in spec.split(",")]
        if len(parts) != 3 or not all(parts):
            raise ValueError(
                f"expected three comma-separated columns (source,target,weight), got {spec!r}"
            )
        columns = [int(p) if p.isdigit() else p for p in parts]
        return cls(
            source_column=columns[0],
            target_column=columns[1],
            weight_column=columns[2],
            **kwargs,
        )


# --- Graph ---


def _weight_total(weights: np.ndarray) -> int:
    """Exact sum of non-negative int64 weights as a Python int."""
    if not weights.size:
        return 0
    if int(weights.max()) <= MAX_WEIGHT // weights.size:
        return int(weights.sum())
    return int(weights.astype(object).sum())


@dataclass(frozen=True, eq=False)
class Graph:
    """
    Immutable weighted directed graph.

    Attributes:
        ids: External node ID per dense index
        sources: Edge sources, sorted by (source, target)
        targets: Edge targets, aligned with ``sources``
        weights: Fixed-point edge weights, aligned with ``sources``
        precision: Decimal digits of the fixed-point scale
        dropped_self_loop_weight: Total weight of removed self-loops
        parent_index: For induced subgraphs, local index -> parent index
    """

    ids: Tuple[str, ...]
    sources: np.ndarray
    targets: np.ndarray
    weights: np.ndarray
    precision: int = 2
    dropped_self_loop_weight: int = 0
    parent_index: Optional[np.ndarray] = field(default=None, repr=False)

    @classmethod
    def from_edge_arrays(
        cls,
        ids: Sequence[str],
        sources: Iterable[int],
        targets: Iterable[int],
        weights: Iterable[int],
        *,
        precision: int = 2,
        dropped_self_loop_weight: int = 0,
    ) -> "Graph":
        """
        Build a graph from raw edge arrays, dropping self-loops and merging
        parallel edges by summation.
        """
        n = len(ids)
        src = np.asarray(sources, dtype=np.int64).ravel()
        tgt = np.asarray(targets, dtype=np.int64).ravel()
        try:
            wts = np.asarray(weights, dtype=np.int64).ravel()
        except OverflowError as exc:
            raise ValueError("edge weight exceeds the fixed-point range") from exc
        if not (src.shape == tgt.shape == wts.shape):
            raise ValueError("source, target and weight arrays must have equal length")
        if src.size and (
            src.min() < 0 or tgt.min() < 0 or src.max() >= n or tgt.max() >= n
        ):
            raise ValueError("edge endpoint outside [0, node_count)")
        if wts.size and wts.min() < 0:
            raise ValueError("edge weights must be non-negative")
        if _weight_total(wts) + dropped_self_loop_weight > MAX_WEIGHT:
            raise ValueError("total edge weight exceeds the fixed-point range")

        loops = src == tgt
        dropped = dropped_self_loop_weight + int(wts[loops].sum())
        src, tgt, wts = src[~loops], tgt[~loops], wts[~loops]

        if src.size:
            keys = src * max(n, 1) + tgt
            order = np.argsort(keys, kind="stable")
            keys, wts = keys[order], wts[order]
            unique_keys, starts = np.unique(keys, return_index=True)
            wts = np.add.reduceat(wts, starts)
            src, tgt = unique_keys // n, unique_keys % n

        return cls(
            ids=tuple(ids),
            sources=src,
            targets=tgt,
            weights=wts,
            precision=precision,
            dropped_self_loop_weight=dropped,
        )

    # -- sizes and totals --

    @property
    def node_count(self) -> int:
        return len(self.ids)

    @property
    def edge_count(self) -> int:
        return int(self.sources.size)

    @property
    def scale(self) -> int:
        """Fixed-point units per weight unit."""
        return 10**self.precision

    @cached_property
    def total_weight(self) -> int:
        return int(self.weights.sum())

    @cached_property
    def index_of(self) -> dict[str, int]:
        """External ID -> dense index."""
        return {node_id: index for index, node_id in enumerate(self.ids)}

    def edges(self) -> Iterator[Tuple[int, int, int]]:
        """Iterate ``(source, target, weight)`` triples in (source, target) order."""
        return zip(self.sources.tolist(), self.targets.tolist(), self.weights.tolist())

    # -- compressed adjacency --

    @cached_property
    def out_ptr(self) -> np.ndarray:
        counts = np.bincount(self.sources, minlength=self.node_count)
        return np.concatenate(([0], np.cumsum(counts))).astype(np.int64)

    @cached_property
    def _in_order(self) -> np.ndarray:
        return np.lexsort((self.sources, self.targets))

    @cached_property
    def in_sources(self) -> np.ndarray:
        return self.sources[self._in_order]

    @cached_property
    def in_weights(self) -> np.ndarray:
        return self.weights[self._in_order]

    @cached_property
    def in_ptr(self) -> np.ndarray:
        counts = np.bincount(self.targets, minlength=self.node_count)
        return np.concatenate(([0], np.cumsum(counts))).astype(np.int64)

    @cached_property
    def out_lists(self) -> Tuple[List[int], List[int], List[int]]:
        return self.out_ptr.tolist(), self.targets.tolist(), self.weights.tolist()

    @cached_property
    def in_lists(self) -> Tuple[List[int], List[int], List[int]]:
        return self.in_ptr.tolist(), self.in_sources.tolist(), self.in_weights.tolist()

    def out_adjacency(self, u: int) -> List[Tuple[int, int]]:
        """``(target, weight)`` pairs of ``u``, sorted by target."""
        ptr, targets, weights = self.out_lists
        lo, hi = ptr[u], ptr[u + 1]
        return list(zip(targets[lo:hi], weights[lo:hi]))

    def in_adjacency(self, v: int) -> List[Tuple[int, int]]:
        """``(source, weight)`` pairs of ``v``, sorted by source."""
        ptr, sources, weights = self.in_lists
        lo, hi = ptr[v], ptr[v + 1]
        return list(zip(sources[lo:hi], weights[lo:hi]))

    def weight(self, u: int, v: int) -> int:
        """Weight of edge ``u -> v`` or 0 when absent."""
        ptr, targets, weights = self.out_lists
        lo, hi = ptr[u], ptr[u + 1]
        i = bisect_left(targets, v, lo, hi)
        if i < hi and targets[i] == v:
            return weights[i]
        return 0

    @cached_property
    def out_weight_totals(self) -> np.ndarray:
        totals = np.zeros(self.node_count, dtype=np.int64)
        np.add.at(totals, self.sources, self.weights)
        return totals

    @cached_property
    def in_weight_totals(self) -> np.ndarray:
        totals = np.zeros(self.node_count, dtype=np.int64)
        np.add.at(totals, self.targets, self.weights)
        return totals

    def incident_edge_ids(self, nodes: Iterable[int]) -> np.ndarray:
        """
        Ids (positions in ``sources``) of every edge with at least one endpoint
        in ``nodes``, each listed once.
        """
        node_array = np.fromiter(nodes, dtype=np.int64)
        if node_array.size == 0 or self.edge_count == 0:
            return np.empty(0, dtype=np.int64)
        out_ptr, in_ptr = self.out_ptr, self.in_ptr
        out_ids = [np.arange(out_ptr[u], out_ptr[u + 1]) for u in node_array]
        in_ids = [self._in_order[in_ptr[v] : in_ptr[v + 1]] for v in node_array]
        return np.unique(np.concatenate(out_ids + in_ids))

    def structure_matrix(self) -> sp.csr_matrix:
        """Unweighted CSR adjacency; zero-weight edges are kept as edges."""
        n = self.node_count
        data = np.ones(self.edge_count, dtype=np.int8)
        return sp.csr_matrix((data, self.targets, self.out_ptr), shape=(n, n))

    def content_hash(self) -> str:
        """SHA-256 over node ids, edge arrays and precision."""
        digest = hashlib.sha256()
        digest.update(str(self.precision).encode())
        digest.update("\x1f".join(self.ids).encode("utf-8"))
        for arr in (self.sources, self.targets, self.weights):
            digest.update(np.ascontiguousarray(arr, dtype=np.int64).tobytes())
        return digest.hexdigest()


def induced_subgraph(g: Graph, nodes: Iterable[int]) -> Graph:
    """
    Subgraph on ``nodes`` with exactly the edges having both endpoints inside.

    Local indices follow ascending parent index; ``parent_index`` maps back.
    """
    selected = np.unique(np.fromiter(nodes, dtype=np.int64))
    if selected.size and (selected[0] < 0 or selected[-1] >= g.node_count):
        raise ValueError(
            f"induced_subgraph: node index outside [0, {g.node_count})"
        )
    lookup = np.full(g.node_count, -1, dtype=np.int64)
    lookup[selected] = np.arange(selected.size)
    if selected.size * 8 < g.node_count:
        # small selections: only scan the out-edges of selected nodes
        out_ptr = g.out_ptr
        edge_ids = np.concatenate(
            [np.arange(out_ptr[u], out_ptr[u + 1]) for u in selected.tolist()]
            or [np.empty(0, dtype=np.int64)]
        ).astype(np.int64)
    else:
        edge_ids = np.arange(g.edge_count, dtype=np.int64)
    local_src = lookup[g.sources[edge_ids]]
    local_tgt = lookup[g.targets[edge_ids]]
    keep = (local_src >= 0) & (local_tgt >= 0)
    parent_ids = g.ids
    return Graph(
        ids=tuple(parent_ids[i] for i in selected.tolist()),
        sources=local_src[keep],
        targets=local_tgt[keep],
        weights=g.weights[edge_ids][keep],
        precision=g.precision,
        parent_index=selected,
    )


def build_graph(
    edges: Iterable[Tuple[str, str, object]],
    *,
    precision: int = 0,
    nodes: Sequence[str] = (),
) -> Graph:
    """
    Build a graph from ``(source_id, target_id, weight)`` triples given in
    weight units. ``nodes`` pre-seeds the id order (isolated nodes allowed).
    """
    index_of: dict[str, int] = {}
    for node_id in nodes:
        index_of.setdefault(node_id, len(index_of))
    src, tgt, wts = [], [], []
    for source_id, target_id, raw_weight in edges:
        src.append(index_of.setdefault(source_id, len(index_of)))
        tgt.append(index_of.setdefault(target_id, len(index_of)))
        wts.append(parse_weight(str(raw_weight), precision))
    return Graph.from_edge_arrays(
        list(index_of), src, tgt, wts, precision=precision
    )


# --- CSV ingestion ---


def _resolve_columns(
    fmt: CsvFormat, header_row: Optional[List[str]], line: int
) -> Tuple[int, int, int]:
    resolved = []
    for role, column in enumerate(
        (fmt.source_column, fmt.target_column, fmt.weight_column)
    ):
        if isinstance(column, int):
            resolved.append(column)
        elif header_row is None:
            resolved.append(role)
        else:
            names = [cell.strip() for cell in header_row]
            if column not in names:
                raise GraphFormatError(f"column {column!r} not found in header", line)
            resolved.append(names.index(column))
    return resolved[0], resolved[1], resolved[2]


def _looks_like_header(row: List[str], fmt: CsvFormat) -> bool:
    names = {c for c in (fmt.source_column, fmt.target_column, fmt.weight_column) if isinstance(c, str)}
    if names & {cell.strip() for cell in row}:
        return True
    weight_pos = fmt.weight_column if isinstance(fmt.weight_column, int) else 2
    if weight_pos >= len(row):
        return False
    try:
        Decimal(row[weight_pos].strip())
    except InvalidOperation:
        return True
    return False


def load_edge_list(
    stream: BinaryIO,
    fmt: CsvFormat | None = None,
    *,
    known_ids: Sequence[str] = (),
) -> Graph:
    """
    Parse a UTF-8 CSV edge list into a ``Graph``.

    Args:
        stream: Binary stream yielding the CSV bytes (LF or CRLF line endings)
        fmt: Column layout; defaults to ``from,to,weight`` with header auto-detect
        known_ids: Optional id order to pre-seed the dense index assignment

    Raises:
        GraphFormatError: malformed row (naming its line) or no edge rows at all
    """
    fmt = fmt or CsvFormat()
    text = io.TextIOWrapper(stream, encoding="utf-8", newline="")
    reader = csv.reader(text)

    index_of: dict[str, int] = {}
    for node_id in known_ids:
        index_of.setdefault(node_id, len(index_of))

    src, tgt, wts = array("q"), array("q"), array("q")
    columns: Optional[Tuple[int, int, int]] = None
    width = 0
    rows = 0
    running_total = 0

    try:
        for row in reader:
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            line = reader.line_num
            if columns is None:
                is_header = (
                    fmt.header if fmt.header is not None else _looks_like_header(row, fmt)
                )
                columns = _resolve_columns(fmt, row if is_header else None, line)
                width = len(row)
                if max(columns) >= width:
                    raise GraphFormatError(
                        f"expected at least {max(columns) + 1} columns, found {width}",
                        line,
                    )
                if is_header:
                    continue
            if len(row) != width:
                raise GraphFormatError(
                    f"expected {width} columns, found {len(row)}", line
                )
            s_col, t_col, w_col = columns
            try:
                weight = parse_weight(row[w_col], fmt.precision)
            except ValueError as exc:
                raise GraphFormatError(str(exc), line) from exc
            source_id, target_id = row[s_col].strip(), row[t_col].strip()
            if not source_id or not target_id:
                raise GraphFormatError("empty node id", line)
            src.append(index_of.setdefault(source_id, len(index_of)))
            tgt.append(index_of.setdefault(target_id, len(index_of)))
            running_total += weight
            if running_total > MAX_WEIGHT:
                raise GraphFormatError(
                    "cumulative edge weight exceeds the fixed-point range", line
                )
            wts.append(weight)
            rows += 1
    except UnicodeDecodeError as exc:
        raise GraphFormatError(f"input is not valid UTF-8: {exc}") from exc
    finally:
        text.detach()

    if rows == 0:
        raise GraphFormatError("no edges")

    graph = Graph.from_edge_arrays(
        list(index_of),
        np.frombuffer(src, dtype=np.int64),
        np.frombuffer(tgt, dtype=np.int64),
        np.frombuffer(wts, dtype=np.int64),
        precision=fmt.precision,
    )
    logger.info(
        "Loaded graph: %d nodes, %d edges (%d rows, self-loop weight dropped %s)",
        graph.node_count,
        graph.edge_count,
        rows,
        format_weight(graph.dropped_self_loop_weight, graph.precision),
    )
    return graph


def read_graph(path: str | Path, fmt: CsvFormat | None = None) -> Graph:
    """Load an edge-list CSV from disk."""
    with Path(path).expanduser().open("rb") as handle:
        return load_edge_list(handle, fmt)


def write_edge_list(g: Graph, stream: TextIO, fmt: CsvFormat | None = None) -> None:
    """Write ``g`` as CSV with a header, rows sorted by (source, target) index."""
    fmt = fmt or CsvFormat(precision=g.precision)
    header = [
        column if isinstance(column, str) else default
        for column, default in zip(
            (fmt.source_column, fmt.target_column, fmt.weight_column), DEFAULT_COLUMNS
        )
    ]
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(header)
    ids = g.ids
    for u, v, w in g.edges():
        writer.writerow([ids[u], ids[v], format_weight(w, g.precision, fixed=True)])
