"""
Lightweight dependency container for wiring runtime services into a pipeline run.

Instead of module-level singletons, the collaborators a run needs (validated
configuration, the loaded graph, its SCC partition and the checkpoint store)
are bundled into a data class and passed explicitly to the workflow nodes.
This keeps several isolated runs in one process (tests) independent.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from .checkpoint import CheckpointStore
from .config import OrderingConfig, load_config
from .digraph import Graph
from .scc import SccPartition, compute_sccs


@dataclass(slots=True)
class PipelineDependencies:
    """Container object that holds the runtime services a run needs."""

    config: OrderingConfig
    graph: Graph
    checkpoint: CheckpointStore
    partition: Optional[SccPartition] = None

    def scc_partition(self) -> SccPartition:
        """SCC partition of the graph, computed on first use."""
        if self.partition is None:
            self.partition = compute_sccs(self.graph)
        return self.partition


def build_dependencies(
    graph: Graph,
    *,
    config: OrderingConfig | None = None,
    config_path: str | Path | None = None,
    checkpoint: CheckpointStore | None = None,
) -> PipelineDependencies:
    """
    Construct a ``PipelineDependencies`` instance.

    Args:
        graph: The loaded graph.
        config: Optional pre-built ``OrderingConfig``.
        config_path: Optional config path when ``config`` is not supplied.
        checkpoint: Optional store; defaults to one at ``pipeline.checkpoint``.
    """
    cfg = config or load_config(config_path)
    store = checkpoint or CheckpointStore(
        cfg.pipeline.checkpoint, graph, cfg.config_hash()
    )
    return PipelineDependencies(config=cfg, graph=graph, checkpoint=store)
