"""
Save-if-improved persistence for pipeline runs.

A checkpoint is a ranking file plus a JSON sidecar (``<ranking>.json``) holding
the exact fixed-point forward weight, the configuration hash, the graph content
hash and the stage history. Both files are replaced atomically, ranking first,
so the ranking on disk never scores below the value its sidecar records.
"""

from __future__ import annotations

import json
import os
import tempfile
import time
from pathlib import Path
from typing import Any, Dict, List, Optional

from .digraph import Graph
from .logger import get_logger
from .metrics import forward_weight
from .ranking import Ranking, read_ranking, write_ranking

logger = get_logger(__name__)

SIDECAR_SUFFIX = ".json"


class CheckpointMismatchError(ValueError):
    """Raised when an existing checkpoint does not belong to the loaded graph."""


def sidecar_path(ranking_path: Path) -> Path:
    return ranking_path.with_name(ranking_path.name + SIDECAR_SUFFIX)


def _write_json_atomic(path: Path, payload: Dict[str, Any]) -> None:
    fd, tmp_name = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fp:
            json.dump(payload, fp, ensure_ascii=False, indent=2)
        os.replace(tmp_name, path)
    except BaseException:
        Path(tmp_name).unlink(missing_ok=True)
        raise


class CheckpointStore:
    """
    Keeps the best ranking of a run, on disk when a path is configured.

    Args:
        path: Ranking file path; ``None`` keeps the best ranking in memory only
        graph: Graph every offered ranking belongs to
        config_hash: Hash of the validated configuration, stored for provenance
    """

    def __init__(self, path: str | Path | None, graph: Graph, config_hash: str) -> None:
        self.path = Path(path).expanduser() if path else None
        self.graph = graph
        self.graph_hash = graph.content_hash()
        self.config_hash = config_hash
        self.best_forward_weight: Optional[int] = None
        self.best_ranking: Optional[Ranking] = None
        self.writes = 0

    @property
    def exists(self) -> bool:
        return self.path is not None and self.path.exists()

    def load(self) -> Optional[Ranking]:
        """
        Load and validate an existing checkpoint.

        Raises:
            CheckpointMismatchError: when the graph hash differs, the sidecar is
                missing or unreadable, or the ranking scores below its record
        """
        if not self.exists:
            return None
        meta_path = sidecar_path(self.path)
        try:
            with meta_path.open("r", encoding="utf-8") as fp:
                meta = json.load(fp)
        except FileNotFoundError as exc:
            raise CheckpointMismatchError(
                f"checkpoint {self.path} has no sidecar {meta_path.name}"
            ) from exc
        except json.JSONDecodeError as exc:
            raise CheckpointMismatchError(
                f"checkpoint sidecar {meta_path} is not valid JSON: {exc}"
            ) from exc

        if meta.get("graph_hash") != self.graph_hash:
            raise CheckpointMismatchError(
                f"checkpoint {self.path} was written for a different graph"
            )
        if meta.get("config_hash") != self.config_hash:
            logger.warning(
                "Checkpoint %s was written with a different configuration", self.path
            )

        ranking = read_ranking(self.path, self.graph)
        fw = forward_weight(self.graph, ranking)
        recorded = int(meta.get("forward_weight", -1))
        if fw < recorded:
            raise CheckpointMismatchError(
                f"checkpoint ranking scores {fw}, below its recorded {recorded}"
            )
        self.best_forward_weight = fw
        self.best_ranking = ranking
        logger.info("Resumed checkpoint %s with FW %d", self.path, fw)
        return ranking

    def offer(
        self,
        ranking: Ranking,
        fw: int,
        history: List[Dict[str, Any]] | None = None,
    ) -> bool:
        """Keep ``ranking`` if it strictly beats the best so far; returns True when kept."""
        if self.best_forward_weight is not None and fw <= self.best_forward_weight:
            return False
        self.best_forward_weight = fw
        self.best_ranking = ranking.copy()
        if self.path is not None:
            write_ranking(self.path, self.graph, ranking)
            _write_json_atomic(
                sidecar_path(self.path),
                {
                    "forward_weight": fw,
                    "total_weight": self.graph.total_weight,
                    "precision": self.graph.precision,
                    "config_hash": self.config_hash,
                    "graph_hash": self.graph_hash,
                    "updated_at": int(time.time()),
                    "history": history or [],
                },
            )
            self.writes += 1
            logger.info("Checkpoint saved to %s (FW %d)", self.path, fw)
        return True
