"""
Stage nodes: the seed stage and one node per scheduled refinement pass.

Every node recomputes the exact forward weight of its output. Improvements
replace the best ranking in state and are offered to the checkpoint store;
anything else leaves the best ranking in place for the next stage.
"""

from __future__ import annotations

import time
from typing import TYPE_CHECKING, Any, Callable, Dict, Optional

from ..flat import flat_partition_reorder, resolve_partition_config
from ..greedy import greedy_rank
from ..logger import get_logger
from ..metrics import forward_weight
from ..ranking import Ranking
from ..refine import refine_ranking
from ..scc import refine_scc_blocks, scc_global_ranking
from ..state import (
    PipelineState,
    create_stage_record,
    summarize_history,
    time_exhausted,
)

if TYPE_CHECKING:
    from ..config import StageModel
    from ..dependencies import PipelineDependencies

logger = get_logger(__name__)


class PipelineError(RuntimeError):
    """Raised when a pipeline stage fails; the best checkpoint is left intact."""


def _run_greedy(deps: "PipelineDependencies", stage: "StageModel", ranking: Ranking) -> Ranking:
    return greedy_rank(deps.graph, deps.config.seed)


def _run_refine(deps: "PipelineDependencies", stage: "StageModel", ranking: Ranking) -> Ranking:
    refined, _ = refine_ranking(deps.graph, ranking, deps.config.max_block)
    return refined


def _run_scc_blocks(
    deps: "PipelineDependencies", stage: "StageModel", ranking: Ranking
) -> Ranking:
    cfg = deps.config
    refined, _ = refine_scc_blocks(
        deps.graph,
        ranking,
        cfg.block_size,
        cfg.resolve_offset(stage),
        perm_limit=cfg.perm_limit,
        partition=deps.scc_partition(),
    )
    return refined


def _run_flat(deps: "PipelineDependencies", stage: "StageModel", ranking: Ranking) -> Ranking:
    flat = deps.config.flat
    partition_cfg = resolve_partition_config(
        deps.graph.node_count,
        stage.arity or flat.arity,
        level=stage.level or flat.level,
        start=flat.start,
        end=flat.end,
    )
    reordered, _ = flat_partition_reorder(deps.graph, ranking, partition_cfg)
    return reordered


def _run_scc_global(
    deps: "PipelineDependencies", stage: "StageModel", ranking: Ranking
) -> Ranking:
    result = scc_global_ranking(
        deps.graph,
        ranking,
        perm_limit=deps.config.perm_limit,
        partition=deps.scc_partition(),
    )
    return result.ranking


STAGE_RUNNERS: Dict[str, Callable[["PipelineDependencies", "StageModel", Ranking], Ranking]] = {
    "greedy": _run_greedy,
    "refine": _run_refine,
    "scc-blocks": _run_scc_blocks,
    "flat": _run_flat,
    "scc-global": _run_scc_global,
}


def run_pass(deps: "PipelineDependencies", stage: "StageModel", ranking: Ranking) -> Ranking:
    """Dispatch one scheduled pass by stage name."""
    try:
        runner = STAGE_RUNNERS[stage.name]
    except KeyError as exc:
        raise ValueError(f"Unknown pipeline stage: {stage.name}") from exc
    return runner(deps, stage, ranking)


def seed_stage(
    state: PipelineState,
    *,
    deps: "PipelineDependencies",
    stage: Optional["StageModel"],
) -> Dict[str, Any]:
    """Produce the starting ranking: a supplied one, the greedy seed, or identity."""
    g = deps.graph
    started = time.perf_counter()
    ranking = state.get("ranking")
    if ranking is not None:
        label = "initial"
    elif stage is not None:
        label = stage.label
        try:
            ranking = run_pass(deps, stage, Ranking.identity(g.node_count))
        except Exception as exc:
            raise PipelineError(f"seed stage {label} failed: {exc}") from exc
    else:
        label = "identity"
        ranking = Ranking.identity(g.node_count)

    fw = forward_weight(g, ranking)
    record = create_stage_record(
        state,
        label,
        forward_weight=fw,
        improved=True,
        elapsed_seconds=time.perf_counter() - started,
    )
    deps.checkpoint.offer(
        ranking, fw, summarize_history(state.get("history", []) + [record])
    )
    logger.info("Seed stage %s: FW %d of %d", label, fw, g.total_weight)
    return {
        "ranking": ranking,
        "best_forward_weight": fw,
        "sweep": 1,
        "improved_this_sweep": False,
        "history": [record],
    }


def run_stage(
    state: PipelineState,
    *,
    deps: "PipelineDependencies",
    stage: "StageModel",
) -> Dict[str, Any]:
    """Run one scheduled pass on the best ranking and keep it only if it improves."""
    label = stage.label
    sweep = state.get("sweep", 1)
    if time_exhausted(state, deps.config.pipeline.time_limit_seconds):
        logger.info("Time budget spent; skipping %s in sweep %d", label, sweep)
        return {}

    started = time.perf_counter()
    try:
        candidate = run_pass(deps, stage, state["ranking"])
    except Exception as exc:
        raise PipelineError(f"stage {label} failed in sweep {sweep}: {exc}") from exc

    fw = forward_weight(deps.graph, candidate)
    best = state["best_forward_weight"]
    improved = fw > best
    record = create_stage_record(
        state,
        label,
        forward_weight=fw,
        improved=improved,
        elapsed_seconds=time.perf_counter() - started,
    )
    logger.info(
        "Sweep %d stage %s: FW %d (best %d)%s",
        sweep,
        label,
        fw,
        max(fw, best),
        " improved" if improved else "",
    )
    if not improved:
        return {"history": [record]}

    deps.checkpoint.offer(
        candidate, fw, summarize_history(state.get("history", []) + [record])
    )
    return {
        "ranking": candidate,
        "best_forward_weight": fw,
        "improved_this_sweep": True,
        "history": [record],
    }
