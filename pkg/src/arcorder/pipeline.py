"""
LangGraph workflow orchestrator for the ordering pipeline.

This module defines the state machine that drives a run:
- A seed stage (greedy, a supplied ranking, or identity)
- One node per scheduled refinement pass, executed in schedule order
- A sweep check that either loops back to the first pass or ends the run

The workflow is built using LangGraph's StateGraph with a conditional edge
from the sweep check. Stages run sequentially; the best ranking lives in the
shared state and in the checkpoint store.

Architecture:
- ``seed`` -> ``<pass 1>`` -> ... -> ``<pass k>`` -> ``check_sweep``
- ``check_sweep`` routes "continue" back to ``<pass 1>`` and "end" to END
- A schedule whose only entry is the greedy seed goes straight from ``seed`` to END
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from functools import partial
from typing import Any, Dict, List, Optional

from langchain_core.runnables import RunnableConfig
from langgraph.constants import START
from langgraph.graph import END, StateGraph

from .config import OrderingConfig, StageModel
from .dependencies import PipelineDependencies, build_dependencies
from .digraph import Graph
from .logger import get_logger
from .metrics import MetricsReport, back_edge_report
from .nodes import PipelineError, check_sweep, run_stage, seed_stage, should_continue
from .ranking import Ranking
from .state import PipelineState, StageRecord, generate_run_id

logger = get_logger(__name__)

__all__ = [
    "PipelineError",
    "PipelineResult",
    "build_pipeline_workflow",
    "split_schedule",
    "run_pipeline",
]


@dataclass
class PipelineResult:
    """Final ranking of a run with its metrics and stage history."""

    ranking: Ranking
    report: MetricsReport
    history: List[StageRecord] = field(default_factory=list)
    sweeps: int = 0
    stop_reason: str = ""


def split_schedule(
    stages: List[StageModel],
) -> tuple[Optional[StageModel], List[StageModel]]:
    """A leading ``greedy`` entry is the seed stage; the rest form the sweep."""
    if stages and stages[0].name == "greedy":
        return stages[0], list(stages[1:])
    return None, list(stages)


def _node_name(index: int, stage: StageModel) -> str:
    return f"{stage.label}#{index}"


def build_pipeline_workflow(deps: PipelineDependencies):
    """Build and compile the workflow for the configured schedule."""
    pipeline_cfg = deps.config.pipeline
    seed, sweep = split_schedule(pipeline_cfg.stages)

    workflow = StateGraph(PipelineState)
    workflow.add_node("seed", partial(seed_stage, deps=deps, stage=seed))
    workflow.add_edge(START, "seed")

    if not sweep:
        workflow.add_edge("seed", END)
        return workflow.compile()

    names = [_node_name(index, stage) for index, stage in enumerate(sweep)]
    for name, stage in zip(names, sweep):
        workflow.add_node(name, partial(run_stage, deps=deps, stage=stage))
    workflow.add_node(
        "check_sweep",
        partial(
            check_sweep,
            max_sweeps=pipeline_cfg.max_sweeps,
            time_limit_seconds=pipeline_cfg.time_limit_seconds,
        ),
    )

    workflow.add_edge("seed", names[0])
    for current, following in zip(names, names[1:]):
        workflow.add_edge(current, following)
    workflow.add_edge(names[-1], "check_sweep")
    workflow.add_conditional_edges(
        "check_sweep",
        should_continue,
        {"continue": names[0], "end": END},
    )
    return workflow.compile()


def _recursion_limit(deps: PipelineDependencies) -> int:
    pipeline_cfg = deps.config.pipeline
    _, sweep = split_schedule(pipeline_cfg.stages)
    return (len(sweep) + 1) * pipeline_cfg.max_sweeps + 25


def run_pipeline(
    g: Graph,
    config: OrderingConfig,
    *,
    initial: Optional[Ranking] = None,
    resume: bool = False,
    dependencies: Optional[PipelineDependencies] = None,
) -> PipelineResult:
    """
    Run the configured schedule on ``g`` until a sweep stops improving.

    Args:
        initial: Starting ranking; replaces the greedy seed when given.
        resume: Start from the configured checkpoint when one exists.

    Raises:
        CheckpointMismatchError: existing checkpoint does not match ``g``
        PipelineError: a stage failed; the best checkpoint stays intact
    """
    deps = dependencies or build_dependencies(g, config=config)
    store = deps.checkpoint
    if store.exists:
        loaded = store.load()
        if resume:
            initial = loaded
    elif resume:
        logger.info("No checkpoint to resume from; starting fresh")

    run_id = generate_run_id()
    initial_state: Dict[str, Any] = {
        "run_id": run_id,
        "sweep": 0,
        "started_at": time.monotonic(),
        "improved_this_sweep": False,
        "stop_reason": None,
        "history": [],
    }
    if initial is not None:
        initial_state["ranking"] = initial

    app = build_pipeline_workflow(deps)
    runnable_config = RunnableConfig(
        recursion_limit=_recursion_limit(deps),
        configurable={"thread_id": run_id},
    )
    logger.info(
        "Starting pipeline %s: %s",
        run_id,
        ", ".join(stage.label for stage in config.pipeline.stages),
    )
    try:
        final_state = app.invoke(initial_state, config=runnable_config)
    except PipelineError:
        raise
    except Exception as exc:
        raise PipelineError(f"pipeline {run_id} failed: {exc}") from exc

    ranking: Ranking = final_state["ranking"]
    result = PipelineResult(
        ranking=ranking,
        report=back_edge_report(g, ranking),
        history=list(final_state.get("history", [])),
        sweeps=final_state.get("sweep", 0),
        stop_reason=final_state.get("stop_reason") or "seed only",
    )
    logger.info(
        "Pipeline %s finished after %d sweep(s) (%s): forward ratio %.6f",
        run_id,
        result.sweeps,
        result.stop_reason,
        result.report.forward_ratio,
    )
    return result
