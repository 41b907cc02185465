"""
Pipeline state and data structures for the ordering workflow.

This module defines:
- The per-stage history record and the shared ``PipelineState`` TypedDict
- The reducer used to accumulate stage history
- Helper functions the workflow nodes and routing use to read state

The state system uses LangGraph's annotated state approach: ``history`` is
append-only (``operator.add``) while every other key is overwritten by the
node that returns it.

Key Concepts:
- ``ranking`` always holds the best ranking found so far; a stage that does not
  improve simply leaves it in place, which restores the best for the next stage
- ``best_forward_weight`` is the exact fixed-point objective of ``ranking``
- ``stop_reason`` is written only by the sweep check and ends the run
"""

import time
import uuid
from operator import add
from typing import Annotated, Any, Dict, List, Optional, TypedDict

from .ranking import Ranking


class StageRecord(TypedDict):
    """
    Outcome of one stage execution.

    Attributes:
        sweep: Sweep number (0 for the seed stage)
        stage: Stage label, e.g. ``refine`` or ``scc-blocks@25``
        forward_weight: Exact fixed-point FW of the stage output
        best_forward_weight: Best FW after the stage
        improved: Whether the stage output became the new best
        elapsed_seconds: Wall time of the stage
        ts: Timestamp in milliseconds
    """

    sweep: int
    stage: str
    forward_weight: int
    best_forward_weight: int
    improved: bool
    elapsed_seconds: float
    ts: int


class PipelineState(TypedDict, total=False):
    """
    The shared state of one pipeline run.

    Attributes:
        run_id: Unique identifier for the run
        sweep: Current sweep number (starting from 1 after the seed stage)
        ranking: Best ranking found so far
        best_forward_weight: Exact FW of ``ranking``
        improved_this_sweep: Whether any stage of the current sweep improved
        stop_reason: Set when the run should end
        started_at: ``time.monotonic()`` at run start
        history: Append-only list of stage records
    """

    run_id: str
    sweep: int
    ranking: Ranking
    best_forward_weight: int
    improved_this_sweep: bool
    stop_reason: Optional[str]
    started_at: float

    # Use Annotated and 'add' to make history append-only
    history: Annotated[List[StageRecord], add]


# --- State-derived Helper Functions ---


def generate_run_id() -> str:
    return f"run-{uuid.uuid4().hex[:12]}"


def create_stage_record(
    state: PipelineState,
    stage: str,
    *,
    forward_weight: int,
    improved: bool,
    elapsed_seconds: float,
) -> StageRecord:
    """Build a history record for ``stage`` from the state before the stage ran."""
    previous_best = state.get("best_forward_weight", 0)
    return {
        "sweep": state.get("sweep", 0),
        "stage": stage,
        "forward_weight": forward_weight,
        "best_forward_weight": forward_weight if improved else previous_best,
        "improved": improved,
        "elapsed_seconds": round(elapsed_seconds, 6),
        "ts": int(time.time() * 1000),  # epoch_ms
    }


def elapsed_seconds(state: PipelineState) -> float:
    started_at = state.get("started_at")
    if started_at is None:
        return 0.0
    return time.monotonic() - started_at


def time_exhausted(state: PipelineState, limit_seconds: Optional[float]) -> bool:
    """True when a time budget is set and already spent."""
    return limit_seconds is not None and elapsed_seconds(state) >= limit_seconds


def records_for_sweep(state: PipelineState, sweep: int) -> List[StageRecord]:
    return [record for record in state.get("history", []) if record["sweep"] == sweep]


def summarize_history(history: List[StageRecord]) -> List[Dict[str, Any]]:
    """JSON-ready copy of the history with the timestamp dropped."""
    return [
        {key: value for key, value in record.items() if key != "ts"}
        for record in history
    ]
