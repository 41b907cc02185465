"""
Sweep transition node for pipeline flow control.
"""

from typing import Any, Dict, Optional

from ..logger import get_logger
from ..state import PipelineState, records_for_sweep, time_exhausted

logger = get_logger(__name__)


def check_sweep(
    state: PipelineState,
    *,
    max_sweeps: int,
    time_limit_seconds: Optional[float] = None,
) -> Dict[str, Any]:
    """
    End-of-sweep checkpoint in the workflow.

    Writes ``stop_reason`` when the sweep brought no improvement, the sweep
    budget is used up or the time budget is spent; otherwise advances the
    sweep counter and clears the improvement flag. Routing itself is left to
    the conditional edge reading ``stop_reason``.
    """
    sweep = state.get("sweep", 1)
    if time_exhausted(state, time_limit_seconds):
        reason = "time limit"
    elif not state.get("improved_this_sweep", False):
        reason = "no improvement"
    elif sweep >= max_sweeps:
        reason = "max sweeps"
    else:
        return {"sweep": sweep + 1, "improved_this_sweep": False}

    improving = sum(1 for record in records_for_sweep(state, sweep) if record["improved"])
    logger.info(
        "Stopping after sweep %d (%s, %d improving stage(s)); best FW %d",
        sweep,
        reason,
        improving,
        state.get("best_forward_weight", 0),
    )
    return {"stop_reason": reason}


def should_continue(state: PipelineState) -> str:
    """Return "end" once a stop reason is recorded, "continue" otherwise."""
    return "end" if state.get("stop_reason") else "continue"
