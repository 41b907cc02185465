"""
Nodes module containing the pipeline workflow node implementations.
"""

from .stages import PipelineError, STAGE_RUNNERS, run_pass, run_stage, seed_stage
from .transition import check_sweep, should_continue

__all__ = [
    "PipelineError",
    "STAGE_RUNNERS",
    "run_pass",
    "run_stage",
    "seed_stage",
    "check_sweep",
    "should_continue",
]
