"""
Logging setup shared by the passes, the pipeline and the CLI.

Log records always go to stderr: stdout carries rankings and reports that
users pipe into files. The level comes from ``ARCORDER_LOG_LEVEL`` (default
INFO), read from the environment or a ``.env`` file in the working directory.
Passes log one INFO summary per run and per-move detail at DEBUG.
"""

from __future__ import annotations

import logging
import os
import sys
from typing import Optional

from dotenv import load_dotenv

LOG_LEVEL_ENV = "ARCORDER_LOG_LEVEL"
LOG_FORMAT = "%(asctime)s | %(levelname)s | %(name)s | %(message)s"

_configured = False


def _level_from_env() -> int:
    load_dotenv()
    name = os.getenv(LOG_LEVEL_ENV, "INFO").strip().upper()
    level = logging.getLevelName(name)
    return level if isinstance(level, int) else logging.INFO


def _configure_logging() -> None:
    global _configured
    if _configured:
        return
    logging.basicConfig(level=_level_from_env(), format=LOG_FORMAT, stream=sys.stderr)
    _configured = True


def get_logger(name: Optional[str] = None) -> logging.Logger:
    """Logger for ``name`` (a module's ``__name__``), configuring logging on first use."""
    _configure_logging()
    return logging.getLogger(name or "arcorder")
