"""
Configuration management for the arcorder toolkit.

This module centralizes how configuration is loaded, validated, and exposed to
the rest of the codebase. A user-provided ``config.yaml`` is layered on top of
built-in defaults and the merged result is validated with Pydantic models so
configuration errors surface with clear messages at startup.

Configuration precedence:
1. Built-in defaults defined in ``DEFAULT_CONFIG``.
2. Values provided in ``config.yaml`` (or a custom path passed to ``load_config``),
   merged over the defaults.
3. Per-invocation overrides (CLI flags) merged over the file values.
4. Pydantic model defaults for any fields still unset after the merge.
"""

from __future__ import annotations

import hashlib
from copy import deepcopy
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional

import yaml
from pydantic import BaseModel, Field, ValidationError, field_validator, model_validator

from .logger import get_logger


class ConfigurationError(RuntimeError):
    """Raised when configuration cannot be loaded or validated."""


STAGE_NAMES = ("greedy", "refine", "scc-blocks", "flat", "scc-global")

DEFAULT_CONFIG: Dict[str, Any] = {
    "input": {
        "source_column": "from",
        "target_column": "to",
        "weight_column": "weight",
        "header": None,
        "precision": 2,
    },
    "greedy": {"seed": 0},
    "refine": {"max_block": 2000},
    "scc": {"block_size": 50, "perm_limit": 9},
    "flat": {"arity": 4, "level": None, "start": None, "end": None},
    "oracle": {"node_limit": 10, "mode": "enumerate"},
    "metrics": {"bins": 50},
    "pipeline": {
        "stages": [
            "greedy",
            "refine",
            {"name": "scc-blocks", "offset": 0},
            {"name": "scc-blocks", "offset": "half"},
            "flat",
            "scc-global",
        ],
        "max_sweeps": 20,
        "time_limit_seconds": None,
        "checkpoint": None,
    },
}


def _merge_layer(base: Dict[str, Any], layer: Dict[str, Any]) -> Dict[str, Any]:
    """
    Return ``base`` with ``layer`` applied on top; neither input is mutated.

    Nested sections merge key by key. A ``None`` in ``layer`` means "not set"
    (an omitted CLI flag or an empty YAML key) and keeps the base value. Lists
    such as the stage schedule are replaced as a whole.
    """
    merged = deepcopy(base)
    for key, value in layer.items():
        if value is None:
            continue
        current = merged.get(key)
        if isinstance(current, dict) and isinstance(value, dict):
            merged[key] = _merge_layer(current, value)
        else:
            merged[key] = deepcopy(value)
    return merged


def _read_yaml_mapping(path: Path) -> Dict[str, Any]:
    """Parse an ordering configuration file; an empty file is an empty mapping."""
    try:
        with path.open("r", encoding="utf-8") as handle:
            data = yaml.safe_load(handle)
    except yaml.YAMLError as exc:
        raise ConfigurationError(f"{path}: not valid YAML ({exc})") from exc
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigurationError(
            f"{path}: expected a mapping of sections (input, greedy, refine, ...), "
            f"got {type(data).__name__}"
        )
    return data


class InputModel(BaseModel):
    """Pydantic model for the input (edge-list CSV) section."""

    source_column: str | int = "from"
    target_column: str | int = "to"
    weight_column: str | int = "weight"
    header: Optional[bool] = None
    precision: int = Field(default=2, ge=0, le=9)

    @model_validator(mode="after")
    def validate_columns(self) -> "InputModel":
        columns = [self.source_column, self.target_column, self.weight_column]
        if len(set(map(str, columns))) != 3:
            raise ValueError("source, target and weight columns must be distinct")
        for column in columns:
            if isinstance(column, int) and column < 0:
                raise ValueError("column positions must be non-negative")
        return self


class GreedyModel(BaseModel):
    seed: int = Field(default=0, ge=0)


class RefineModel(BaseModel):
    max_block: int = Field(default=2000, ge=0)


class SccModel(BaseModel):
    block_size: int = Field(default=50, ge=2)
    perm_limit: int = Field(default=9, ge=1, le=10)


class FlatModel(BaseModel):
    arity: int = Field(default=4, ge=2, le=8)
    level: Optional[int] = Field(default=None, ge=1)
    start: Optional[int] = Field(default=None, ge=0)
    end: Optional[int] = Field(default=None, ge=0)

    @model_validator(mode="after")
    def validate_interval(self) -> "FlatModel":
        if self.start is not None and self.end is not None and self.start > self.end:
            raise ValueError("flat.start cannot exceed flat.end")
        return self


class OracleModel(BaseModel):
    node_limit: int = Field(default=10, ge=1, le=20)
    mode: Literal["enumerate", "dp"] = "enumerate"


class MetricsConfigModel(BaseModel):
    """Configuration for back-edge distribution output."""

    bins: int = Field(default=50, ge=1)


class StageModel(BaseModel):
    """One entry of the pipeline schedule, with optional per-stage overrides."""

    name: Literal["greedy", "refine", "scc-blocks", "flat", "scc-global"]
    offset: int | Literal["half"] | None = None
    arity: Optional[int] = Field(default=None, ge=2, le=8)
    level: Optional[int] = Field(default=None, ge=1)

    @field_validator("offset")
    @classmethod
    def validate_offset(cls, value):
        if isinstance(value, int) and value < 0:
            raise ValueError("offset must be non-negative")
        return value

    @model_validator(mode="after")
    def validate_parameters(self) -> "StageModel":
        if self.offset is not None and self.name != "scc-blocks":
            raise ValueError(f"offset is only valid for scc-blocks, not {self.name}")
        if (self.arity is not None or self.level is not None) and self.name != "flat":
            raise ValueError(f"arity/level are only valid for flat, not {self.name}")
        return self

    @property
    def label(self) -> str:
        """Stable node label used in the workflow and in history records."""
        if self.name == "scc-blocks":
            return f"scc-blocks@{self.offset if self.offset is not None else 0}"
        if self.name == "flat" and self.arity is not None:
            return f"flat@x{self.arity}"
        return self.name


class PipelineModel(BaseModel):
    stages: List[StageModel] = Field(default_factory=list)
    max_sweeps: int = Field(default=20, ge=1)
    time_limit_seconds: Optional[float] = Field(default=None, gt=0)
    checkpoint: Optional[str] = None

    @field_validator("stages", mode="before")
    @classmethod
    def coerce_stage_names(cls, value):
        if not isinstance(value, list):
            return value
        return [{"name": entry} if isinstance(entry, str) else entry for entry in value]

    @model_validator(mode="after")
    def validate_stages(self) -> "PipelineModel":
        if not self.stages:
            raise ValueError("pipeline.stages cannot be empty")
        return self


class ProjectConfigModel(BaseModel):
    """Top-level Pydantic model for project configuration."""

    input: InputModel = Field(default_factory=InputModel)
    greedy: GreedyModel = Field(default_factory=GreedyModel)
    refine: RefineModel = Field(default_factory=RefineModel)
    scc: SccModel = Field(default_factory=SccModel)
    flat: FlatModel = Field(default_factory=FlatModel)
    oracle: OracleModel = Field(default_factory=OracleModel)
    metrics: MetricsConfigModel = Field(default_factory=MetricsConfigModel)
    pipeline: PipelineModel = Field(default_factory=PipelineModel)


class OrderingConfig:
    """Configuration class for the arcorder passes and pipeline."""

    def __init__(
        self,
        config_path: str | Path | None = None,
        overrides: Dict[str, Any] | None = None,
    ):
        """
        Initialize configuration.

        Args:
            config_path: Path to YAML configuration file. If None, uses defaults.
            overrides: Nested mapping merged over the file values (CLI flags).
        """
        self.config_path = Path(config_path).expanduser() if config_path else None
        self._overrides = overrides or {}
        self._config = self._load_config()

    def _load_config(self) -> ProjectConfigModel:
        """Load configuration from file, merge with defaults, and validate."""
        user_config: Dict[str, Any] = {}

        if self.config_path and self.config_path.exists():
            user_config = _read_yaml_mapping(self.config_path)

        merged = _merge_layer(_merge_layer(DEFAULT_CONFIG, user_config), self._overrides)

        try:
            return ProjectConfigModel.model_validate(merged)
        except ValidationError as exc:
            detail = exc.errors()
            location = self.config_path or "built-in defaults"
            raise ConfigurationError(
                f"Invalid configuration in {location}: {detail}"
            ) from exc

    @property
    def model(self) -> ProjectConfigModel:
        """Return the validated configuration model."""
        return self._config

    @property
    def input(self) -> InputModel:
        return self._config.input

    @property
    def seed(self) -> int:
        """Get the RNG seed used by the greedy seed pass."""
        return self._config.greedy.seed

    @property
    def max_block(self) -> int:
        return self._config.refine.max_block

    @property
    def block_size(self) -> int:
        return self._config.scc.block_size

    @property
    def perm_limit(self) -> int:
        return self._config.scc.perm_limit

    @property
    def flat(self) -> FlatModel:
        return self._config.flat

    @property
    def oracle(self) -> OracleModel:
        return self._config.oracle

    @property
    def bins(self) -> int:
        return self._config.metrics.bins

    @property
    def pipeline(self) -> PipelineModel:
        return self._config.pipeline

    def resolve_offset(self, stage: StageModel) -> int:
        """Return the concrete scc-blocks offset for a schedule entry."""
        if stage.offset == "half":
            return self.block_size // 2
        return stage.offset or 0

    def config_hash(self) -> str:
        """SHA-256 over the canonical JSON dump of the validated model."""
        payload = self._config.model_dump_json(exclude={"pipeline": {"checkpoint"}})
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()


logger = get_logger(__name__)


def default_config_path() -> Path:
    """Return the default config file location inside the repository."""
    return Path(__file__).resolve().parents[2] / "config.yaml"


def load_config(
    config_path: str | Path | None = None,
    overrides: Dict[str, Any] | None = None,
) -> OrderingConfig:
    """
    Build a new OrderingConfig instance from the provided path.

    Args:
        config_path: Optional override path. When omitted, uses ``config.yaml`` at
            the project root.
        overrides: Optional nested mapping applied over the file values.
    """
    resolved_path = (
        Path(config_path).expanduser() if config_path else default_config_path()
    )
    logger.debug("Loading configuration from %s", resolved_path)
    return OrderingConfig(resolved_path, overrides=overrides)
