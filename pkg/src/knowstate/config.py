"""Experiment configuration: YAML file plus command-line overrides."""

from __future__ import annotations

import hashlib
import json
import math
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Union

import numpy as np
import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from .ensemble import PreparationSpec
from .protocols import ProtocolAParams, ProtocolBParams
from .quantum import InvalidStateError, parse_axis

Scenario = Literal["tomography", "dispute-a", "dispute-b", "sweep"]
ViewName = Literal["full", "basis_only", "none"]
SWEEP_KEYS = ("n", "delta", "alpha_deg", "theta_deg", "target_accuracy")


class ConfigError(Exception):
    """Invalid configuration; message carries the field path and line if known."""


class _Model(BaseModel):
    model_config = ConfigDict(extra="forbid")


class PrepConfig(_Model):
    axis: Union[Literal["x", "y", "z"], List[float]] = "z"
    bias: float = Field(0.5, ge=0.0, le=1.0)
    count: int = Field(100, ge=1)
    seed: Optional[int] = Field(None, ge=0, lt=2 ** 64)

    @field_validator("axis")
    @classmethod
    def _axis_ok(cls, v):
        try:
            parse_axis(v)
        except (InvalidStateError, ValueError) as exc:
            raise ValueError(f"invalid axis: {exc}") from None
        return v

    def to_spec(self, seed: int) -> PreparationSpec:
        return PreparationSpec(parse_axis(self.axis), self.count, self.bias,
                               self.seed if self.seed is not None else seed)


class ProtocolAConfig(_Model):
    alpha_deg: float = Field(5.0, gt=0.0, lt=90.0)
    threshold: float = Field(1.0, gt=0.5, le=1.0)


class ProtocolBConfig(_Model):
    delta: float = Field(0.1, gt=0.0, lt=0.5)
    charles_target_accuracy: float = Field(1.0, ge=0.5, le=1.0)
    theta_deg: Optional[float] = Field(None, ge=0.0, le=180.0)


class SweepConfig(_Model):
    protocol: Literal["a", "b"] = "b"
    grid: Dict[str, List[float]] = Field(default_factory=dict)

    @field_validator("grid")
    @classmethod
    def _grid_ok(cls, v):
        for key, values in v.items():
            if key not in SWEEP_KEYS:
                raise ValueError(f"unknown sweep parameter {key!r}; expected one of {SWEEP_KEYS}")
            if not values:
                raise ValueError(f"sweep parameter {key!r} has no values")
        return v


class OutputConfig(_Model):
    path: Optional[str] = None
    format: Literal["table", "structured"] = "structured"


class ExperimentConfig(_Model):
    scenario: Scenario
    seed: int = Field(0, ge=0, lt=2 ** 64)
    trials: int = Field(1000, ge=1)
    preparation: PrepConfig = Field(default_factory=PrepConfig)
    compare: Optional[PrepConfig] = None
    alice: ViewName = "basis_only"
    charles: ViewName = "full"
    protocol_a: ProtocolAConfig = Field(default_factory=ProtocolAConfig)
    protocol_b: ProtocolBConfig = Field(default_factory=ProtocolBConfig)
    sweep: SweepConfig = Field(default_factory=SweepConfig)
    transcripts: int = Field(1, ge=0)
    output: OutputConfig = Field(default_factory=OutputConfig)

    def digest(self) -> str:
        """SHA-256 of the canonical JSON form, output settings excluded."""
        body = self.model_dump(mode="json", exclude={"output"})
        text = json.dumps(body, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode()).hexdigest()

    def spec_seed(self, index: int) -> int:
        """Default seed of the ``index``-th preparation, derived from the master seed."""
        ss = np.random.SeedSequence(self.seed, spawn_key=(1000 + index,))
        return int(ss.generate_state(1, dtype=np.uint64)[0])

    def specs(self) -> list[PreparationSpec]:
        preps = [self.preparation] + ([self.compare] if self.compare is not None else [])
        return [p.to_spec(self.spec_seed(i)) for i, p in enumerate(preps)]

    def params_a(self) -> ProtocolAParams:
        return ProtocolAParams(self.preparation.count, math.radians(self.protocol_a.alpha_deg),
                               self.protocol_a.threshold)

    def params_b(self) -> ProtocolBParams:
        return ProtocolBParams(self.preparation.count, self.protocol_b.delta,
                               self.protocol_b.charles_target_accuracy)


def _node_line(node: Optional[yaml.Node], loc: tuple) -> Optional[int]:
    """1-based line of the YAML node at ``loc``, or of its nearest parent."""
    line = None
    for key in loc:
        if node is None:
            break
        line = node.start_mark.line + 1
        if isinstance(node, yaml.MappingNode):
            node = next((v for k, v in node.value if k.value == key), None)
        elif isinstance(node, yaml.SequenceNode) and isinstance(key, int) and key < len(node.value):
            node = node.value[key]
        else:
            node = None
    if node is not None:
        line = node.start_mark.line + 1
    return line


def _format_errors(exc: ValidationError, root: Optional[yaml.Node], source: str) -> str:
    parts = []
    for err in exc.errors():
        loc = tuple(err["loc"])
        field = ".".join(str(p) for p in loc) or "<root>"
        line = _node_line(root, loc) if root is not None else None
        where = f"{source}:{line}: " if line else f"{source}: "
        parts.append(f"{where}{field}: {err['msg']}")
    return "\n".join(parts)


def _set_path(data: dict, dotted: str, value: Any) -> None:
    keys = dotted.split(".")
    cur = data
    for k in keys[:-1]:
        cur = cur.setdefault(k, {})
        if not isinstance(cur, dict):
            raise ConfigError(f"override {dotted!r}: {k!r} is not a mapping")
    cur[keys[-1]] = value


def load_config(path: Optional[Union[str, Path]] = None,
                overrides: Optional[Dict[str, Any]] = None) -> ExperimentConfig:
    """Read a YAML config (optional) and apply dotted-key overrides; overrides win."""
    data: dict = {}
    root = None
    source = str(path) if path is not None else "<flags>"
    if path is not None:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"{path}: cannot read config: {exc.strerror}") from None
        try:
            root = yaml.compose(text)
            data = yaml.safe_load(text) or {}
        except yaml.YAMLError as exc:
            mark = getattr(exc, "problem_mark", None)
            where = f"{path}:{mark.line + 1}" if mark is not None else str(path)
            raise ConfigError(f"{where}: YAML syntax error: {getattr(exc, 'problem', exc)}") from None
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: top level must be a mapping")
    for key, value in (overrides or {}).items():
        if value is not None:
            _set_path(data, key, value)
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(_format_errors(exc, root, source)) from None
