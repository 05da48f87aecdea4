"""Run configuration: data locations, thresholds, and frozen defaults.

Defaults resolve against the packaged data directory; the NORMKIT_DATA
environment variable points runs at an alternative directory with the
same layout (kitchen.rules, kitchen_dirty.scene, kitchen.scenario, and a
cases/ subdirectory).

A config file is a JSON object whose keys mirror RunConfig fields;
command-line flags override file values, which override defaults.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Optional

from .errors import ParseError, ValidationError
from .sme import ScoreWeights

__all__ = [
    "DATA_ENV", "DEFAULT_OPERATORS", "RunConfig",
    "default_data_dir", "build_config", "load_config_file",
]

DATA_ENV = "NORMKIT_DATA"

DEFAULT_OPERATORS = (
    "insert_alert_before_approach",
    "announce_intent",
    "reorient_grasp",
    "reorder_steps",
)

_POLICIES = ("strict", "permissive")
_OUTPUTS = ("text", "structured")


def default_data_dir() -> Path:
    env = os.environ.get(DATA_ENV)
    if env:
        return Path(env)
    return Path(__file__).resolve().parent / "data"


@dataclass
class RunConfig:
    rules: Path
    scene: Path
    cases: Path
    scenario: Path
    k: int = 3
    depth_limit: int = 4
    min_alpha: float = 0.5
    policy: str = "strict"
    output: str = "text"
    operators: tuple[str, ...] = DEFAULT_OPERATORS
    score_local: float = 1.0
    score_ancestor_bonus: float = 0.8

    def __post_init__(self):
        self.rules = Path(self.rules)
        self.scene = Path(self.scene)
        self.cases = Path(self.cases)
        self.scenario = Path(self.scenario)
        self.operators = tuple(self.operators)
        if self.k < 1:
            raise ValidationError(f"k must be >= 1, got {self.k}")
        if self.depth_limit < 0:
            raise ValidationError(
                f"depth_limit must be >= 0, got {self.depth_limit}")
        if not (0.0 <= self.min_alpha <= 1.0):
            raise ValidationError(
                f"min_alpha must lie in [0, 1], got {self.min_alpha}")
        if self.policy not in _POLICIES:
            raise ValidationError(f"policy must be one of {_POLICIES}")
        if self.output not in _OUTPUTS:
            raise ValidationError(f"output must be one of {_OUTPUTS}")

    @property
    def weights(self) -> ScoreWeights:
        return ScoreWeights(self.score_local, self.score_ancestor_bonus)


def load_config_file(path) -> dict:
    p = Path(path)
    try:
        data = json.loads(p.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON in config file: {exc.msg}",
                         line=exc.lineno, column=exc.colno, path=str(p))
    if not isinstance(data, dict):
        raise ParseError("config file must hold a JSON object", path=str(p))
    known = {f.name for f in fields(RunConfig)}
    unknown = set(data) - known
    if unknown:
        raise ParseError(
            f"unknown config keys: {sorted(unknown)}", path=str(p))
    return data


def build_config(config_file: Optional[dict] = None, **overrides) -> RunConfig:
    """Assemble a RunConfig: defaults, then file values, then overrides
    (override values of None are ignored)."""
    data = default_data_dir()
    values: dict = {
        "rules": data / "kitchen.rules",
        "scene": data / "kitchen_dirty.scene",
        "cases": data / "cases",
        "scenario": data / "kitchen.scenario",
    }
    if config_file:
        values.update(config_file)
    for key, value in overrides.items():
        if value is not None:
            values[key] = value
    return RunConfig(**values)
