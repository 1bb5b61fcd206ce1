"""Engine configuration with file, environment and flag overrides.

Precedence: explicit overrides (CLI flags) > environment variables
(RULESEEK_<FIELD>) > JSON config file > built-in defaults.
"""
from __future__ import annotations

import dataclasses
import json
import os
from dataclasses import dataclass
from typing import Dict, Mapping, Optional

from .inference import STRATEGIES
from .query import LEFT_TO_RIGHT, RIGHT_TO_LEFT

ENV_PREFIX = "RULESEEK_"


@dataclass
class Config:
    corpus_dir: Optional[str] = None
    rules_file: Optional[str] = None
    cache_path: Optional[str] = None
    index_snapshot: Optional[str] = None
    theta: float = 0.2
    tau: float = 0.15
    max_depth: int = 8
    strategy: str = "rule_order"
    top_k: int = 10
    port: int = 8000
    direction: str = LEFT_TO_RIGHT
    decay: float = 0.5
    history_limit: int = 20
    session_ttl: float = 3600.0
    expansion_window: int = 4
    expansion_min_count: int = 1
    phrase_window: int = 8
    snippet_tokens: int = 12
    cache_capacity: int = 10_000
    cache_enabled: bool = True

    def __post_init__(self):
        if not 0 <= self.theta <= 1:
            raise ValueError(f"theta {self.theta} outside [0, 1]")
        if not 0 <= self.tau <= 1:
            raise ValueError(f"tau {self.tau} outside [0, 1]")
        if self.max_depth < 1:
            raise ValueError("max_depth must be >= 1")
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}")
        if self.direction not in (LEFT_TO_RIGHT, RIGHT_TO_LEFT):
            raise ValueError(f"unknown direction {self.direction!r}")
        if self.top_k < 1:
            raise ValueError("top_k must be >= 1")
        if not 0 < self.decay <= 1:
            raise ValueError("decay must be in (0, 1]")


_BOOL_TRUE = {"1", "true", "yes", "on"}
_BOOL_FALSE = {"0", "false", "no", "off"}


def _coerce(name: str, value: str, target_type) -> object:
    if target_type is bool:
        low = value.strip().lower()
        if low in _BOOL_TRUE:
            return True
        if low in _BOOL_FALSE:
            return False
        raise ValueError(f"{name}: cannot parse boolean from {value!r}")
    if target_type is int:
        return int(value)
    if target_type is float:
        return float(value)
    return value


def load_config(
    path: Optional[str] = None,
    env: Optional[Mapping[str, str]] = None,
    overrides: Optional[Mapping[str, object]] = None,
) -> Config:
    env = os.environ if env is None else env
    fields = {f.name: f for f in dataclasses.fields(Config)}
    data: Dict[str, object] = {}

    if path:
        with open(path, encoding="utf-8") as fh:
            file_data = json.load(fh)
        for key, value in file_data.items():
            if key not in fields:
                raise ValueError(f"unknown config key {key!r} in {path}")
            data[key] = value

    for name, field_def in fields.items():
        raw = env.get(ENV_PREFIX + name.upper())
        if raw is None:
            continue
        default = field_def.default
        if isinstance(default, bool):
            target = bool
        elif isinstance(default, int):
            target = int
        elif isinstance(default, float):
            target = float
        else:
            target = str
        data[name] = _coerce(name, raw, target)

    if overrides:
        for key, value in overrides.items():
            if value is None:
                continue
            if key not in fields:
                raise ValueError(f"unknown config override {key!r}")
            data[key] = value

    return Config(**data)
