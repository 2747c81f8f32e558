"""Run configuration: defaults, then a JSON file, then command-line overrides."""

from __future__ import annotations

import dataclasses
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .automaton import ValidationError, Way
from .env import action_space_size, step_limit
from .genetic import GaConfig, chromosome_length
from .languages import DEFAULT_MAX_LEN, LanguageId, LanguageProfile, profile
from .qlearn import QConfig

log = logging.getLogger(__name__)

ALGORITHMS = ("ga", "q", "random")
# per-run values live at the top level, not inside the algorithm blocks
_SHARED = ("seed", "max_len")


class ConfigError(ValueError):
    """Bad configuration: unknown keys, wrong types or out-of-range values."""


def _block_fields(cls) -> dict[str, dataclasses.Field]:
    return {f.name: f for f in dataclasses.fields(cls) if f.name not in _SHARED}


@dataclass
class RunConfig:
    language: LanguageId = LanguageId.L1
    algorithm: str = "ga"
    max_len: int = DEFAULT_MAX_LEN
    seed: int = 0
    episodes: int = 10_000
    output_dir: str = "runs"
    k: int | None = None
    way: str | None = None
    ga: dict[str, Any] = field(default_factory=dict)
    q: dict[str, Any] = field(default_factory=dict)

    @property
    def profile(self) -> LanguageProfile:
        prof = profile(self.language)
        if self.k is None and self.way is None:
            return prof
        return dataclasses.replace(
            prof,
            k=self.k if self.k is not None else prof.k,
            way=Way(self.way) if self.way is not None else prof.way,
        )

    def ga_config(self) -> GaConfig:
        return GaConfig(seed=self.seed, max_len=self.max_len, **self.ga)

    def q_config(self) -> QConfig:
        return QConfig(seed=self.seed, max_len=self.max_len, **self.q)

    def derived(self) -> dict[str, int]:
        prof = self.profile
        n_states = self.ga.get("n_states", GaConfig.n_states)
        mut = self.ga.get("max_mutations")
        if mut is None:
            mut = GaConfig(n_states=n_states).mutations_for(prof)
        return {
            "N": step_limit(self.max_len, prof.k),
            "A": action_space_size(prof.k, prof.way),
            "C": chromosome_length(n_states, prof.m),
            "max_mutations": mut,
        }

    def to_json(self) -> dict:
        doc = dataclasses.asdict(self)
        doc["language"] = LanguageId(self.language).value
        return doc


def _check_type(key: str, value, expected) -> Any:
    if expected is bool:
        if not isinstance(value, bool):
            raise ConfigError(f"{key}: expected true/false, got {value!r}")
        return value
    if expected is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{key}: expected an integer, got {value!r}")
        return value
    if expected is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{key}: expected a number, got {value!r}")
        return float(value)
    return value


_BLOCK_TYPES = {
    "ga": {"population_size": int, "n_states": int, "gamma": float, "training_set_size": int,
           "validation_size": int, "max_mutations": int, "max_generations": int,
           "stop_on_validation": bool},
    "q": {"gamma": float, "epsilon": float, "learning_rate": float, "batch_episodes": int,
          "target_sync_period": int, "max_env_steps": int, "buffer_capacity": int, "hidden": int,
          "head_hidden": int, "grad_clip": float, "history_window": int, "log_every": int,
          "eval_every": int, "eval_episodes": int, "target_rate": float},
}
_NULLABLE = {"ga.max_mutations", "q.grad_clip", "q.target_rate"}
_TOP_TYPES = {"max_len": int, "seed": int, "episodes": int, "output_dir": str,
              "k": int, "way": str, "language": str, "algorithm": str}


def _merge(base: RunConfig, doc: dict, source: str) -> None:
    for key, value in doc.items():
        if key in ("ga", "q"):
            if not isinstance(value, dict):
                raise ConfigError(f"{source}: {key} must be an object")
            allowed = _BLOCK_TYPES[key]
            block = getattr(base, key)
            for sub, v in value.items():
                if sub not in allowed:
                    raise ConfigError(f"{source}: unknown key {key}.{sub}")
                if v is None and f"{key}.{sub}" in _NULLABLE:
                    block[sub] = None
                else:
                    block[sub] = _check_type(f"{key}.{sub}", v, allowed[sub])
        elif key in _TOP_TYPES:
            if value is None and key in ("k", "way"):
                setattr(base, key, None)
            else:
                setattr(base, key, _check_type(key, value, _TOP_TYPES[key]))
        else:
            raise ConfigError(f"{source}: unknown key {key}")


def _validate(cfg: RunConfig) -> None:
    try:
        cfg.language = LanguageId(cfg.language)
    except ValueError:
        raise ConfigError(f"language: expected one of L1..L6, got {cfg.language!r}") from None
    if cfg.algorithm not in ALGORITHMS:
        raise ConfigError(f"algorithm: expected one of {ALGORITHMS}, got {cfg.algorithm!r}")
    if cfg.max_len < 0:
        raise ConfigError(f"max_len: must be >= 0, got {cfg.max_len}")
    if cfg.seed < 0:
        raise ConfigError(f"seed: must be >= 0, got {cfg.seed}")
    if cfg.episodes < 1:
        raise ConfigError(f"episodes: must be >= 1, got {cfg.episodes}")
    if cfg.k is not None and cfg.k < 1:
        raise ConfigError(f"k: must be >= 1, got {cfg.k}")
    if cfg.way is not None:
        try:
            Way(cfg.way)
        except ValueError:
            raise ConfigError(f"way: expected one-way or two-way, got {cfg.way!r}") from None
    checks = {
        "ga.population_size": lambda v: v >= 4 and v % 2 == 0,
        "ga.n_states": lambda v: v >= 1,
        "ga.gamma": lambda v: 0 < v <= 1,
        "ga.training_set_size": lambda v: v >= 1,
        "ga.validation_size": lambda v: v >= 1,
        "ga.max_mutations": lambda v: v is None or v >= 0,
        "ga.max_generations": lambda v: v >= 0,
        "q.gamma": lambda v: 0 < v <= 1,
        "q.epsilon": lambda v: 0 <= v <= 1,
        "q.learning_rate": lambda v: v > 0,
        "q.batch_episodes": lambda v: v >= 1,
        "q.target_sync_period": lambda v: v >= 1,
        "q.max_env_steps": lambda v: v >= 1,
        "q.buffer_capacity": lambda v: v >= 1,
        "q.hidden": lambda v: v >= 1,
        "q.head_hidden": lambda v: v >= 1,
        "q.grad_clip": lambda v: v is None or v > 0,
        "q.history_window": lambda v: v >= 1,
        "q.log_every": lambda v: v >= 1,
        "q.eval_every": lambda v: v >= 0,
        "q.eval_episodes": lambda v: v >= 1,
        "q.target_rate": lambda v: v is None or 0 <= v <= 1,
    }
    for name, ok in checks.items():
        block, key = name.split(".")
        values = getattr(cfg, block)
        if key in values and not ok(values[key]):
            raise ConfigError(f"{name}: value {values[key]!r} out of range")
    try:
        cfg.ga_config()
        cfg.q_config()
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path: str | Path | None = None, overrides: dict | None = None) -> RunConfig:
    """Build a :class:`RunConfig` from defaults, an optional JSON file and overrides.

    ``overrides`` uses the file's layout; dotted keys such as ``"q.epsilon"``
    address the algorithm blocks.
    """
    cfg = RunConfig()
    if path is not None:
        try:
            doc = json.loads(Path(path).read_text() or "{}")
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc.strerror or exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: not valid JSON ({exc})") from exc
        if not isinstance(doc, dict):
            raise ConfigError(f"{path}: top level must be an object")
        _merge(cfg, doc, str(path))
    if overrides:
        nested: dict[str, Any] = {}
        for key, value in overrides.items():
            if value is None:
                continue
            if "." in key:
                block, sub = key.split(".", 1)
                nested.setdefault(block, {})[sub] = value
            else:
                nested[key] = value
        _merge(cfg, nested, "flags")
    _validate(cfg)
    prof = cfg.profile
    base = profile(cfg.language)
    if (prof.k, prof.way) != (base.k, base.way):
        log.warning("overriding %s machine shape: k=%d %s (default k=%d %s)",
                    base.id.value, prof.k, prof.way.value, base.k, base.way.value)
    return cfg
