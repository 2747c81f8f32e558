"""Frozen-agent evaluation: metric tables, head statistics and data files."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Protocol, Sequence

import numpy as np

from .automaton import Direction, Way
from .env import EpisodeConfig, Observation, env_step, reset
from .languages import DEFAULT_MAX_LEN, LanguageProfile

MAX_HEADS_COLUMNS = 3
CSV_COLUMNS = ("model", "avg_reward", "prediction_rate", "avg_episode_length",
               "h1", "h2", "h3", "left", "stay", "right")


class Policy(Protocol):
    def reset(self) -> None: ...

    def act(self, obs: Observation) -> int: ...


class RandomPolicy:
    """Uniform over all actions, blind to observations."""

    def __init__(self, n_actions: int, rng: np.random.Generator):
        if n_actions < 3:
            raise ValueError(f"need at least 3 actions, got {n_actions}")
        self.n_actions = n_actions
        self.rng = rng

    def reset(self) -> None:
        pass

    def act(self, obs: Observation) -> int:
        return int(self.rng.integers(self.n_actions))


def random_policy(n_actions: int, rng: np.random.Generator) -> RandomPolicy:
    return RandomPolicy(n_actions, rng)


@dataclass
class EvalReport:
    avg_reward: float
    prediction_rate: float
    avg_episode_length: float
    episodes: int


@dataclass
class HeadStats:
    """Move counts per head and per direction, with fractions derived from them."""

    head_counts: list[int]
    direction_counts: dict[str, int]
    way: str

    @property
    def moves(self) -> int:
        return sum(self.head_counts)

    def head_fractions(self) -> list[float]:
        total = self.moves
        return [c / total if total else 0.0 for c in self.head_counts]

    def direction_fractions(self) -> dict[str, float]:
        total = sum(self.direction_counts.values())
        return {d: (c / total if total else 0.0) for d, c in self.direction_counts.items()}

    @classmethod
    def from_counts(cls, head_counts: Sequence[int], direction_counts, way: Way) -> "HeadStats":
        """``direction_counts`` maps Direction to count, or is indexed by ``direction + 1``."""
        if isinstance(direction_counts, dict):
            by_dir = {Direction(d): int(c) for d, c in direction_counts.items()}
        else:
            by_dir = {d: int(direction_counts[int(d) + 1]) for d in Direction}
        return cls(
            head_counts=[int(c) for c in head_counts],
            direction_counts={d.name.lower(): by_dir.get(d, 0) for d in Way(way).directions},
            way=Way(way).value,
        )


def evaluate(policy: Policy, prof: LanguageProfile, episodes: int, rng: np.random.Generator,
             max_len: int = DEFAULT_MAX_LEN) -> tuple[EvalReport, HeadStats]:
    """Run ``policy`` on fresh episodes; rewards are undiscounted."""
    if episodes < 1:
        raise ValueError(f"episodes must be >= 1, got {episodes}")
    config = EpisodeConfig(prof, max_len)
    total_reward = 0.0
    hits = 0
    steps = 0
    head_counts = np.zeros(prof.k, dtype=np.int64)
    dir_counts = {d: 0 for d in Direction}
    for _ in range(episodes):
        state, obs = reset(config, rng)
        policy.reset()
        done = False
        while not done:
            state, obs, reward, done = env_step(state, policy.act(obs))
            total_reward += reward
        hits += bool(state.correct)
        steps += state.actions_taken
        head_counts += state.head_moves
        for d, c in state.direction_moves.items():
            dir_counts[d] += c
    report = EvalReport(total_reward / episodes, hits / episodes, steps / episodes, episodes)
    return report, HeadStats.from_counts(head_counts, dir_counts, prof.way)


def _row(model: str, report: EvalReport, stats: HeadStats) -> dict[str, str]:
    row = {
        "model": model,
        "avg_reward": repr(float(report.avg_reward)),
        "prediction_rate": repr(float(report.prediction_rate)),
        "avg_episode_length": repr(float(report.avg_episode_length)),
    }
    heads = stats.head_fractions()
    for i in range(MAX_HEADS_COLUMNS):
        # columns for heads the machine does not have stay blank
        row[f"h{i + 1}"] = repr(heads[i]) if i < len(heads) else ""
    dirs = stats.direction_fractions()
    for name in ("left", "stay", "right"):
        row[name] = repr(dirs[name]) if name in dirs else ""
    return row


def export_report(report: EvalReport, stats: HeadStats, path: str | Path, fmt: str = "csv",
                  model: str = "model") -> Path:
    """Write one evaluation as CSV (one row) or JSON; output is byte-stable."""
    path = Path(path)
    try:
        if fmt == "csv":
            with path.open("w", newline="") as fh:
                writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS, lineterminator="\n")
                writer.writeheader()
                writer.writerow(_row(model, report, stats))
        elif fmt == "json":
            doc = {
                "model": model,
                "report": asdict(report),
                "stats": {
                    "head_counts": stats.head_counts,
                    "direction_counts": stats.direction_counts,
                    "head_fractions": stats.head_fractions(),
                    "direction_fractions": stats.direction_fractions(),
                    "way": stats.way,
                },
            }
            path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
        else:
            raise ValueError(f"unknown report format {fmt!r}; expected csv or json")
    except OSError as exc:
        raise OSError(f"cannot write report to {path}: {exc.strerror or exc}") from exc
    return path


def read_report_csv(path: str | Path) -> list[dict]:
    """Parse a CSV written by :func:`export_report`; blank cells become ``None``."""
    rows = []
    with Path(path).open(newline="") as fh:
        for raw in csv.DictReader(fh):
            row = {"model": raw["model"]}
            for key in CSV_COLUMNS[1:]:
                row[key] = float(raw[key]) if raw[key] != "" else None
            rows.append(row)
    return rows


def write_curve(xs: Sequence[float], ys: Sequence[float], path: str | Path) -> None:
    """Two-column whitespace-separated x/y data for plotting."""
    if len(xs) != len(ys):
        raise ValueError("curve needs equally many x and y values")
    lines = [f"{x!r} {y!r}" for x, y in zip(xs, ys) if not (isinstance(y, float) and math.isnan(y))]
    Path(path).write_text("\n".join(lines) + "\n")
