"""Simple multi-head automata (SMA) and their deterministic simulator.

An SMA assigns every state one head and one direction.  At each step the
assigned head moves first, then the symbol under it is read, then the
transition on that symbol fires.  A missing transition halts the machine and
the verdict is the accept flag of the state it halted in.

Tapes are integer arrays.  With an alphabet of ``s`` input symbols, input
symbols have ids ``0..s-1``, the start marker is ``s`` and the end marker is
``s+1``.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np


class ValidationError(ValueError):
    """Raised for malformed words, machines or chromosomes."""


class Direction(enum.IntEnum):
    LEFT = -1
    STAY = 0
    RIGHT = 1


class Way(str, enum.Enum):
    ONE = "one-way"
    TWO = "two-way"

    @property
    def d(self) -> int:
        """Number of available directions."""
        return 2 if self is Way.ONE else 3

    @property
    def directions(self) -> tuple[Direction, ...]:
        """Directions in packing order, used by both head genes and actions."""
        if self is Way.ONE:
            return (Direction.STAY, Direction.RIGHT)
        return (Direction.LEFT, Direction.STAY, Direction.RIGHT)


class Verdict(str, enum.Enum):
    ACCEPTED = "accepted"
    REJECTED = "rejected"
    TIMEOUT = "timeout"


@dataclass(frozen=True)
class Alphabet:
    """Input symbols plus the two tape markers."""

    input_symbols: tuple[str, ...]

    def __post_init__(self):
        if len(self.input_symbols) < 1:
            raise ValidationError("an alphabet needs at least one input symbol")
        if len(set(self.input_symbols)) != len(self.input_symbols):
            raise ValidationError(f"duplicate symbols in {self.input_symbols!r}")

    @property
    def size(self) -> int:
        return len(self.input_symbols)

    @property
    def marker_start(self) -> int:
        return self.size

    @property
    def marker_end(self) -> int:
        return self.size + 1

    @property
    def m(self) -> int:
        """Total symbol count including both markers."""
        return self.size + 2

    def char(self, symbol: int) -> str:
        if symbol == self.marker_start:
            return "$"
        if symbol == self.marker_end:
            return "#"
        return self.input_symbols[symbol]

    def parse(self, text: str) -> tuple[int, ...]:
        """Convert a word's text form (one character per symbol) to ids."""
        try:
            return tuple(self.input_symbols.index(c) for c in text)
        except ValueError:
            raise ValidationError(
                f"word {text!r} is not over alphabet {''.join(self.input_symbols)!r}"
            ) from None

    def format(self, word: Sequence[int]) -> str:
        return "".join(self.input_symbols[s] for s in word)

    def check_word(self, word: Sequence[int]) -> tuple[int, ...]:
        word = tuple(int(s) for s in word)
        for s in word:
            if not 0 <= s < self.size:
                raise ValidationError(
                    f"symbol id {s} is not an input symbol of {self.input_symbols!r}"
                )
        return word


@dataclass(frozen=True)
class Tape:
    """A word bracketed by the start marker (index 0) and end marker (index n+1)."""

    cells: tuple[int, ...]
    alphabet: Alphabet

    @property
    def n(self) -> int:
        """Input length."""
        return len(self.cells) - 2

    @property
    def word(self) -> tuple[int, ...]:
        return self.cells[1:-1]

    def __len__(self) -> int:
        return len(self.cells)

    def __getitem__(self, i: int) -> int:
        return self.cells[i]


def new_tape(word: Sequence[int] | str, alphabet: Alphabet) -> Tape:
    """Build the marked tape for ``word``.

    Raises:
        ValidationError: if a symbol is outside the input alphabet.
    """
    if isinstance(word, str):
        word = alphabet.parse(word)
    word = alphabet.check_word(word)
    return Tape((alphabet.marker_start, *word, alphabet.marker_end), alphabet)


def clamp_move(position: int, direction: int, last: int) -> int:
    """Move one cell, staying put rather than leaving ``[0, last]``."""
    return min(max(position + int(direction), 0), last)


@dataclass(frozen=True)
class SmaSpec:
    """A discrete simple multi-head automaton.

    ``delta[q][c]`` is the target state on symbol ``c`` or ``None``;
    ``head_assign[q]`` is the ``(direction, head)`` pair acting in state ``q``.
    The initial state is always 0.
    """

    k: int
    way: Way
    accept: tuple[bool, ...]
    delta: tuple[tuple[int | None, ...], ...]
    head_assign: tuple[tuple[Direction, int], ...]

    def __post_init__(self):
        object.__setattr__(self, "way", Way(self.way))
        object.__setattr__(self, "accept", tuple(bool(a) for a in self.accept))
        object.__setattr__(
            self,
            "delta",
            tuple(tuple(None if t is None else int(t) for t in row) for row in self.delta),
        )
        object.__setattr__(
            self,
            "head_assign",
            tuple((Direction(int(d)), int(h)) for d, h in self.head_assign),
        )
        n = len(self.accept)
        if n < 1:
            raise ValidationError("an SMA needs at least one state")
        if self.k < 1:
            raise ValidationError(f"head count must be positive, got {self.k}")
        if len(self.delta) != n or len(self.head_assign) != n:
            raise ValidationError("accept, delta and head_assign must have one entry per state")
        m = len(self.delta[0])
        if m < 3 or any(len(row) != m for row in self.delta):
            raise ValidationError("delta rows must all cover the same m >= 3 symbols")
        for q, row in enumerate(self.delta):
            for c, t in enumerate(row):
                if t is not None and not 0 <= t < n:
                    raise ValidationError(f"delta[{q}][{c}] = {t} is not a state index")
        for q, (d, h) in enumerate(self.head_assign):
            if not 0 <= h < self.k:
                raise ValidationError(f"state {q} assigns head {h}, machine has {self.k}")
            if d not in self.way.directions:
                raise ValidationError(f"state {q} assigns {d.name} in a {self.way.value} machine")

    @property
    def n(self) -> int:
        return len(self.accept)

    @property
    def m(self) -> int:
        return len(self.delta[0])

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "k": self.k,
            "way": self.way.value,
            "accept": [int(a) for a in self.accept],
            "delta": [list(row) for row in self.delta],
            "head_assign": [[d.name.lower(), h] for d, h in self.head_assign],
        }

    @classmethod
    def from_json(cls, doc: dict) -> "SmaSpec":
        try:
            spec = cls(
                k=int(doc["k"]),
                way=Way(doc["way"]),
                accept=tuple(bool(a) for a in doc["accept"]),
                delta=tuple(tuple(row) for row in doc["delta"]),
                head_assign=tuple(
                    (Direction[str(d).upper()], int(h)) for d, h in doc["head_assign"]
                ),
            )
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, ValidationError):
                raise
            raise ValidationError(f"malformed SMA document: {exc}") from exc
        if "n" in doc and int(doc["n"]) != spec.n:
            raise ValidationError(f"document says n={doc['n']} but lists {spec.n} states")
        return spec

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), indent=1) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "SmaSpec":
        return cls.from_json(json.loads(Path(path).read_text()))


@dataclass
class MachineConfig:
    state: int
    heads: list[int]
    steps: int = 0

    @classmethod
    def initial(cls, spec: SmaSpec) -> "MachineConfig":
        return cls(state=0, heads=[1] * spec.k, steps=0)


@dataclass
class Trace:
    """Per-step movement statistics of a run."""

    head_moves: list[int]
    direction_moves: dict[Direction, int] = field(
        default_factory=lambda: {d: 0 for d in Direction}
    )


@dataclass
class RunOutcome:
    verdict: Verdict
    trace: Trace
    steps_used: int
    final: MachineConfig


def step(spec: SmaSpec, config: MachineConfig, tape: Tape) -> tuple[MachineConfig, bool]:
    """Apply one move-read-transition cycle.

    Returns the new configuration and ``True`` if the machine continues,
    ``False`` if no transition was available (halt).  The input config is
    not modified.
    """
    direction, head = spec.head_assign[config.state]
    heads = list(config.heads)
    heads[head] = clamp_move(heads[head], direction, len(tape) - 1)
    target = spec.delta[config.state][tape[heads[head]]]
    if target is None:
        return MachineConfig(config.state, heads, config.steps), False
    return MachineConfig(target, heads, config.steps + 1), True


def run(spec: SmaSpec, tape: Tape, limit: int) -> RunOutcome:
    """Run ``spec`` on ``tape`` from the initial configuration.

    The trace counts one move per transition taken, so both groups of the
    trace sum to ``steps_used``.
    """
    if limit < 1:
        raise ValueError(f"limit must be >= 1, got {limit}")
    if spec.m != tape.alphabet.m:
        raise ValidationError(f"machine reads {spec.m} symbols, tape has {tape.alphabet.m}")
    config = MachineConfig.initial(spec)
    trace = Trace(head_moves=[0] * spec.k)
    while config.steps < limit:
        direction, head = spec.head_assign[config.state]
        config, running = step(spec, config, tape)
        if not running:
            verdict = Verdict.ACCEPTED if spec.accept[config.state] else Verdict.REJECTED
            return RunOutcome(verdict, trace, config.steps, config)
        trace.head_moves[head] += 1
        trace.direction_moves[direction] += 1
    return RunOutcome(Verdict.TIMEOUT, trace, config.steps, config)


def accepts(spec: SmaSpec, word: Sequence[int] | str, alphabet: Alphabet, limit: int = 10_000) -> bool:
    """Convenience: ``True`` iff the machine halts accepting on ``word``."""
    return run(spec, new_tape(word, alphabet), limit).verdict is Verdict.ACCEPTED
