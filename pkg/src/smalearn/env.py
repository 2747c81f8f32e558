"""Episodic recognition environment over a marked tape.

Actions are integers: ``ACCEPT`` (0), ``REJECT`` (1), and ``2 + head*d + j``
for moving ``head`` in the ``j``-th direction of ``way.directions``.  The
packing matches the head genes of :mod:`smalearn.genetic`, so head gene ``g``
is action ``2 + g``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .automaton import Direction, Tape, Way, clamp_move, new_tape
from .languages import DEFAULT_MAX_LEN, LanguageProfile, membership, sample_episode_input

ACCEPT = 0
REJECT = 1


@dataclass(frozen=True)
class RewardSpec:
    correct: float = 1.0
    wrong: float = -1.0
    wrong_before_end: float = -10.0
    late_reject: float = 0.1
    step: float = 0.0


REWARDS = RewardSpec()


def step_limit(max_len: int, k: int) -> int:
    """Actions allowed per episode: every head can sweep to the end marker and back."""
    if max_len < 0 or k < 1:
        raise ValueError(f"need max_len >= 0 and k >= 1, got ({max_len}, {k})")
    return (2 * max_len + 1) * k + 1


def action_space_size(k: int, way: Way | str) -> int:
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    return 2 + Way(way).d * k


def move_action(head: int, direction: Direction, way: Way) -> int:
    return 2 + head * way.d + way.directions.index(Direction(direction))


def decode_move(action: int, way: Way) -> tuple[int, Direction]:
    head, j = divmod(action - 2, way.d)
    return head, way.directions[j]


def action_name(action: int, way: Way) -> str:
    if action == ACCEPT:
        return "accept"
    if action == REJECT:
        return "reject"
    head, direction = decode_move(action, way)
    return f"move(h{head},{direction.name.lower()})"


@dataclass(frozen=True)
class Observation:
    symbol: int
    head: int
    direction: Direction


@dataclass(frozen=True)
class EpisodeConfig:
    profile: LanguageProfile
    max_len: int = DEFAULT_MAX_LEN

    @property
    def limit(self) -> int:
        return step_limit(self.max_len, self.profile.k)

    @property
    def n_actions(self) -> int:
        return action_space_size(self.profile.k, self.profile.way)


@dataclass
class EnvState:
    config: EpisodeConfig
    tape: Tape
    label: bool
    heads: list[int]
    actions_taken: int = 0
    end_seen: bool = False
    done: bool = False
    # per-head and per-direction Move counts, for head statistics
    head_moves: list[int] = field(default_factory=list)
    direction_moves: dict[Direction, int] = field(default_factory=dict)
    correct: bool | None = None


class EpisodeOver(RuntimeError):
    """Raised when acting on a finished episode."""


def start(config: EpisodeConfig, word: Sequence[int], label: bool | None = None) -> tuple[EnvState, Observation]:
    """Begin an episode on a given word (the label defaults to the oracle)."""
    prof = config.profile
    tape = new_tape(word, prof.alphabet)
    if label is None:
        label = membership(prof.id, tape.word)
    state = EnvState(
        config=config,
        tape=tape,
        label=bool(label),
        heads=[1] * prof.k,
        head_moves=[0] * prof.k,
        direction_moves={d: 0 for d in Direction},
    )
    obs = Observation(tape[1], 0, Direction.STAY)
    state.end_seen = obs.symbol == prof.alphabet.marker_end
    return state, obs


def reset(config: EpisodeConfig, rng: np.random.Generator) -> tuple[EnvState, Observation]:
    """Draw a fresh (word, label) and begin an episode on it."""
    word, label = sample_episode_input(config.profile, config.max_len, rng)
    return start(config, word, label)


def _terminal_reward(state: EnvState, accept: bool) -> float:
    if accept == state.label:
        state.correct = True
        if not accept and state.actions_taken == state.config.limit:
            return REWARDS.late_reject
        return REWARDS.correct
    state.correct = False
    return REWARDS.wrong if state.end_seen else REWARDS.wrong_before_end


def env_step(state: EnvState, action: int) -> tuple[EnvState, Observation | None, float, bool]:
    """Apply ``action``; ``state`` is updated in place and also returned.

    Running out of actions on a move counts as rejecting the word.
    """
    if state.done:
        raise EpisodeOver("episode already terminated")
    config = state.config
    if not 0 <= action < config.n_actions:
        raise ValueError(f"action {action} outside [0, {config.n_actions})")
    state.actions_taken += 1
    if action in (ACCEPT, REJECT):
        state.done = True
        return state, None, _terminal_reward(state, action == ACCEPT), True

    head, direction = decode_move(action, config.profile.way)
    state.heads[head] = clamp_move(state.heads[head], direction, len(state.tape) - 1)
    state.head_moves[head] += 1
    state.direction_moves[direction] += 1
    obs = Observation(state.tape[state.heads[head]], head, direction)
    if obs.symbol == config.profile.alphabet.marker_end:
        state.end_seen = True
    if state.actions_taken >= config.limit:
        state.done = True
        return state, obs, _terminal_reward(state, False), True
    return state, obs, REWARDS.step, False
