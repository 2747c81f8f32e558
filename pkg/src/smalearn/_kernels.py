"""Compiled episode loop for chromosome evaluation.

This mirrors ``env.env_step`` driven by the SMA adapter policy, operating
directly on gene arrays.  ``tests/test_genetic.py`` checks it against the
reference Python path episode by episode.
"""

import numba
import numpy as np

from .env import REWARDS

_CORRECT = REWARDS.correct
_WRONG = REWARDS.wrong
_WRONG_EARLY = REWARDS.wrong_before_end
_LATE = REWARDS.late_reject


@numba.njit(cache=True)
def _episode(genes, n, m, d, dir_values, tape, length, label, limit, end_sym, heads, head_counts, dir_counts):
    # returns (reward, actions_taken, correct)
    for i in range(heads.shape[0]):
        heads[i] = 1
    last = length + 1
    end_seen = tape[1] == end_sym
    q = 0
    actions = 0
    head_base = n * m
    accept_base = head_base + n
    while True:
        g = genes[head_base + q]
        h = g // d
        j = g % d
        actions += 1
        pos = heads[h] + dir_values[j]
        if pos < 0:
            pos = 0
        elif pos > last:
            pos = last
        heads[h] = pos
        head_counts[h] += 1
        dir_counts[dir_values[j] + 1] += 1
        sym = tape[pos]
        if sym == end_sym:
            end_seen = True
        if actions >= limit:
            # timeout is an implicit reject
            if not label:
                return _LATE, actions, True
            return (_WRONG if end_seen else _WRONG_EARLY), actions, False
        t = genes[q * m + sym]
        if t > 0:
            q = t - 1
            continue
        actions += 1
        verdict = genes[accept_base + q] == 1
        if verdict == label:
            if not verdict and actions == limit:
                return _LATE, actions, True
            return _CORRECT, actions, True
        return (_WRONG if end_seen else _WRONG_EARLY), actions, False


@numba.njit(cache=True)
def run_episodes(genes, n, m, k, d, dir_values, tapes, lengths, labels, limit, end_sym):
    """Play one adapter episode per tape; returns per-episode arrays and move counts."""
    count = tapes.shape[0]
    rewards = np.empty(count)
    steps = np.empty(count, dtype=np.int64)
    correct = np.empty(count, dtype=np.bool_)
    heads = np.empty(k, dtype=np.int64)
    head_counts = np.zeros(k, dtype=np.int64)
    dir_counts = np.zeros(3, dtype=np.int64)
    for e in range(count):
        r, a, c = _episode(genes, n, m, d, dir_values, tapes[e], lengths[e], labels[e],
                           limit, end_sym, heads, head_counts, dir_counts)
        rewards[e] = r
        steps[e] = a
        correct[e] = c
    return rewards, steps, correct, head_counts, dir_counts


@numba.njit(cache=True)
def population_fitness(population, n, m, k, d, dir_values, tapes, lengths, labels, limit, end_sym, gamma):
    """Discounted fitness and correct-answer count for each row of ``population``."""
    size = population.shape[0]
    fitness = np.empty(size)
    n_correct = np.empty(size, dtype=np.int64)
    heads = np.empty(k, dtype=np.int64)
    head_counts = np.zeros(k, dtype=np.int64)
    dir_counts = np.zeros(3, dtype=np.int64)
    for p in range(size):
        total = 0.0
        hits = 0
        genes = population[p]
        for e in range(tapes.shape[0]):
            r, a, c = _episode(genes, n, m, d, dir_values, tapes[e], lengths[e], labels[e],
                               limit, end_sym, heads, head_counts, dir_counts)
            total += gamma ** (a - 1) * r
            if c:
                hits += 1
        fitness[p] = total
        n_correct[p] = hits
    return fitness, n_correct
