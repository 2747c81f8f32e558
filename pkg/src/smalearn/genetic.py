"""Genetic search over SMA chromosomes.

Chromosome layout for ``n`` states over ``m`` tape symbols, length
``C = (m + 2) * n``:

* ``n * m`` transition genes, state-major then symbol-minor.  Gene ``v`` is
  ``0`` for "no transition", otherwise the target state ``v - 1``.
* ``n`` head genes in ``[0, d*k)``: head ``g // d``, direction
  ``way.directions[g % d]``.
* ``n`` accept genes in ``{0, 1}``.

Each generation keeps the better half unchanged and refills the other half
with single-point crossover children of two distinct survivors, followed by
up to ``max_mutations`` random gene resets.
"""

from __future__ import annotations

import json
import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import _kernels
from .automaton import Direction, SmaSpec, ValidationError, Way
from .env import ACCEPT, REJECT, EpisodeConfig, Observation, env_step, move_action, start
from .languages import DEFAULT_MAX_LEN, REGULAR, LanguageProfile, sample_words
from .rng import derive_rng

log = logging.getLogger(__name__)


def chromosome_length(n: int, m: int) -> int:
    return (m + 2) * n


def default_max_mutations(prof: LanguageProfile, n: int) -> int:
    """3 for the regular languages, otherwise a twentieth of the chromosome length."""
    if prof.id in REGULAR:
        return 3
    return chromosome_length(n, prof.m) // 20


def gene_bounds(n: int, m: int, k: int, d: int) -> np.ndarray:
    """Exclusive upper bound of each gene position."""
    return np.concatenate([
        np.full(n * m, n + 1, dtype=np.int64),
        np.full(n, d * k, dtype=np.int64),
        np.full(n, 2, dtype=np.int64),
    ])


def check_chromosome(genes: np.ndarray, n: int, m: int, k: int, d: int) -> None:
    genes = np.asarray(genes)
    if genes.shape != (chromosome_length(n, m),):
        raise ValidationError(f"chromosome has shape {genes.shape}, expected ({chromosome_length(n, m)},)")
    bad = np.flatnonzero((genes < 0) | (genes >= gene_bounds(n, m, k, d)))
    if bad.size:
        i = int(bad[0])
        raise ValidationError(f"gene {i} = {int(genes[i])} out of range")


def random_chromosome(n: int, m: int, k: int, d: int, rng: np.random.Generator) -> np.ndarray:
    return rng.integers(0, gene_bounds(n, m, k, d))


def decode(genes: Sequence[int], n: int, m: int, k: int, way: Way) -> SmaSpec:
    way = Way(way)
    genes = np.asarray(genes, dtype=np.int64)
    check_chromosome(genes, n, m, k, way.d)
    trans = genes[: n * m].reshape(n, m)
    heads = genes[n * m: n * m + n]
    accept = genes[n * m + n:]
    return SmaSpec(
        k=k,
        way=way,
        accept=tuple(bool(a) for a in accept),
        delta=tuple(tuple(None if v == 0 else int(v) - 1 for v in row) for row in trans),
        head_assign=tuple((way.directions[g % way.d], g // way.d) for g in map(int, heads)),
    )


def encode(spec: SmaSpec) -> np.ndarray:
    d = spec.way.d
    trans = [0 if t is None else t + 1 for row in spec.delta for t in row]
    heads = [h * d + spec.way.directions.index(direction) for direction, h in spec.head_assign]
    return np.array(trans + heads + [int(a) for a in spec.accept], dtype=np.int64)


class SmaPolicy:
    """Drives the environment with a discrete SMA.

    The reset observation is ignored: the machine's first action is always the
    move assigned to the initial state.
    """

    def __init__(self, spec: SmaSpec):
        self.spec = spec
        self.reset()

    def reset(self) -> None:
        self.state = 0
        self._started = False

    def act(self, obs: Observation) -> int:
        spec = self.spec
        if self._started:
            target = spec.delta[self.state][obs.symbol]
            if target is None:
                return ACCEPT if spec.accept[self.state] else REJECT
            self.state = target
        self._started = True
        direction, head = spec.head_assign[self.state]
        return move_action(head, direction, spec.way)


@dataclass
class TrainingSet:
    """Fixed (word, label) pairs plus a padded tape array for the compiled loop."""

    words: list[tuple[int, ...]]
    labels: np.ndarray
    tapes: np.ndarray
    lengths: np.ndarray

    @classmethod
    def from_pairs(cls, pairs, prof: LanguageProfile) -> "TrainingSet":
        words = [tuple(w) for w, _ in pairs]
        width = max((len(w) for w in words), default=0) + 2
        tapes = np.full((len(words), width), prof.alphabet.marker_end, dtype=np.int64)
        tapes[:, 0] = prof.alphabet.marker_start
        for i, w in enumerate(words):
            tapes[i, 1:len(w) + 1] = w
        return cls(
            words=words,
            labels=np.array([bool(lab) for _, lab in pairs], dtype=np.bool_),
            tapes=tapes,
            lengths=np.array([len(w) for w in words], dtype=np.int64),
        )

    @classmethod
    def sample(cls, prof: LanguageProfile, size: int, max_len: int, rng) -> "TrainingSet":
        return cls.from_pairs(sample_words(prof, size, max_len, rng), prof)

    def __len__(self) -> int:
        return len(self.words)


@dataclass
class GaConfig:
    population_size: int = 100
    n_states: int = 32
    gamma: float = 0.999
    training_set_size: int = 1000
    validation_size: int = 1000
    max_mutations: int | None = None  # None: per-language default
    max_generations: int = 2000
    max_len: int = DEFAULT_MAX_LEN
    stop_on_validation: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.population_size < 4 or self.population_size % 2:
            raise ValueError(f"population_size must be even and >= 4, got {self.population_size}")
        if not 0 < self.gamma <= 1:
            raise ValueError(f"gamma must be in (0, 1], got {self.gamma}")
        if self.n_states < 1 or self.training_set_size < 1:
            raise ValueError("n_states and training_set_size must be positive")

    def mutations_for(self, prof: LanguageProfile) -> int:
        if self.max_mutations is not None:
            return self.max_mutations
        return default_max_mutations(prof, self.n_states)


class Problem:
    """Shapes and constants shared by every chromosome of one GA run."""

    def __init__(self, prof: LanguageProfile, n_states: int, max_len: int = DEFAULT_MAX_LEN,
                 gamma: float = 0.999):
        self.profile = prof
        self.n = n_states
        self.m = prof.m
        self.k = prof.k
        self.way = prof.way
        self.d = prof.way.d
        self.gamma = gamma
        self.episode = EpisodeConfig(prof, max_len)
        self.limit = self.episode.limit
        self.length = chromosome_length(self.n, self.m)
        self.bounds = gene_bounds(self.n, self.m, self.k, self.d)
        self.dir_values = np.array([int(x) for x in prof.way.directions], dtype=np.int64)

    def evaluate(self, population: np.ndarray, data: TrainingSet) -> tuple[np.ndarray, np.ndarray]:
        """Fitness and prediction rate for each chromosome (rows of ``population``)."""
        population = np.ascontiguousarray(np.atleast_2d(population), dtype=np.int64)
        fit, hits = _kernels.population_fitness(
            population, self.n, self.m, self.k, self.d, self.dir_values,
            data.tapes, data.lengths, data.labels, self.limit,
            self.profile.alphabet.marker_end, self.gamma,
        )
        return fit, hits / len(data)

    def episodes(self, genes: np.ndarray, data: TrainingSet):
        """Per-episode (rewards, lengths, correct, head_counts, dir_counts) for one chromosome."""
        return _kernels.run_episodes(
            np.ascontiguousarray(genes, dtype=np.int64), self.n, self.m, self.k, self.d,
            self.dir_values, data.tapes, data.lengths, data.labels, self.limit,
            self.profile.alphabet.marker_end,
        )

    def decode(self, genes) -> SmaSpec:
        return decode(genes, self.n, self.m, self.k, self.way)


def fitness(genes: np.ndarray, data: TrainingSet, problem: Problem) -> tuple[float, float]:
    """Sum of discounted episode rewards over the training set, and the prediction rate."""
    fit, rate = problem.evaluate(np.asarray(genes)[None, :], data)
    return float(fit[0]), float(rate[0])


def fitness_reference(spec: SmaSpec, data: TrainingSet, config: EpisodeConfig, gamma: float) -> tuple[float, float]:
    """Same quantity as :func:`fitness`, played through the Python environment."""
    policy = SmaPolicy(spec)
    total = 0.0
    hits = 0
    for word, label in zip(data.words, data.labels):
        state, obs = start(config, word, bool(label))
        policy.reset()
        t = 0
        done = False
        while not done:
            state, obs, reward, done = env_step(state, policy.act(obs))
            total += gamma ** t * reward
            t += 1
        hits += bool(state.correct)
    return total, hits / len(data)


def crossover(a: np.ndarray, b: np.ndarray, cut: int) -> np.ndarray:
    return np.concatenate([a[:cut], b[cut:]])


def mutate(genes: np.ndarray, count: int, bounds: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    genes = genes.copy()
    for _ in range(count):
        i = int(rng.integers(len(genes)))
        genes[i] = rng.integers(bounds[i])
    return genes


def make_child(survivors: np.ndarray, max_mutations: int, bounds: np.ndarray,
               rng: np.random.Generator) -> np.ndarray:
    i, j = rng.choice(len(survivors), size=2, replace=False)
    cut = int(rng.integers(1, survivors.shape[1]))
    child = crossover(survivors[i], survivors[j], cut)
    return mutate(child, int(rng.integers(max_mutations + 1)), bounds, rng)


@dataclass
class Population:
    genes: np.ndarray
    fitness: np.ndarray
    rates: np.ndarray

    def order(self) -> np.ndarray:
        return np.argsort(-self.fitness, kind="stable")

    def sorted(self) -> "Population":
        idx = self.order()
        return Population(self.genes[idx], self.fitness[idx], self.rates[idx])

    @property
    def best(self) -> int:
        return int(self.order()[0])


def evolve_generation(pop: Population, data: TrainingSet, problem: Problem, max_mutations: int,
                      seed: int, generation: int) -> Population:
    """Replace the worse half by offspring of the better half.

    Child ``slot`` draws from its own stream ``(seed, "ga-child", generation,
    slot)``, so results do not depend on evaluation order.
    """
    pop = pop.sorted()
    size = len(pop.genes)
    half = size // 2
    survivors = pop.genes[:half]
    children = np.stack([
        make_child(survivors, max_mutations, problem.bounds, derive_rng(seed, "ga-child", generation, slot))
        for slot in range(half, size)
    ])
    fit, rates = problem.evaluate(children, data)
    # children first: the next stable sort lets them win fitness ties, so
    # neutral variants replace their parents instead of being discarded
    return Population(
        np.concatenate([children, survivors]),
        np.concatenate([fit, pop.fitness[:half]]),
        np.concatenate([rates, pop.rates[:half]]),
    )


@dataclass
class GaResult:
    best_spec: SmaSpec
    best_genes: np.ndarray
    history: list[dict] = field(default_factory=list)
    generations: int = 0
    validated: bool = False
    population: Population | None = None
    training_set_index: int = 0


def train_ga(prof: LanguageProfile, config: GaConfig, on_generation=None) -> GaResult:
    """Run the genetic algorithm until validation succeeds or the budget is spent.

    Whenever the best individual answers the whole training set correctly it is
    checked on a fresh held-out set; passing stops the run (if
    ``stop_on_validation``), failing triggers a fresh training set and
    re-evaluation of the population.
    """
    problem = Problem(prof, config.n_states, config.max_len, config.gamma)
    max_mut = config.mutations_for(prof)
    seed = config.seed
    set_index = 0
    data = TrainingSet.sample(prof, config.training_set_size, config.max_len,
                              derive_rng(seed, "ga-train", set_index))
    genes = np.stack([
        random_chromosome(problem.n, problem.m, problem.k, problem.d, derive_rng(seed, "ga-init", i))
        for i in range(config.population_size)
    ])
    pop = Population(genes, *problem.evaluate(genes, data))
    history = []
    validated = False
    generation = 0
    while True:
        best = pop.best
        record = {
            "generation": generation,
            "best_fitness": float(pop.fitness[best]),
            "best_prediction_rate": float(pop.rates[best]),
            "training_set": set_index,
        }
        history.append(record)
        if on_generation is not None:
            on_generation(record)
        if pop.rates[best] >= 1.0:
            check = TrainingSet.sample(prof, config.validation_size, config.max_len,
                                       derive_rng(seed, "ga-validate", generation))
            _, rate = fitness(pop.genes[best], check, problem)
            record["validation_rate"] = rate
            log.info("generation %d: best solves training set, validation %.4f", generation, rate)
            if rate >= 1.0 and config.stop_on_validation:
                validated = True
                break
            set_index += 1
            data = TrainingSet.sample(prof, config.training_set_size, config.max_len,
                                      derive_rng(seed, "ga-train", set_index))
            pop = Population(pop.genes, *problem.evaluate(pop.genes, data))
        if generation >= config.max_generations:
            break
        generation += 1
        pop = evolve_generation(pop, data, problem, max_mut, seed, generation)

    best = pop.best
    return GaResult(
        best_spec=problem.decode(pop.genes[best]),
        best_genes=pop.genes[best].copy(),
        history=history,
        generations=generation,
        validated=validated,
        population=pop,
        training_set_index=set_index,
    )


def save_checkpoint(result: GaResult, prof: LanguageProfile, config: GaConfig, path: str | Path) -> None:
    doc = {
        "kind": "ga",
        "language": prof.id.value,
        "generation": result.generations,
        "master_seed": config.seed,
        "training_set_index": result.training_set_index,
        "config": asdict(config),
        "population": result.population.genes.tolist() if result.population is not None else [],
        "best": result.best_spec.to_json(),
    }
    Path(path).write_text(json.dumps(doc) + "\n")


def write_history(history: list[dict], path: str | Path) -> None:
    lines = ["generation,best_fitness,best_prediction_rate"]
    lines += [f"{h['generation']},{h['best_fitness']!r},{h['best_prediction_rate']!r}" for h in history]
    Path(path).write_text("\n".join(lines) + "\n")
