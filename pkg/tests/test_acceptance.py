"""End-to-end acceptance gate.

Each test checks one criterion at its stated tolerance and records a single
PASS/FAIL line, shown in the "acceptance criteria" section of the pytest
summary. Training criteria are marked ``slow``; deselect them with
``-m "not slow"``.
"""

import subprocess
import sys
import time
from pathlib import Path

import pytest

from conftest import ACCEPTANCE_LINES
from smalearn.evaluation import evaluate, random_policy
from smalearn.genetic import GaConfig, SmaPolicy, train_ga
from smalearn.languages import PROFILES, profile
from smalearn.qlearn import QConfig, QPolicy, train_q
from smalearn.rng import derive_rng

EPISODES = 10_000
TESTS = Path(__file__).parent


def record(name: str, ok: bool, detail: str) -> None:
    line = f"{'PASS' if ok else 'FAIL'} {name}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def greedy_report(policy, lid: str, seed: int):
    return evaluate(policy, profile(lid), EPISODES, derive_rng(seed, "acceptance-eval", lid))[0]


def test_criterion_1_random_baseline():
    parts, ok = [], True
    for lid, prof in PROFILES.items():
        a = 2 + prof.way.d * prof.k
        rep, _ = evaluate(random_policy(a, derive_rng(0, "random", lid.value)), prof, EPISODES,
                          derive_rng(0, "baseline", lid.value))
        good = 0.48 <= rep.prediction_rate <= 0.52 and abs(rep.avg_episode_length - a / 2) <= 0.05 * a / 2
        ok &= good
        parts.append(f"{lid.value}R rate={rep.prediction_rate:.3f} len={rep.avg_episode_length:.2f}/{a / 2:g}")
    record("1 random baseline", ok, "; ".join(parts))


@pytest.mark.slow
def test_criterion_2_ga_regular():
    parts, ok = [], True
    for lid in ("L1", "L2"):
        result = train_ga(profile(lid), GaConfig(max_generations=200, seed=0))
        rep = greedy_report(SmaPolicy(result.best_spec), lid, 0)
        good = result.validated and result.generations <= 200 and rep.prediction_rate >= 0.99
        ok &= good
        parts.append(f"{lid}G validated={result.validated} gens={result.generations} "
                     f"rate={rep.prediction_rate:.4f}")
    record("2 GA on L1/L2 within 200 generations", ok, "; ".join(parts))


def _best_of_seeds(lid: str, threshold: float, seeds) -> tuple[bool, str]:
    tried = []
    for seed in seeds:
        result = train_ga(profile(lid), GaConfig(max_generations=2000, seed=seed))
        rate = greedy_report(SmaPolicy(result.best_spec), lid, seed).prediction_rate
        tried.append(f"seed{seed}={rate:.4f}")
        if rate >= threshold:
            return True, f"{lid}G " + ",".join(tried)
    return False, f"{lid}G " + ",".join(tried)


@pytest.mark.slow
def test_criterion_3_ga_non_regular():
    checks = [("L3", 0.99, (0,)), ("L5", 0.95, (0, 1, 2)), ("L4", 0.75, (0, 1, 2)), ("L6", 0.75, (0, 1, 2))]
    parts, ok = [], True
    for lid, threshold, seeds in checks:
        good, text = _best_of_seeds(lid, threshold, seeds)
        ok &= good
        parts.append(f"{text} (>= {threshold})")
    record("3 GA on L3/L4/L5/L6", ok, "; ".join(parts))


@pytest.mark.slow
def test_criterion_4_q_regular():
    parts, ok = [], True
    for lid in ("L1", "L2"):
        result = train_q(profile(lid), QConfig(max_env_steps=2_000_000, target_rate=0.995, seed=0))
        rep = greedy_report(QPolicy(result.net, profile(lid)), lid, 0)
        good = (result.env_steps <= 2_000_000 + 2 * 42 and rep.prediction_rate >= 0.99
                and rep.avg_episode_length <= 15)
        ok &= good
        parts.append(f"{lid}Q steps={result.env_steps} rate={rep.prediction_rate:.4f} "
                     f"len={rep.avg_episode_length:.2f}")
    record("4 Q-learning on L1/L2", ok, "; ".join(parts))


@pytest.mark.slow
def test_criterion_5_q_beats_random_on_l3():
    prof = profile("L3")
    result = train_q(prof, QConfig(seed=0))
    q = greedy_report(QPolicy(result.net, prof), "L3", 0)
    base, _ = evaluate(random_policy(6, derive_rng(0, "random", "L3")), prof, EPISODES,
                       derive_rng(0, "acceptance-eval", "L3"))
    margin = q.avg_reward - base.avg_reward
    record("5 Q-learning beats random on L3", margin >= 1.0,
           f"L3Q reward={q.avg_reward:.3f} L3R reward={base.avg_reward:.3f} margin={margin:.3f} (>= 1.0)")


PROPERTY_TESTS = [
    "test_genetic.py::test_encode_decode_roundtrip",
    "test_genetic.py::test_elitism_keeps_best_and_size",
    "test_env.py",
    "test_cli.py::test_derived_values",
    "test_languages.py::test_membership_matches_definition_exhaustively",
    "test_qlearn.py::test_gradients_match_finite_differences",
    "test_qlearn.py::test_overfit_one_batch",
]


def test_criterion_6_property_suites():
    start = time.perf_counter()
    proc = subprocess.run(
        [sys.executable, "-m", "pytest", "-q", "-p", "no:cacheprovider", *(str(TESTS / t) for t in PROPERTY_TESTS)],
        capture_output=True, text=True, cwd=TESTS.parent,
    )
    elapsed = time.perf_counter() - start
    summary = proc.stdout.strip().splitlines()[-1] if proc.stdout.strip() else proc.stderr[-200:]
    record("6 property suites", proc.returncode == 0 and elapsed < 60,
           f"{summary.strip('= ')} (wall {elapsed:.1f}s < 60s)")
