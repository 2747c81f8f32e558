import json

import numpy as np
import pytest

from smalearn.automaton import Way
from smalearn.env import ACCEPT
from smalearn.evaluation import (
    EvalReport, HeadStats, evaluate, export_report, random_policy, read_report_csv, write_curve,
)
from smalearn.genetic import SmaPolicy
from smalearn.languages import profile


class Always:
    def __init__(self, action):
        self.action = action

    def reset(self):
        pass

    def act(self, obs):
        return self.action


@pytest.mark.parametrize("lid", ["L1", "L4"])
def test_random_baseline_quick(lid):
    prof = profile(lid)
    a = 2 + prof.way.d * prof.k
    report, stats = evaluate(random_policy(a, np.random.default_rng(1)), prof, 3000, np.random.default_rng(2))
    assert abs(report.avg_episode_length - a / 2) < 0.05 * a / 2 + 0.1
    assert 0.45 <= report.prediction_rate <= 0.55
    assert sum(stats.head_fractions()) == pytest.approx(1.0)


def test_always_accept_matches_member_share():
    prof = profile("L2")
    report, stats = evaluate(Always(ACCEPT), prof, 2000, np.random.default_rng(3))
    assert report.avg_episode_length == 1.0
    assert stats.moves == 0 and stats.head_fractions() == [0.0]
    # every member is accepted before the end marker is seen
    assert report.avg_reward == pytest.approx(report.prediction_rate - 10 * (1 - report.prediction_rate))


def test_perfect_machine_reports(l2_machine):
    report, stats = evaluate(SmaPolicy(l2_machine), profile("L2"), 1000, np.random.default_rng(4))
    assert report.prediction_rate == 1.0 and report.avg_reward == 1.0
    assert set(stats.direction_counts) == {"stay", "right"}
    assert stats.direction_fractions()["right"] > 0.9


def test_zero_episodes_rejected():
    with pytest.raises(ValueError):
        evaluate(Always(ACCEPT), profile("L1"), 0, np.random.default_rng(0))


def _sample():
    report = EvalReport(-4.156, 0.5, 3.0, 10_000)
    stats = HeadStats.from_counts([10, 30], {}, Way.ONE)
    return report, stats


def test_csv_roundtrip_and_blank_columns(tmp_path):
    report, stats = _sample()
    path = export_report(report, stats, tmp_path / "r.csv", "csv", "L3R")
    header = path.read_text().splitlines()[0]
    assert header == "model,avg_reward,prediction_rate,avg_episode_length,h1,h2,h3,left,stay,right"
    (row,) = read_report_csv(path)
    assert row["model"] == "L3R" and row["avg_reward"] == -4.156
    assert row["h1"] == 0.25 and row["h2"] == 0.75 and row["h3"] is None
    assert row["left"] is None


def test_exports_are_byte_stable(tmp_path):
    report, stats = _sample()
    for fmt in ("csv", "json"):
        a = export_report(report, stats, tmp_path / f"a.{fmt}", fmt).read_bytes()
        b = export_report(report, stats, tmp_path / f"b.{fmt}", fmt).read_bytes()
        assert a == b
    doc = json.loads((tmp_path / "a.json").read_text())
    assert doc["report"]["episodes"] == 10_000


def test_export_errors(tmp_path):
    report, stats = _sample()
    with pytest.raises(OSError, match="missing"):
        export_report(report, stats, tmp_path / "missing" / "r.csv")
    with pytest.raises(ValueError):
        export_report(report, stats, tmp_path / "r.xml", "xml")


def test_write_curve_skips_nan(tmp_path):
    write_curve([1, 2, 3], [0.5, float("nan"), 1.0], tmp_path / "c.txt")
    assert (tmp_path / "c.txt").read_text() == "1 0.5\n3 1.0\n"
