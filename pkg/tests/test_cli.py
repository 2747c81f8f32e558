import json

import pytest

from smalearn.cli import run_command
from smalearn.config import ConfigError, load_config


def test_derived_values():
    assert load_config(None, {"language": "L1"}).derived() == {"N": 42, "A": 4, "C": 192, "max_mutations": 3}
    d = load_config(None, {"language": "L4"}).derived()
    assert (d["N"], d["A"], d["C"], d["max_mutations"]) == (83, 8, 192, 9)
    assert load_config(None, {"language": "L5"}).derived()["C"] == 224


def test_precedence_flags_over_file_over_defaults(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"language": "L3", "seed": 4, "q": {"epsilon": 0.2, "gamma": 0.9}}))
    cfg = load_config(path, {"seed": 9, "q.epsilon": 0.1})
    assert cfg.language.value == "L3" and cfg.seed == 9
    q = cfg.q_config()
    assert (q.epsilon, q.gamma, q.learning_rate, q.seed) == (0.1, 0.9, 1e-3, 9)


def test_max_mutations_override():
    assert load_config(None, {"language": "L1", "ga.max_mutations": 7}).derived()["max_mutations"] == 7


@pytest.mark.parametrize("doc, key", [
    ({"colour": 1}, "colour"),
    ({"q": {"epsilonn": 0.1}}, "q.epsilonn"),
    ({"q": {"epsilon": "high"}}, "q.epsilon"),
    ({"q": {"epsilon": 2.0}}, "q.epsilon"),
    ({"ga": {"population_size": 7}}, "ga.population_size"),
    ({"language": "L9"}, "language"),
])
def test_bad_config_names_key(tmp_path, doc, key):
    path = tmp_path / "c.json"
    path.write_text(json.dumps(doc))
    with pytest.raises(ConfigError, match=key.replace(".", r"\.")):
        load_config(path)


def test_shape_override_warns(caplog):
    cfg = load_config(None, {"language": "L1", "k": 2})
    assert "overriding" in caplog.text
    assert cfg.derived()["A"] == 6


def test_missing_checkpoint_exits_2(tmp_path, capsys):
    code = run_command(["eval", "--checkpoint", str(tmp_path / "nope.json"), "--out", str(tmp_path)])
    assert code == 2 and "not found" in capsys.readouterr().err


def test_bad_config_exits_2(tmp_path):
    path = tmp_path / "c.json"
    path.write_text('{"bogus": 1}')
    assert run_command(["baseline", "--config", str(path), "--out", str(tmp_path)]) == 2


def test_baseline_writes_report(tmp_path, capsys):
    code = run_command(["baseline", "--language", "L3", "--episodes", "500", "--out", str(tmp_path)])
    assert code == 0
    assert (tmp_path / "report_L3R.csv").exists()
    assert "L3R:" in capsys.readouterr().out


def test_output_dir_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("SMALEARN_OUTPUT_DIR", str(tmp_path / "env"))
    assert run_command(["baseline", "--episodes", "50", "--format", "json"]) == 0
    assert (tmp_path / "env" / "report_L1R.json").exists()


def test_train_ga_is_deterministic_and_replayable(tmp_path, capsys):
    outputs = []
    for name in ("a", "b"):
        out = tmp_path / name
        code = run_command(["train-ga", "--language", "L1", "--seed", "1", "--generations", "15",
                            "--episodes", "200", "--out", str(out)])
        assert code == 0
        outputs.append(out)
    for f in ("history.csv", "checkpoint.json", "best_sma.json", "report_L1G.csv", "curve_prediction_rate.txt"):
        assert (outputs[0] / f).read_bytes() == (outputs[1] / f).read_bytes(), f
    capsys.readouterr()
    ckpt = outputs[0] / "checkpoint.json"
    assert run_command(["eval", "--checkpoint", str(ckpt), "--seed", "1", "--episodes", "200",
                        "--out", str(tmp_path / "e")]) == 0
    assert (tmp_path / "e" / "report_L1G.csv").read_bytes() == (outputs[0] / "report_L1G.csv").read_bytes()
    capsys.readouterr()
    code = run_command(["demo", "--checkpoint", str(outputs[0] / "best_sma.json"), "--language", "L1",
                        "--word", "0101"])
    out = capsys.readouterr().out
    assert code == 0 and out.startswith("word='0101' member=True") and "result:" in out


def test_train_q_small_run(tmp_path):
    code = run_command(["train-q", "--language", "L1", "--max-env-steps", "2000", "--eval-every", "0",
                        "--episodes", "100", "--out", str(tmp_path)])
    assert code == 0
    doc = json.loads((tmp_path / "checkpoint.json").read_text())
    assert doc["kind"] == "q" and doc["config"]["max_env_steps"] == 2000
    assert (tmp_path / "history.csv").read_text().startswith("timesteps,avg_prediction_rate,avg_episode_length")
    assert run_command(["demo", "--checkpoint", str(tmp_path / "checkpoint.json"), "--word", ""]) == 0


def test_unknown_subcommand_exits_2():
    assert run_command(["fly"]) == 2
