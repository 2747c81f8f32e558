"""Command line entry point.

    smalearn train-ga --language L1 --seed 7
    smalearn train-q --language L2 --target-rate 0.995
    smalearn eval --checkpoint runs/L1-ga-seed7/checkpoint.json
    smalearn baseline --language L5 --episodes 10000
    smalearn demo --checkpoint runs/L1-ga-seed7/best_sma.json --word 0101

Exit codes: 0 success, 1 runtime failure, 2 configuration error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import genetic, qlearn
from .automaton import SmaSpec, ValidationError
from .config import ConfigError, RunConfig, load_config
from .env import EpisodeConfig, action_name, env_step, start, reset
from .evaluation import evaluate, export_report, random_policy, write_curve
from .languages import profile
from .rng import derive_rng

log = logging.getLogger("smalearn")

OUTPUT_ENV = "SMALEARN_OUTPUT_DIR"


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="smalearn", description="Learn simple multi-head automata for formal languages.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
        p.add_argument("--config", help="JSON run configuration")
        p.add_argument("--language", help="L1..L6")
        p.add_argument("--seed", type=int)
        p.add_argument("--max-len", type=int, dest="max_len")
        p.add_argument("--out", help=f"output directory (else ${OUTPUT_ENV}, else runs/<name>)")
        p.add_argument("--heads", type=int, dest="k", help="override the language's head count")
        p.add_argument("--way", choices=("one-way", "two-way"), help="override the language's way")

    p = sub.add_parser("train-ga", help="train an SMA with the genetic algorithm")
    common(p)
    p.add_argument("--generations", type=int, dest="ga.max_generations")
    p.add_argument("--max-mutations", type=int, dest="ga.max_mutations")
    p.add_argument("--population-size", type=int, dest="ga.population_size")
    p.add_argument("--n-states", type=int, dest="ga.n_states")
    p.add_argument("--training-set-size", type=int, dest="ga.training_set_size")
    p.add_argument("--gamma", type=float, dest="ga.gamma")
    p.add_argument("--episodes", type=int, help="evaluation episodes after training")

    p = sub.add_parser("train-q", help="train a recurrent Q-agent")
    common(p)
    p.add_argument("--epsilon", type=float, dest="q.epsilon")
    p.add_argument("--learning-rate", type=float, dest="q.learning_rate")
    p.add_argument("--batch-episodes", type=int, dest="q.batch_episodes")
    p.add_argument("--target-sync", type=int, dest="q.target_sync_period")
    p.add_argument("--max-env-steps", type=int, dest="q.max_env_steps")
    p.add_argument("--eval-every", type=int, dest="q.eval_every")
    p.add_argument("--target-rate", type=float, dest="q.target_rate")
    p.add_argument("--gamma", type=float, dest="q.gamma")
    p.add_argument("--episodes", type=int, help="evaluation episodes after training")

    p = sub.add_parser("eval", help="evaluate a saved agent")
    common(p)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--episodes", type=int)
    p.add_argument("--format", choices=("csv", "json"), default="csv")

    p = sub.add_parser("baseline", help="evaluate the uniform random policy")
    common(p)
    p.add_argument("--episodes", type=int)
    p.add_argument("--format", choices=("csv", "json"), default="csv")

    p = sub.add_parser("demo", help="print one episode played by a saved agent")
    common(p)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--word", help="input word (default: sampled); use '' for the empty word")
    return parser


def _overrides(args: argparse.Namespace) -> dict:
    skip = {"command", "verbose", "config", "out", "checkpoint", "format", "word"}
    return {k: v for k, v in vars(args).items() if k not in skip and v is not None}


def _output_dir(args, cfg: RunConfig, name: str) -> Path:
    if args.out:
        out = Path(args.out)
    elif os.environ.get(OUTPUT_ENV):
        out = Path(os.environ[OUTPUT_ENV])
    else:
        out = Path(cfg.output_dir) / name
    out.mkdir(parents=True, exist_ok=True)
    return out


def _run_name(cfg: RunConfig, algorithm: str) -> str:
    return f"{cfg.language.value}-{algorithm}-seed{cfg.seed}"


def _echo_derived(cfg: RunConfig) -> None:
    d = cfg.derived()
    log.info("%s: N=%d A=%d C=%d max_mutations=%d", cfg.language.value, d["N"], d["A"], d["C"],
             d["max_mutations"])


def _report(policy, cfg, out: Path, model: str, fmt: str) -> Path:
    rng = derive_rng(cfg.seed, "eval", model)
    report, stats = evaluate(policy, cfg.profile, cfg.episodes, rng, cfg.max_len)
    path = export_report(report, stats, out / f"report_{model}.{fmt}", fmt, model)
    print(f"{model}: avg_reward={report.avg_reward:.3f} prediction_rate={report.prediction_rate:.3f} "
          f"avg_episode_length={report.avg_episode_length:.1f} -> {path}")
    return path


def cmd_train_ga(args, cfg: RunConfig) -> int:
    _echo_derived(cfg)
    prof = cfg.profile
    ga_cfg = cfg.ga_config()
    out = _output_dir(args, cfg, _run_name(cfg, "ga"))
    result = genetic.train_ga(prof, ga_cfg)
    genetic.write_history(result.history, out / "history.csv")
    write_curve([h["generation"] for h in result.history],
                [h["best_prediction_rate"] for h in result.history], out / "curve_prediction_rate.txt")
    genetic.save_checkpoint(result, prof, ga_cfg, out / "checkpoint.json")
    result.best_spec.save(out / "best_sma.json")
    log.info("generations=%d validated=%s", result.generations, result.validated)
    _report(genetic.SmaPolicy(result.best_spec), cfg, out, f"{cfg.language.value}G", "csv")
    return 0


def cmd_train_q(args, cfg: RunConfig) -> int:
    _echo_derived(cfg)
    prof = cfg.profile
    q_cfg = cfg.q_config()
    out = _output_dir(args, cfg, _run_name(cfg, "q"))
    result = qlearn.train_q(prof, q_cfg)
    qlearn.write_history(result.history, out / "history.csv")
    xs = [h["timesteps"] / 1000 for h in result.history]
    write_curve(xs, [h["avg_prediction_rate"] for h in result.history], out / "curve_prediction_rate.txt")
    write_curve(xs, [h["avg_episode_length"] for h in result.history], out / "curve_episode_length.txt")
    qlearn.save_checkpoint(result.net, prof, q_cfg, out / "checkpoint.json")
    log.info("env_steps=%d episodes=%d", result.env_steps, result.episodes)
    _report(qlearn.QPolicy(result.net, prof, 0.0), cfg, out, f"{cfg.language.value}Q", "csv")
    return 0


def load_agent(path: str | Path, cfg: RunConfig):
    """Return ``(policy, algorithm letter, language)`` from any saved agent file.

    Raises:
        ConfigError: missing or unreadable file.
    """
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except FileNotFoundError:
        raise ConfigError(f"checkpoint not found: {path}") from None
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read checkpoint {path}: {exc}") from exc
    kind = doc.get("kind", "sma")
    if kind == "q":
        prof = profile(doc["language"])
        net = qlearn.QNetwork.from_json(doc["params"])
        return qlearn.QPolicy(net, prof, 0.0), "Q", prof.id
    spec = SmaSpec.from_json(doc["best"] if kind == "ga" else doc)
    language = profile(doc["language"]).id if "language" in doc else cfg.language
    return genetic.SmaPolicy(spec), "G", language


def cmd_eval(args, cfg: RunConfig) -> int:
    policy, letter, language = load_agent(args.checkpoint, cfg)
    if args.language is None:
        cfg.language = language
    out = _output_dir(args, cfg, _run_name(cfg, "eval"))
    _report(policy, cfg, out, f"{cfg.language.value}{letter}", args.format)
    return 0


def cmd_baseline(args, cfg: RunConfig) -> int:
    _echo_derived(cfg)
    out = _output_dir(args, cfg, _run_name(cfg, "random"))
    a = cfg.derived()["A"]
    policy = random_policy(a, derive_rng(cfg.seed, "random-policy"))
    _report(policy, cfg, out, f"{cfg.language.value}R", args.format)
    return 0


def cmd_demo(args, cfg: RunConfig) -> int:
    policy, _, language = load_agent(args.checkpoint, cfg)
    if args.language is None:
        cfg.language = language
    prof = cfg.profile
    config = EpisodeConfig(prof, cfg.max_len)
    if args.word is not None:
        state, obs = start(config, prof.alphabet.parse(args.word))
    else:
        state, obs = reset(config, derive_rng(cfg.seed, "demo"))
    alphabet = prof.alphabet
    print(f"word={alphabet.format(state.tape.word)!r} member={state.label} limit={config.limit}")
    print(f"t=0 observe symbol={alphabet.char(obs.symbol)} head={obs.head} dir={obs.direction.name.lower()}")
    policy.reset()
    done = False
    while not done:
        action = policy.act(obs)
        state, obs, reward, done = env_step(state, action)
        seen = "-" if obs is None else (
            f"symbol={alphabet.char(obs.symbol)} head={obs.head} dir={obs.direction.name.lower()}")
        print(f"t={state.actions_taken} action={action_name(action, prof.way)} observe {seen} reward={reward:g}")
    print(f"result: {'correct' if state.correct else 'wrong'} after {state.actions_taken} actions")
    return 0


COMMANDS = {
    "train-ga": cmd_train_ga,
    "train-q": cmd_train_q,
    "eval": cmd_eval,
    "baseline": cmd_baseline,
    "demo": cmd_demo,
}


def run_command(argv: list[str] | None = None) -> int:
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        overrides = _overrides(args)
        if args.command == "train-ga":
            overrides["algorithm"] = "ga"
        elif args.command == "train-q":
            overrides["algorithm"] = "q"
        elif args.command == "baseline":
            overrides["algorithm"] = "random"
        cfg = load_config(args.config, overrides)
        return COMMANDS[args.command](args, cfg)
    except (ConfigError, ValidationError) as exc:
        print(f"smalearn: error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - top-level runtime failure
        log.debug("runtime failure", exc_info=True)
        print(f"smalearn: runtime failure: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run_command())


if __name__ == "__main__":
    main()
