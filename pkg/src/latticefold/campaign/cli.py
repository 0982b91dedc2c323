"""Command-line campaign driver.

Every run subcommand materializes a run directory holding manifest.json,
a resolved config snapshot and the per-evaluation events.jsonl; analyze
derives the figure-ready CSV/SVG artifacts from those logs afterwards.
"""

from __future__ import annotations

import argparse
import json
import sys
from datetime import datetime, timezone
from pathlib import Path

from ..errors import ConfigError, EvaluatorError, LatticefoldError
from ..fitness import fitness
from ..ga import run_ga
from ..lattice import deserialize, gd_count, random_layout, serialize
from ..neutronics import BuiltinEvaluator, calibrate
from ..neutronics.external import ExternalEvaluator, serve_stdio
from ..policy import pretrain_mle, run_online_dpo, save_checkpoint
from ..seeding import derive_rng
from ..symgen import run_sym_benchmark
from . import analysis
from .config import (
    DATASET_DEFAULT_N,
    default_out_dir,
    make_dpo,
    make_fitness,
    make_ga,
    make_library,
    make_noise,
    make_tier,
    resolve_config,
    snapshot_text,
)
from .dataset import generate_dataset, load_dataset_layouts
from .render import render_map

EXIT_OK = 0
EXIT_USAGE = 2          # argparse
EXIT_CONFIG = 3
EXIT_EVALUATOR = 4
EXIT_IO = 5
EXIT_DOMAIN = 6

_EPILOG = """\
exit codes:
  0  success
  2  bad command line (usage)
  3  config error (unreadable file, unknown key, bad value)
  4  external evaluator failure
  5  I/O error
  6  domain error (bad layout text, solver failure, bad argument)

config: a flat `key = value` text file selected with --config; CLI flags
override file values. Unknown keys are rejected. Default output root is
$LATTICEFOLD_OUT_DIR, else ./runs.
"""


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _write_jsonl(path: Path, records: list[dict]) -> None:
    with path.open("w") as fh:
        for rec in records:
            fh.write(json.dumps(rec) + "\n")


def _prepare_run_dir(args, cfg, kind: str) -> Path:
    root = Path(args.out_dir) if args.out_dir else default_out_dir()
    root.mkdir(parents=True, exist_ok=True)
    base = f"{kind}-s{cfg['seed']}"
    run_dir = root / base
    counter = 1
    while run_dir.exists() and any(run_dir.iterdir()):
        counter += 1
        run_dir = root / f"{base}-{counter}"
    run_dir.mkdir(exist_ok=True)
    (run_dir / "config.snapshot").write_text(snapshot_text(cfg))
    return run_dir


def _finish_run(run_dir: Path, kind: str, cfg: dict, started: str, calls: int, outputs: list[str]) -> None:
    manifest = {
        "kind": kind,
        "config": {key: cfg[key] for key in sorted(cfg)},
        "started": started,
        "finished": _now(),
        "evaluator_calls": calls,
        "outputs": sorted(outputs + ["config.snapshot", "manifest.json"]),
    }
    (run_dir / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    print(json.dumps({"run_dir": str(run_dir), "evaluator_calls": calls}))


def _make_evaluator(cfg: dict):
    choice = cfg["evaluator"]
    if choice == "builtin":
        return BuiltinEvaluator(lib=make_library(cfg), noise=make_noise(cfg))
    if choice.startswith("external:"):
        command = choice[len("external:"):]
        if not command:
            raise ConfigError("evaluator external: needs a command")
        return ExternalEvaluator(command)
    raise ConfigError(f"evaluator must be builtin or external:<command>, got {choice!r}")


def _best_json(layout_text: str, k: float, fq: float, fdh: float, fit: float) -> dict:
    return {"layout": layout_text, "k_eff": k, "fq": fq, "fdh": fdh, "fitness": fit}


def cmd_generate_dataset(args, cfg) -> int:
    tier = make_tier(cfg)
    n = args.n if args.n is not None else cfg["dataset.n"]
    if n == 0:
        n = DATASET_DEFAULT_N[tier]
    inventory = args.inventory if args.inventory is not None else cfg["dataset.inventory"]
    started = _now()
    run_dir = _prepare_run_dir(args, cfg, "dataset")
    evaluator = _make_evaluator(cfg)
    try:
        calls = generate_dataset(n, inventory, tier, run_dir / "dataset.jsonl", evaluator)
    finally:
        evaluator.close()
    _finish_run(run_dir, "dataset", cfg, started, calls, ["dataset.jsonl"])
    return EXIT_OK


def cmd_run_ga(args, cfg) -> int:
    if args.budget is not None:
        cfg["ga.eval_budget"] = args.budget
    if args.population is not None:
        cfg["ga.population"] = args.population
    started = _now()
    run_dir = _prepare_run_dir(args, cfg, "ga")
    evaluator = _make_evaluator(cfg)
    try:
        result = run_ga(make_ga(cfg), evaluator, make_fitness(cfg))
    finally:
        evaluator.close()
    _write_jsonl(run_dir / "events.jsonl", result.log)
    best = result.best
    (run_dir / "best.json").write_text(
        json.dumps(
            _best_json(
                serialize(best.layout()),
                best.result.k_eff,
                best.result.fq,
                best.result.fdh,
                best.fit.total,
            ),
            indent=2,
        )
        + "\n"
    )
    _finish_run(run_dir, "ga", cfg, started, result.evaluator_calls, ["events.jsonl", "best.json"])
    return EXIT_OK


def cmd_run_sym(args, cfg) -> int:
    if args.inventory is not None:
        cfg["sym.inventory"] = args.inventory
    if args.candidates is not None:
        cfg["sym.n_candidates"] = args.candidates
    started = _now()
    run_dir = _prepare_run_dir(args, cfg, "sym")
    evaluator = _make_evaluator(cfg)
    try:
        result = run_sym_benchmark(
            cfg["sym.inventory"],
            cfg["sym.n_candidates"],
            make_tier(cfg),
            cfg["seed"],
            evaluator,
            make_fitness(cfg),
        )
    finally:
        evaluator.close()
    _write_jsonl(run_dir / "events.jsonl", result.log)
    (run_dir / "best.json").write_text(
        json.dumps(
            _best_json(
                serialize(result.best_layout),
                result.best_result.k_eff,
                result.best_result.fq,
                result.best_result.fdh,
                result.best_fitness.total,
            ),
            indent=2,
        )
        + "\n"
    )
    _finish_run(run_dir, "sym", cfg, started, len(result.log), ["events.jsonl", "best.json"])
    return EXIT_OK


def _pretrain_corpora(cfg: dict):
    seed = cfg["seed"]
    if cfg["dpo.corpus_low"]:
        low = load_dataset_layouts(cfg["dpo.corpus_low"])
    else:
        low = [
            random_layout(16, derive_rng(seed, 5, i)) for i in range(cfg["dpo.pretrain_low_n"])
        ]
    if cfg["dpo.corpus_high"]:
        high = load_dataset_layouts(cfg["dpo.corpus_high"])
    else:
        high = [
            random_layout(16, derive_rng(seed, 6, i)) for i in range(cfg["dpo.pretrain_high_n"])
        ]
    return [(low, 1.0), (high, cfg["dpo.pretrain_high_weight"])]


def cmd_run_dpo(args, cfg) -> int:
    if args.steps is not None:
        cfg["dpo.steps"] = args.steps
    started = _now()
    run_dir = _prepare_run_dir(args, cfg, "dpo")
    corpora = _pretrain_corpora(cfg)
    params = pretrain_mle(corpora)
    save_checkpoint(
        params,
        run_dir / "policy_pretrained.json",
        metadata={
            "stage": "pretrained",
            "corpus_sizes": [len(c) for c, _ in corpora],
            "corpus_weights": [w for _, w in corpora],
        },
    )
    evaluator = _make_evaluator(cfg)
    try:
        result = run_online_dpo(params, evaluator, make_fitness(cfg), make_dpo(cfg))
    finally:
        evaluator.close()
    _write_jsonl(run_dir / "events.jsonl", result.log)
    _write_jsonl(run_dir / "steps.jsonl", result.steps)
    save_checkpoint(
        result.params,
        run_dir / "policy_final.json",
        metadata={
            "stage": "preference-optimized",
            "steps": cfg["dpo.steps"],
            "expected_inventory": result.params.expected_inventory(),
        },
    )
    (run_dir / "best.json").write_text(
        json.dumps(
            _best_json(
                serialize(result.best_layout),
                result.best_result.k_eff,
                result.best_result.fq,
                result.best_result.fdh,
                result.best_fitness.total,
            ),
            indent=2,
        )
        + "\n"
    )
    _finish_run(
        run_dir,
        "dpo",
        cfg,
        started,
        result.evaluator_calls,
        ["events.jsonl", "steps.jsonl", "best.json", "policy_pretrained.json", "policy_final.json"],
    )
    return EXIT_OK


def cmd_analyze(args, cfg) -> int:
    run_dir = Path(args.run)
    events_path = run_dir / "events.jsonl"
    if not events_path.exists():
        raise FileNotFoundError(f"no events.jsonl under {run_dir}")
    records = analysis.load_events(events_path)
    fit_cfg = make_fitness(cfg)
    out = run_dir / "analysis"
    out.mkdir(exist_ok=True)
    analysis.write_trajectory_csv(records, out / "trajectory.csv")
    window = (fit_cfg.k_lo, fit_cfg.k_hi)
    analysis.write_scatter_csv(records, "k_eff", "fitness", out / "scatter_k_fitness.csv", window)
    analysis.write_scatter_csv(records, "gd_count", "k_eff", out / "scatter_gd_k.csv", window)
    analysis.write_correlation_csv(analysis.pearson_corr(records), out / "correlation.csv")
    best = analysis.best_record(records, fit_cfg.k_target)
    layout = deserialize(best["layout"])
    (out / "best_layout.txt").write_text(render_map(layout, "ascii"))
    (out / "best_layout.svg").write_text(render_map(layout, "svg"))
    print(json.dumps({"run_dir": str(run_dir), "analysis": str(out), "records": len(records)}))
    return EXIT_OK


def cmd_render(args, cfg) -> int:
    layout = deserialize(Path(args.layout).read_text())
    text = render_map(layout, args.style)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_evaluate(args, cfg) -> int:
    layout = deserialize(Path(args.layout).read_text())
    tier = make_tier(cfg)
    evaluator = _make_evaluator(cfg)
    try:
        res = evaluator(layout, tier, cfg["seed"])
    finally:
        evaluator.close()
    fit = fitness(res, make_fitness(cfg))
    print(
        json.dumps(
            {"k_eff": res.k_eff, "fq": res.fq, "fdh": res.fdh, "fitness": fit.total}
        )
    )
    return EXIT_OK


def cmd_calibrate(args, cfg) -> int:
    samples = args.samples if args.samples is not None else cfg["calibrate.samples_per_level"]
    started = _now()
    run_dir = _prepare_run_dir(args, cfg, "calibrate")
    report = calibrate(make_library(cfg), samples, cfg["seed"])
    payload = {
        "levels": [
            {
                "inventory": st.inventory,
                "k_min": st.k_min,
                "k_median": st.k_median,
                "k_max": st.k_max,
            }
            for st in report.levels
        ],
        "targets": report.targets,
        "passed": report.passed,
    }
    (run_dir / "calibration.json").write_text(json.dumps(payload, indent=2) + "\n")
    for name, ok in report.targets.items():
        print(f"calibration target {name}: {'PASS' if ok else 'FAIL'}")
    calls = samples * len(report.levels)
    _finish_run(run_dir, "calibrate", cfg, started, calls, ["calibration.json"])
    return EXIT_OK


def cmd_serve_evaluator(args, cfg) -> int:
    return serve_stdio(lib=make_library(cfg), noise=make_noise(cfg))


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key = value config file")
    common.add_argument("--seed", type=int, help="master seed (default 0)")
    common.add_argument("--out-dir", help="output root (default $LATTICEFOLD_OUT_DIR or ./runs)")
    common.add_argument("--fidelity", choices=["low", "high"], help="evaluator tier")
    common.add_argument(
        "--evaluator",
        help="builtin (default) or external:<command> speaking the JSONL protocol",
    )

    parser = argparse.ArgumentParser(
        prog="latticefold",
        description="Assembly design-search campaigns on a two-group diffusion evaluator",
        epilog=_EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate-dataset", parents=[common], help="random layout corpus with seed = id + 1")
    p.add_argument("--n", type=int, help="record count (default 5000 low / 1000 high)")
    p.add_argument("--inventory", type=int, help="Gd rods per layout (default 16)")
    p.set_defaults(func=cmd_generate_dataset)

    p = sub.add_parser("run-ga", parents=[common], help="fixed-inventory genetic algorithm")
    p.add_argument("--budget", type=int, help="evaluator-call budget (default 1000)")
    p.add_argument("--population", type=int, help="population size (default 50)")
    p.set_defaults(func=cmd_run_ga)

    p = sub.add_parser("run-sym", parents=[common], help="randomized octant-symmetric benchmark")
    p.add_argument("--inventory", type=int, help="Gd inventory (default 16)")
    p.add_argument("--candidates", type=int, help="samples to evaluate (default 200)")
    p.set_defaults(func=cmd_run_sym)

    p = sub.add_parser("run-dpo", parents=[common], help="pretrain policy, then online preference optimization")
    p.add_argument("--steps", type=int, help="preference steps (default 500)")
    p.set_defaults(func=cmd_run_dpo)

    p = sub.add_parser("analyze", parents=[common], help="derive CSV/SVG artifacts from a run directory")
    p.add_argument("--run", required=True, help="run directory holding events.jsonl")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("render", parents=[common], help="render a layout file as ascii or svg")
    p.add_argument("--layout", required=True, help="path to serialized layout text")
    p.add_argument("--style", choices=["ascii", "svg"], default="ascii")
    p.add_argument("--out", help="output file (default stdout)")
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("evaluate", parents=[common], help="evaluate one layout file")
    p.add_argument("--layout", required=True, help="path to serialized layout text")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("calibrate", parents=[common], help="inventory sweep against the library targets")
    p.add_argument("--samples", type=int, help="samples per inventory level (default 100)")
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("serve-evaluator", parents=[common], help="answer evaluator protocol requests on stdin")
    p.set_defaults(func=cmd_serve_evaluator)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(
            args.config,
            {
                "seed": args.seed,
                "fidelity": args.fidelity,
                "evaluator": args.evaluator,
            },
        )
        return args.func(args, cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except EvaluatorError as exc:
        print(f"evaluator error: {exc}", file=sys.stderr)
        return EXIT_EVALUATOR
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (LatticefoldError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
