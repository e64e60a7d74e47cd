"""Command-line entry point.

Results go to stdout as JSON; diagnostics go to stderr. Every subcommand is a
thin shell over the library so pipelines and tests see identical behaviour.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import fql, scheduler, simkit, triage
from .config import EngineConfig
from .errors import TriageQError


def _load_config(path) -> EngineConfig:
    if path is None:
        return EngineConfig()
    return EngineConfig.load(path)


def _emit(doc) -> None:
    json.dump(doc, sys.stdout, indent=2)
    sys.stdout.write("\n")


def cmd_serve(args) -> int:
    import os

    import uvicorn

    from .httpapi import create_app
    from .service import CentreService

    config_path = args.config or os.environ.get("TRIAGEQ_CONFIG")
    port = args.port if args.port is not None else \
        int(os.environ.get("TRIAGEQ_PORT", "8000"))
    config = _load_config(config_path)
    if args.data_dir:
        config.service.data_dir = args.data_dir
    service = CentreService(config.service.data_dir, config)
    app = create_app(service, static_dir=args.static_dir)
    uvicorn.run(app, host=args.host, port=port, log_level="info")
    return 0


def cmd_triage(args) -> int:
    config = _load_config(args.config)
    with open(args.input) as fh:
        doc = json.load(fh)
    assessment = triage.Assessment.from_dict(doc)
    result = triage.triage(assessment, fis=config.triage_fis(),
                           thresholds=config.thresholds,
                           pain_weights=config.pain_weights,
                           overrides=config.overrides)
    _emit(result.to_dict())
    return 0


def cmd_schedule(args) -> int:
    config = _load_config(args.config)
    with open(args.queue) as fh:
        queue = scheduler.Queue.from_dict(json.load(fh))
    if args.brute_force:
        result = scheduler.brute_force(queue)
    else:
        params = config.ga
        if args.seed is not None:
            params.seed = args.seed
        result = scheduler.optimize(queue, params=params)
    _emit(result.to_dict(queue))
    return 0


def cmd_sim_fql(args) -> int:
    curve, model, teacher = simkit.run_teacher_experiment(
        args.seed, args.epochs, args.noise_sigma)
    if args.out:
        curve.to_csv(args.out)
    alignment = simkit.teacher_alignment(model, teacher)
    _emit({
        "epochs": args.epochs,
        "seed": args.seed,
        "noise_sigma": args.noise_sigma,
        "final_sliding_avg_abs_error": curve.final_sliding_avg,
        "rows_checked": len(alignment),
        "rows_aligned": sum(1 for _, ok in alignment if ok),
        "curve_csv": args.out,
    })
    return 0


def cmd_sim_schedule(args) -> int:
    config = _load_config(args.config)
    if args.trace:
        trace = simkit.ArrivalTrace.from_csv(args.trace)
    elif args.generate:
        trace = simkit.generate_trace(args.n, args.seed, config.sim)
    else:
        print("error: provide --trace FILE or --generate", file=sys.stderr)
        return 2
    report = simkit.run_schedule_benchmark(
        trace, args.policy, prediction_noise_sigma=args.noise_sigma,
        seed=args.seed, ga_params=config.ga, thresholds=config.thresholds,
        sim=config.sim)
    doc = report.to_dict()
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(doc, fh, indent=2)
    _emit(doc)
    return 0


def cmd_sim_triage(args) -> int:
    config = _load_config(args.config)
    report = simkit.triage_agreement(fis=config.triage_fis(),
                                     thresholds=config.thresholds)
    doc = report.to_dict()
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(doc, fh, indent=2)
    _emit(doc)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="triageq",
        description="Emergency-centre triage scoring and queue optimization")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--port", type=int, default=None,
                   help="listen port (or TRIAGEQ_PORT; default 8000)")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--config", help="config JSON (or TRIAGEQ_CONFIG)")
    p.add_argument("--data-dir")
    p.add_argument("--static-dir")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("triage", help="score one assessment JSON file")
    p.add_argument("--input", required=True)
    p.add_argument("--config")
    p.set_defaults(func=cmd_triage)

    p = sub.add_parser("schedule", help="optimize a queue JSON file")
    p.add_argument("--queue", required=True)
    p.add_argument("--brute-force", action="store_true")
    p.add_argument("--seed", type=int)
    p.add_argument("--config")
    p.set_defaults(func=cmd_schedule)

    p = sub.add_parser("sim-fql", help="teacher-driven learning experiment")
    p.add_argument("--epochs", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--noise-sigma", type=float, default=0.0)
    p.add_argument("--out", help="curve CSV path")
    p.set_defaults(func=cmd_sim_fql)

    p = sub.add_parser("sim-schedule", help="queue policy benchmark")
    p.add_argument("--trace", help="trace CSV path")
    p.add_argument("--generate", action="store_true")
    p.add_argument("--n", type=int, default=17)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--policy", choices=["fifo", "ga"], default="ga")
    p.add_argument("--noise-sigma", type=float, default=None)
    p.add_argument("--out", help="report JSON path")
    p.add_argument("--config")
    p.set_defaults(func=cmd_sim_schedule)

    p = sub.add_parser("sim-triage", help="agreement against CTS arithmetic")
    p.add_argument("--out", help="report JSON path")
    p.add_argument("--config")
    p.set_defaults(func=cmd_sim_triage)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except json.JSONDecodeError as exc:
        print(f"error: invalid JSON input: {exc}", file=sys.stderr)
        return 1
    except (TriageQError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
