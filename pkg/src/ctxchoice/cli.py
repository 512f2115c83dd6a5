"""Batch entry points over the engine.

Subcommands: analyze, tipping, learn, detect, adapt, simulate, serve.
Exit codes: 0 success, 1 domain error (bad files, invalid items), 2
usage error (argparse). All subcommands accept --format json for
machine-readable output; json output carries no timestamps, so
identical invocations are byte-identical.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import DEFAULT_CONFIG, EngineConfig
from .detector import detector_report
from .errors import EngineError
from .intervention import DetectorContext, adapt_choice_set
from .learner import (
    ChoiceLog,
    MatrixEstimate,
    constraints_from_log,
    estimate_matrix,
)
from .model import UtilityMatrix, best_choice, utility_table
from .reversal import reversal_report
from .simulate import ExperimentConfig, run_experiment, summary_table


def _split_ids(raw: str) -> list[str]:
    return [part.strip() for part in raw.split(",") if part.strip()]


def _emit(doc: dict, fmt: str, lines) -> None:
    if fmt == "json":
        print(json.dumps(doc, indent=2))
    else:
        for line in lines:
            print(line)


def _cmd_analyze(args) -> int:
    matrix = UtilityMatrix.load(args.matrix)
    space = _split_ids(args.space)
    table = utility_table(matrix, space)
    winner = best_choice(matrix, space)
    doc = {"space": list(table), "table": table, "winner": winner}
    _emit(
        doc,
        args.format,
        [f"{item:>12}  {value:g}" for item, value in table.items()]
        + [f"{'winner':>12}  {winner}"],
    )
    return 0


def _cmd_tipping(args) -> int:
    matrix = UtilityMatrix.load(args.matrix)
    base = set(_split_ids(args.base)) if args.base else set()
    base |= {args.current, args.target}
    doc = reversal_report(
        matrix,
        args.current,
        args.target,
        base,
        _split_ids(args.pool),
        validate_full=args.validate_full,
        cap=args.cap,
    )
    _emit(
        doc,
        args.format,
        [
            f"gap({args.current} -> {args.target}) in base: {doc['gap']:g}",
            "positive-d items: "
            + (
                ", ".join(f"{d['item']} ({d['delta']:g})" for d in doc["positive_d"])
                or "none"
            ),
            "tipping base: "
            + (", ".join("{" + ",".join(s) + "}" for s in doc["base"]) or "empty"),
            f"outcome with all positive-d added: {doc['outcome_class']}",
        ],
    )
    return 0


def _cmd_learn(args) -> int:
    log = ChoiceLog.load(args.log)
    if args.catalog:
        items = _split_ids(args.catalog)
    else:
        seen: list[str] = []
        for obs in log:
            for item in sorted(obs.space):
                if item not in seen:
                    seen.append(item)
        items = seen
    if not items:
        print("error: empty log and no --catalog given", file=sys.stderr)
        return 1
    from .model import Catalog

    catalog = Catalog(tuple(items))
    config = _engine_config(args)
    constraints = constraints_from_log(log, catalog, config)
    estimate = estimate_matrix(constraints, catalog, bounds=config.bounds)
    doc = estimate.to_dict()
    if args.out:
        Path(args.out).write_text(json.dumps(doc, indent=2) + "\n")
    _emit(
        doc,
        args.format,
        [
            f"catalog: {', '.join(items)}",
            f"constraints: {len(constraints)}",
            f"margin: {estimate.margin:g}",
            f"violated: {len(estimate.violated)}",
        ]
        + ([f"written: {args.out}"] if args.out else []),
    )
    return 0


def _cmd_detect(args) -> int:
    logs = {}
    for path in args.log:
        log = ChoiceLog.load(path)
        logs[log.user] = log
    items = _split_ids(args.catalog) if args.catalog else None
    if items is None:
        seen: list[str] = []
        for log in logs.values():
            for obs in log:
                for item in sorted(obs.space):
                    if item not in seen:
                        seen.append(item)
        items = seen
    if not items:
        print("error: empty logs and no --catalog given", file=sys.stderr)
        return 1
    from .model import Catalog

    catalog = Catalog(tuple(items))
    config = _engine_config(args)
    space = set(_split_ids(args.space)) if args.space else None
    doc = detector_report(logs, catalog, config, space=space)
    _emit(
        doc,
        args.format,
        [
            f"flags: {len(doc['flags'])}",
            f"regret risk: {doc['regret_risk']:g}",
            "suspects: "
            + (
                ", ".join(f"{s['item']} (lift {s['lift']:.2f})" for s in doc["suspects"])
                or "none"
            ),
        ],
    )
    return 0


def _cmd_adapt(args) -> int:
    doc = json.loads(Path(args.estimate).read_text())
    estimate = MatrixEstimate.from_dict(doc)
    context = DetectorContext()
    if args.log:
        context = DetectorContext(log=ChoiceLog.load(args.log))
    plan = adapt_choice_set(
        estimate,
        _split_ids(args.pool),
        args.k,
        required=_split_ids(args.required) if args.required else (),
        protect=args.protect,
        detector_context=context,
        rho_max=args.rho_max,
    )
    out = plan.to_dict()
    _emit(
        out,
        args.format,
        [
            f"choice set: {', '.join(out['choice_set'])}",
            f"predicted winner: {out['predicted_winner']}",
            f"safety: {out['safety']}",
            f"alternatives considered: {out['alternatives_considered']}",
        ],
    )
    return 0


def _cmd_simulate(args) -> int:
    config = ExperimentConfig.load(args.config)
    report = run_experiment(config)
    if args.out:
        Path(args.out).write_text(json.dumps(report, indent=2) + "\n")
    if args.format == "json":
        print(json.dumps(report, indent=2))
    else:
        print(summary_table(report))
        if report["detector"] is not None:
            d = report["detector"]
            print(
                f"detector: precision={d['flags_precision']} "
                f"recall={d['flags_recall']} top_suspect={d['suspect_top']}"
            )
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app, resolve_service_settings

    settings = resolve_service_settings(
        config_path=args.config,
        port=args.port,
        data_dir=args.data_dir,
        static_dir=args.static_dir,
    )
    app = create_app(
        data_dir=settings["data_dir"],
        defaults=settings["defaults"],
        static_dir=settings["static_dir"],
    )
    uvicorn.run(app, host=args.host, port=settings["port"], log_level="info")
    return 0


def _engine_config(args) -> EngineConfig:
    overrides = {}
    for key in (
        "theta",
        "dominance_min_support",
        "min_users",
        "min_lift",
        "freq_min_support",
        "near_tie_band",
        "epsilon_eq",
        "epsilon_diag",
        "bounds",
    ):
        value = getattr(args, key, None)
        if value is not None:
            overrides[key] = value
    merged = dict(DEFAULT_CONFIG.to_dict())
    merged.update(overrides)
    return EngineConfig.from_dict(merged)


def _add_threshold_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--theta", type=float, default=None)
    parser.add_argument("--dominance-min-support", dest="dominance_min_support", type=int, default=None)
    parser.add_argument("--min-users", dest="min_users", type=int, default=None)
    parser.add_argument("--min-lift", dest="min_lift", type=float, default=None)
    parser.add_argument("--freq-min-support", dest="freq_min_support", type=int, default=None)
    parser.add_argument("--near-tie-band", dest="near_tie_band", type=float, default=None)
    parser.add_argument("--epsilon-eq", dest="epsilon_eq", type=float, default=None)
    parser.add_argument("--epsilon-diag", dest="epsilon_diag", type=float, default=None)
    parser.add_argument("--bounds", type=float, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ctxchoice",
        description="Context-dependent choice engine: analyze, learn, detect, adapt, simulate, serve.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="utility table and winner for a space")
    p.add_argument("--matrix", required=True)
    p.add_argument("--space", required=True, help="comma-separated item ids")
    p.add_argument("--format", choices=("table", "json"), default="table")
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("tipping", help="minimal additions that reverse a choice")
    p.add_argument("--matrix", required=True)
    p.add_argument("--current", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--pool", required=True, help="comma-separated external item ids")
    p.add_argument("--base", default=None, help="base space (defaults to current,target)")
    p.add_argument("--validate-full", action="store_true", dest="validate_full")
    p.add_argument("--cap", type=int, default=16)
    p.add_argument("--format", choices=("table", "json"), default="table")
    p.set_defaults(func=_cmd_tipping)

    p = sub.add_parser("learn", help="fit a matrix estimate from a choice log")
    p.add_argument("--log", required=True, help="JSONL observation file")
    p.add_argument("--catalog", default=None, help="comma-separated ids (default: from log)")
    p.add_argument("--out", default=None, help="write the estimate JSON here")
    p.add_argument("--format", choices=("table", "json"), default="table")
    _add_threshold_flags(p)
    p.set_defaults(func=_cmd_learn)

    p = sub.add_parser("detect", help="bias-detector report over one or more logs")
    p.add_argument("--log", required=True, action="append", help="JSONL log (repeat per user)")
    p.add_argument("--catalog", default=None)
    p.add_argument("--space", default=None, help="space for the regret-risk figure")
    p.add_argument("--format", choices=("table", "json"), default="table")
    _add_threshold_flags(p)
    p.set_defaults(func=_cmd_detect)

    p = sub.add_parser("adapt", help="generate a protected choice set")
    p.add_argument("--estimate", required=True, help="estimate JSON (from learn)")
    p.add_argument("--pool", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--required", default=None)
    p.add_argument("--protect", default=None)
    p.add_argument("--log", default=None, help="history log for regret checks")
    p.add_argument("--rho-max", dest="rho_max", type=float, default=DEFAULT_CONFIG.rho_max)
    p.add_argument("--format", choices=("table", "json"), default="table")
    p.set_defaults(func=_cmd_adapt)

    p = sub.add_parser("simulate", help="run a seeded experiment config")
    p.add_argument("--config", required=True, help="experiment config JSON")
    p.add_argument("--out", default=None, help="write the report JSON here")
    p.add_argument("--format", choices=("table", "json"), default="table")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("serve", help="start the session service")
    p.add_argument("--config", default=None, help="service config JSON")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=None)
    p.add_argument("--data-dir", dest="data_dir", default=None)
    p.add_argument("--static-dir", dest="static_dir", default=None)
    p.set_defaults(func=_cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except EngineError as exc:
        print(f"error: {exc.message}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
