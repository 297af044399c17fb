"""Command line entry point: ``beeroute generate|route|compare|sweep``.

Exit codes: 0 success, 1 bad configuration, 2 file system failure.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import logging
import math
import sys
from pathlib import Path

from .exceptions import InvalidConfig
from .grading import write_grades_csv
from .harness import (
    MODES,
    RAW_COLUMNS,
    ExperimentConfig,
    emit_outputs,
    load_config,
    prepare_run,
    run_comparison,
    run_single,
)
from .traffic import write_trajectory_csv

log = logging.getLogger("beeroute")

EXIT_OK, EXIT_CONFIG, EXIT_IO = 0, 1, 2

# sweepable parameters: "section.field" -> converter
SWEEPABLE = {
    "abc.threshold_bandwidth": float,
    "abc.max_cycles": int,
    "abc.stall_cycles": int,
    "traffic.lambda_se": float,
    "traffic.alpha": float,
    "traffic.mu": float,
    "mean_degree": float,
    "production_cutoff": int,
    "warmup_time": float,
}

SWEEP_COLUMNS = [
    "param", "value", "node_count", "mode", "pairs", "found", "mean_nodes_selected",
    "mean_route_length", "mean_cycles", "mean_throughput", "mean_intensity", "median_cycles_ratio",
]


def _base_config(args) -> ExperimentConfig:
    config = load_config(args.config) if args.config else ExperimentConfig().validate()
    return config


def _with_runs(config: ExperimentConfig, args) -> ExperimentConfig:
    changes = {}
    if args.nodes:
        changes["node_counts"] = tuple(args.nodes)
    if args.seed is not None or args.seeds is not None:
        start = args.seed if args.seed is not None else (config.seeds[0] if config.seeds else 0)
        count = args.seeds if args.seeds is not None else len(config.seeds)
        changes["seeds"] = tuple(range(start, start + count))
    return dataclasses.replace(config, **changes).validate() if changes else config


def _dump(records: list[dict], columns, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(records if len(records) != 1 else records[0], indent=1) + "\n"
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n", extrasaction="ignore")
    w.writeheader()
    for rec in records:
        w.writerow({k: ("" if v is None else "-".join(map(str, v)) if isinstance(v, list) else v)
                    for k, v in rec.items()})
    return buf.getvalue()


def _clean(x):
    return None if isinstance(x, float) and math.isnan(x) else x


# -- subcommands -----------------------------------------------------------


def cmd_generate(args) -> int:
    config = _base_config(args)
    n = args.nodes[0] if args.nodes else config.node_counts[0]
    seed = args.seed if args.seed is not None else (config.seeds[0] if config.seeds else 0)
    trace: list = []
    ctx = prepare_run(config, n, seed, trace)
    if args.out is None:
        sys.stdout.write(ctx.topology.dumps() + "\n")
        return EXIT_OK
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    ctx.topology.save(out / "topology.json")
    write_grades_csv(ctx.grades, out / "grades.csv")
    write_trajectory_csv(trace, out / "trajectory.csv")
    log.info("wrote topology, grades and trajectory for N=%d seed=%d to %s", n, seed, out)
    return EXIT_OK


def cmd_route(args) -> int:
    config = _base_config(args)
    if args.source is not None or args.dest is not None:
        if args.source is None or args.dest is None:
            raise InvalidConfig("--source and --dest must be given together")
        config = dataclasses.replace(config, fixed_pair=(args.source, args.dest)).validate()
    n = args.nodes[0] if args.nodes else config.node_counts[0]
    seed = args.seed if args.seed is not None else (config.seeds[0] if config.seeds else 0)
    metrics = run_single(config, n, seed, args.graded)
    text = _dump([metrics.record()], RAW_COLUMNS + ["wall_ms"], args.format)
    sys.stdout.write(text)
    if args.out is not None:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / f"route.{args.format}").write_text(text)
    return EXIT_OK


def _summary_records(report, param=None, value=None) -> list[dict]:
    recs = []
    for n, e in report.aggregates.items():
        for mode in MODES:
            m = e[mode]
            recs.append({
                "param": param, "value": value, "node_count": n, "mode": mode,
                "pairs": e["pairs"], "found": m["found"],
                "mean_nodes_selected": _clean(m["mean_nodes_selected"]),
                "mean_route_length": _clean(m["mean_route_length"]),
                "mean_cycles": _clean(m["mean_cycles"]),
                "mean_throughput": _clean(m["mean_throughput"]),
                "mean_intensity": _clean(m["mean_intensity"]),
                "median_cycles_ratio": _clean(e["median_cycles_ratio"]),
            })
    return recs


def cmd_compare(args) -> int:
    config = _with_runs(_base_config(args), args)
    report = run_comparison(config)
    if args.out is not None:
        for path in emit_outputs(report, args.out):
            log.info("wrote %s", path)
    sys.stdout.write(_dump(_summary_records(report), SWEEP_COLUMNS[2:], args.format))
    return EXIT_OK


def _set_param(config: ExperimentConfig, name: str, value):
    if "." in name:
        section, key = name.split(".", 1)
        inner = dataclasses.replace(getattr(config, section), **{key: value})
        return dataclasses.replace(config, **{section: inner}).validate()
    return dataclasses.replace(config, **{name: value}).validate()


def cmd_sweep(args) -> int:
    if args.param not in SWEEPABLE:
        raise InvalidConfig(f"cannot sweep {args.param!r}; choose from {sorted(SWEEPABLE)}")
    try:
        values = [SWEEPABLE[args.param](v) for v in args.values]
    except ValueError as exc:
        raise InvalidConfig(f"bad sweep value: {exc}") from exc
    config = _with_runs(_base_config(args), args)
    recs = []
    for value in values:
        report = run_comparison(_set_param(config, args.param, value))
        recs.extend(_summary_records(report, args.param, value))
        if args.out is not None:
            emit_outputs(report, Path(args.out) / f"{args.param}={value}")
    text = _dump(recs, SWEEP_COLUMNS, args.format)
    if args.out is not None:
        Path(args.out).mkdir(parents=True, exist_ok=True)
        (Path(args.out) / f"sweep.{args.format}").write_text(text)
    sys.stdout.write(text)
    return EXIT_OK


# -- parser ----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML experiment config (see configs/example.yaml)")
    common.add_argument("--seed", type=int, help="seed (first seed for compare/sweep)")
    common.add_argument("--nodes", type=int, nargs="+", help="node count(s)")
    common.add_argument("--out", help="output directory")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="beeroute", description="Graded bee colony routing experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", parents=[common], help="build one network and write its files")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("route", parents=[common], help="run one search and print its result row")
    p.add_argument("--graded", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--source", type=int)
    p.add_argument("--dest", type=int)
    p.set_defaults(func=cmd_route)

    for name, func, text in (
        ("compare", cmd_compare, "paired graded vs non-graded runs over sizes and seeds"),
        ("sweep", cmd_sweep, "repeat compare for each value of one parameter"),
    ):
        p = sub.add_parser(name, parents=[common], help=text)
        p.add_argument("--seeds", type=int, help="number of consecutive seeds")
        p.set_defaults(func=func)
        if name == "sweep":
            p.add_argument("--param", required=True, help=f"one of {', '.join(sorted(SWEEPABLE))}")
            p.add_argument("--values", nargs="+", required=True)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except InvalidConfig as exc:
        print(f"beeroute: bad config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"beeroute: I/O failure: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
