"""Paired graded vs non-graded experiments and their tabular outputs."""

from __future__ import annotations

import csv
import dataclasses
import math
import statistics
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from .abc import AbcParams, ScoutPolicy, SearchResult, abc_search, candidate_nodes
from .exceptions import InvalidConfig
from .grading import DEFAULT_PRODUCTION_CUTOFF, grade_network, production_nodes
from .topology import (
    Topology,
    TopologyConfig,
    generate_topology,
    link_key,
    quadrant_partition,
    radius_for_degree,
)
from .traffic import (
    TrafficParams,
    assign_flow_rates,
    bandwidth_map,
    init_link_states,
    link_intensity,
    unit_rate,
    warm_up,
)

MODES = ("graded", "non-graded")

RAW_COLUMNS = [
    "N", "seed", "mode", "source", "dest", "route", "route_length_hops", "bottleneck_bw",
    "cycles_used", "nodes_explored", "scout_escapes", "nodes_selected", "throughput",
    "mean_route_intensity",
]


@dataclass(frozen=True)
class ExperimentConfig:
    topology: TopologyConfig = field(default_factory=TopologyConfig)
    traffic: TrafficParams = field(default_factory=TrafficParams)
    abc: AbcParams = field(default_factory=AbcParams)
    node_counts: tuple[int, ...] = (15, 16, 32, 64, 128)
    seeds: tuple[int, ...] = tuple(range(1000, 1200))
    warmup_time: float = 60.0
    # None draws a random distinct pair per seed
    fixed_pair: tuple[int, int] | None = None
    # when set, the link radius is rescaled per node count to hit this degree
    mean_degree: float | None = 8.0
    production_cutoff: int = DEFAULT_PRODUCTION_CUTOFF
    grade_weights: tuple[float, float, float, float] | None = None

    def validate(self) -> "ExperimentConfig":
        if not self.node_counts:
            raise InvalidConfig("node_counts must not be empty")
        if any(int(n) < 1 for n in self.node_counts):
            raise InvalidConfig("node counts must be >= 1")
        if self.warmup_time < 0:
            raise InvalidConfig("warmup_time must be >= 0")
        if self.mean_degree is not None and self.mean_degree <= 0:
            raise InvalidConfig("mean_degree must be > 0")
        self.topology.validate()
        self.traffic.validate()
        self.abc.validate()
        return self

    def topology_for(self, n: int, seed: int) -> TopologyConfig:
        radius = self.topology.connection_radius
        if self.mean_degree is not None:
            radius = radius_for_degree(n, self.topology.arena_side, self.mean_degree)
        return dataclasses.replace(
            self.topology, node_count=int(n), connection_radius=radius, seed=_derive(seed, n, 0)
        )


@dataclass
class RunMetrics:
    n: int
    seed: int
    mode: str
    source: int
    dest: int
    route: tuple[int, ...] | None
    bottleneck_bw: float
    cycles_used: int
    nodes_explored: int
    scout_escapes: int
    nodes_selected: int
    throughput: float
    mean_route_intensity: float
    e_over_t: float = 0.0
    wall_ms: float = field(default=0.0, compare=False)

    @property
    def found(self) -> bool:
        return self.route is not None

    @property
    def route_length(self) -> int | None:
        return None if self.route is None else len(self.route) - 1

    def row(self) -> list:
        return [
            self.n, self.seed, self.mode, self.source, self.dest,
            "-".join(map(str, self.route)) if self.route else "",
            "" if self.route is None else self.route_length,
            _fmt(self.bottleneck_bw), self.cycles_used, self.nodes_explored, self.scout_escapes,
            self.nodes_selected, _fmt(self.throughput), _fmt(self.mean_route_intensity),
        ]

    def record(self) -> dict:
        """Row as a mapping, with wall time; used for JSON output."""
        rec = dict(zip(RAW_COLUMNS, self.row()))
        rec["route"] = list(self.route) if self.route else None
        rec["route_length_hops"] = self.route_length
        for k in ("bottleneck_bw", "throughput", "mean_route_intensity"):
            v = float(rec[k])
            rec[k] = None if math.isnan(v) else v
        rec["wall_ms"] = round(self.wall_ms, 3)
        return rec


@dataclass
class RunContext:
    """Everything a graded/non-graded pair shares."""

    topology: Topology
    link_states: dict
    bandwidth: dict
    source: int
    dest: int
    grades: dict


def _derive(seed: int, n: int, stream: int) -> int:
    return int(np.random.SeedSequence([int(seed), int(n), stream]).generate_state(1, np.uint64)[0])


def _fmt(x: float) -> str:
    return repr(float(x))


def prepare_run(config: ExperimentConfig, n: int, seed: int, trace: list | None = None) -> RunContext:
    topology = generate_topology(config.topology_for(n, seed))
    params = config.traffic
    gamma = assign_flow_rates(topology, params, _derive(seed, n, 1))
    states = init_link_states(topology, gamma, params, _derive(seed, n, 2))
    warm_up(states, params, config.warmup_time, trace)

    if config.fixed_pair is not None:
        source, dest = (int(v) for v in config.fixed_pair)
        if not (0 <= source < n and 0 <= dest < n):
            raise InvalidConfig(f"fixed pair {config.fixed_pair} outside 0..{n - 1}")
    elif n == 1:
        source = dest = 0
    else:
        rng = np.random.default_rng(_derive(seed, n, 3))
        source, dest = (int(v) for v in rng.choice(n, size=2, replace=False))

    grades = grade_network(
        topology, states, config.abc.threshold_bandwidth, params, weights=config.grade_weights
    )
    return RunContext(topology, states, bandwidth_map(states, params), source, dest, grades)


def route_metrics(ctx: RunContext, route, params: TrafficParams) -> tuple[float, float]:
    """Throughput (Mb/s) and mean link intensity along ``route``.

    A packet needs one second per hop, so the payload rate delivered end to
    end is one unit rate (capped by the bottleneck) spread over the hops.
    """
    if route is None:
        return 0.0, math.nan
    hops = len(route) - 1
    if hops == 0:
        return unit_rate(params.packet_size), 0.0
    bottleneck = min(ctx.bandwidth[link_key(u, v)] for u, v in zip(route, route[1:]))
    throughput = min(unit_rate(params.packet_size), bottleneck) / hops
    intensity = [link_intensity(ctx.link_states[link_key(u, v)], params) for u, v in zip(route, route[1:])]
    return throughput, sum(intensity) / hops


def search_context(config: ExperimentConfig, ctx: RunContext, n: int, seed: int, graded: bool):
    params = dataclasses.replace(config.abc, graded_mode=graded, rng_seed=_derive(seed, n, 4))
    if graded:
        production = production_nodes(ctx.grades, config.production_cutoff)
        selected = len(candidate_nodes(ctx.topology, ctx.source, ctx.dest, production) | {ctx.source})
    else:
        production = None
        selected = n
    result = abc_search(ctx.topology, ctx.bandwidth, ctx.source, ctx.dest, params, production)
    return result, selected


def metrics_from(config, ctx, n, seed, graded, result: SearchResult, selected: int) -> RunMetrics:
    route = result.best_path.nodes if result.found else None
    throughput, intensity = route_metrics(ctx, route, config.traffic)
    return RunMetrics(
        n=n,
        seed=seed,
        mode=MODES[0] if graded else MODES[1],
        source=ctx.source,
        dest=ctx.dest,
        route=route,
        bottleneck_bw=result.best_path.bottleneck_bw if result.found else 0.0,
        cycles_used=result.cycles_used,
        nodes_explored=result.nodes_explored,
        scout_escapes=result.scout_escapes,
        nodes_selected=selected,
        throughput=throughput,
        mean_route_intensity=intensity,
        e_over_t=result.e_over_t,
        wall_ms=result.wall_ms,
    )


def run_single(config: ExperimentConfig, n: int, seed: int, graded: bool) -> RunMetrics:
    ctx = prepare_run(config, n, seed)
    result, selected = search_context(config, ctx, n, seed, graded)
    return metrics_from(config, ctx, n, seed, graded, result, selected)


def run_pair(config: ExperimentConfig, n: int, seed: int) -> tuple[RunMetrics, RunMetrics]:
    ctx = prepare_run(config, n, seed)
    out = []
    for graded in (True, False):
        result, selected = search_context(config, ctx, n, seed, graded)
        out.append(metrics_from(config, ctx, n, seed, graded, result, selected))
    return out[0], out[1]


def occupied_quadrants(config: ExperimentConfig, n: int, seed: int) -> int:
    ctx = prepare_run(config, n, seed)
    return sum(1 for s in quadrant_partition(ctx.topology, ctx.source).values() if s)


# -- aggregation -----------------------------------------------------------


def _mean(xs) -> float:
    xs = list(xs)
    return sum(xs) / len(xs) if xs else math.nan


def _paired(runs) -> list[dict]:
    by_key: dict = {}
    for r in runs:
        by_key.setdefault((r.n, r.seed), {})[r.mode] = r
    return [p for _, p in sorted(by_key.items()) if len(p) == 2]


def cycle_ratios(runs) -> list[float]:
    """graded/non-graded cycles for every pair where both modes found a route."""
    return [
        p["graded"].cycles_used / p["non-graded"].cycles_used
        for p in _paired(runs)
        if p["graded"].found and p["non-graded"].found and p["non-graded"].cycles_used > 0
    ]


def pooled_median_cycles_ratio(runs) -> float:
    ratios = cycle_ratios(runs)
    return statistics.median(ratios) if ratios else math.nan


def aggregate(runs: list[RunMetrics]) -> dict:
    """Per node count and mode summaries, recomputable from the raw rows.

    Route length, cycles and intensity are averaged over the pairs in which
    both modes found a route, so the two modes are compared on the same
    queries. Throughput averages every run, counting a missing route as 0.
    """
    paired = _paired(runs)
    out: dict = {}
    for n in sorted({r.n for r in runs}):
        pairs = [p for p in paired if p["graded"].n == n]
        both = [p for p in pairs if p["graded"].found and p["non-graded"].found]
        ratios = cycle_ratios(r for p in pairs for r in p.values())
        entry = {"pairs": len(pairs), "both_found": len(both),
                 "median_cycles_ratio": statistics.median(ratios) if ratios else math.nan}
        for mode in MODES:
            rows = [p[mode] for p in pairs]
            ok = [p[mode] for p in both]
            entry[mode] = {
                "found": sum(r.found for r in rows),
                "mean_nodes_selected": _mean(r.nodes_selected for r in rows),
                "mean_route_length": _mean(r.route_length for r in ok),
                "median_route_length": statistics.median([r.route_length for r in ok]) if ok else math.nan,
                "mean_cycles": _mean(r.cycles_used for r in ok),
                "mean_throughput": _mean(r.throughput for r in rows),
                "mean_intensity": _mean(r.mean_route_intensity for r in ok),
            }
        out[n] = entry
    return out


@dataclass
class ComparisonReport:
    config: ExperimentConfig
    runs: list[RunMetrics]
    aggregates: dict

    def pairs(self):
        return [(p["graded"], p["non-graded"]) for p in _paired(self.runs)]

    @property
    def median_cycles_ratio(self) -> float:
        """Median graded/non-graded cycle ratio pooled over every node count."""
        return pooled_median_cycles_ratio(self.runs)


def run_comparison(config: ExperimentConfig) -> ComparisonReport:
    config.validate()
    runs: list[RunMetrics] = []
    for n in config.node_counts:
        for seed in config.seeds:
            runs.extend(run_pair(config, int(n), int(seed)))
    runs.sort(key=lambda r: (r.n, r.seed, MODES.index(r.mode)))
    return ComparisonReport(config, runs, aggregate(runs))


# -- outputs ---------------------------------------------------------------


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def emit_outputs(report: ComparisonReport, out_dir) -> list[Path]:
    """Write raw_runs.csv, timing.csv, table1.csv, table2.csv and fig4.dat."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    agg = report.aggregates
    nodes = [int(n) for n in report.config.node_counts]

    raw = out / "raw_runs.csv"
    _write_csv(raw, RAW_COLUMNS, [r.row() for r in report.runs])
    timing = out / "timing.csv"
    _write_csv(timing, ["N", "seed", "mode", "wall_ms"],
               [[r.n, r.seed, r.mode, f"{r.wall_ms:.3f}"] for r in report.runs])

    t1_rows, t2_rows, fig_rows = [], [], []
    for n in nodes:
        if n not in agg:
            continue
        e = agg[n]
        for mode in MODES:
            t1_rows.append([n, mode, _fmt(e[mode]["mean_nodes_selected"]), _fmt(e[mode]["mean_route_length"])])
            fig_rows.append(f"{mode} {n} {_fmt(e[mode]['mean_throughput'])} {_fmt(e[mode]['mean_intensity'])}")
        t2_rows.append([n, _fmt(e["graded"]["mean_cycles"]), _fmt(e["non-graded"]["mean_cycles"]),
                        _fmt(e["median_cycles_ratio"])])
    t1 = out / "table1.csv"
    _write_csv(t1, ["node_count", "mode", "mean_nodes_selected", "mean_route_length"], t1_rows)
    t2 = out / "table2.csv"
    _write_csv(t2, ["node_count", "graded_mean_cycles", "non_graded_mean_cycles", "median_cycles_ratio"], t2_rows)
    fig = out / "fig4.dat"
    fig.write_text("\n".join(["# mode node_count mean_throughput mean_intensity", *fig_rows]) + "\n")
    return [raw, timing, t1, t2, fig]


def read_raw_runs(path) -> list[RunMetrics]:
    """Parse raw_runs.csv back into metrics (wall time is not stored there)."""
    runs = []
    with open(path, newline="") as fh:
        for rec in csv.DictReader(fh):
            route = tuple(int(v) for v in rec["route"].split("-")) if rec["route"] else None
            runs.append(RunMetrics(
                n=int(rec["N"]), seed=int(rec["seed"]), mode=rec["mode"],
                source=int(rec["source"]), dest=int(rec["dest"]), route=route,
                bottleneck_bw=float(rec["bottleneck_bw"]), cycles_used=int(rec["cycles_used"]),
                nodes_explored=int(rec["nodes_explored"]), scout_escapes=int(rec["scout_escapes"]),
                nodes_selected=int(rec["nodes_selected"]), throughput=float(rec["throughput"]),
                mean_route_intensity=float(rec["mean_route_intensity"]),
            ))
    return runs


# -- configuration files ---------------------------------------------------


def _section(cls, data: dict | None):
    data = dict(data or {})
    known = {f.name for f in dataclasses.fields(cls)}
    unknown = set(data) - known
    if unknown:
        raise InvalidConfig(f"unknown {cls.__name__} keys: {sorted(unknown)}")
    for key, value in list(data.items()):
        if isinstance(value, list):
            data[key] = tuple(tuple(v) if isinstance(v, list) else v for v in value)
    return cls(**data)


def config_from_dict(data: dict) -> ExperimentConfig:
    data = dict(data or {})
    try:
        topo = _section(TopologyConfig, data.pop("topology", None))
        traffic_raw = dict(data.pop("traffic", None) or {})
        if traffic_raw.get("demands"):
            traffic_raw["demands"] = {
                (int(d["source"]), int(d["dest"])): float(d["rate"]) for d in traffic_raw["demands"]
            }
        traffic = _section(TrafficParams, traffic_raw)
        abc_raw = dict(data.pop("abc", None) or {})
        if "scout_policy" in abc_raw:
            abc_raw["scout_policy"] = ScoutPolicy(abc_raw["scout_policy"])
        abc = _section(AbcParams, abc_raw)
        seeds = data.get("seeds")
        if isinstance(seeds, dict):
            # {start: s, count: k} expands to k consecutive seeds
            data["seeds"] = list(range(int(seeds["start"]), int(seeds["start"]) + int(seeds["count"])))
        exp = _section(ExperimentConfig, data)
    except (TypeError, ValueError, KeyError) as exc:
        raise InvalidConfig(str(exc)) from exc
    return dataclasses.replace(exp, topology=topo, traffic=traffic, abc=abc).validate()


def load_config(path) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InvalidConfig(f"cannot read config {path}: {exc}") from exc
    try:
        data = yaml.safe_load(text) or {}
    except yaml.YAMLError as exc:
        raise InvalidConfig(f"malformed config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise InvalidConfig("config root must be a mapping")
    return config_from_dict(data)
