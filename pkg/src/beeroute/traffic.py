"""Per-link load dynamics under an open Jackson flow model.

Bandwidth is measured in Mb/s throughout. A flow occupies one *unit rate*,
the bandwidth needed to push one fixed-size packet per second, so a link
carrying ``T`` flows consumes ``T * unit_rate(params)`` Mb/s.
"""

from __future__ import annotations

import csv
import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from ._validation import (
    check_count,
    check_positive,
    check_probability_row,
    check_random_state,
)
from .exceptions import InvalidConfig, SaturatedLink
from .topology import Topology, link_key

PACKET_SIZE_BYTES = 262_144  # 250 KB


@dataclass(frozen=True)
class TrafficParams:
    alpha: float = 2.0
    mu: float = 1.0 / 60.0
    lambda_se: float = 0.02
    demand_pairs: int | None = None
    demands: dict | None = None
    packet_size: int = PACKET_SIZE_BYTES
    exit_prob: float = 0.5
    routing_matrix: tuple | None = None
    update_interval: float = 30.0

    def validate(self) -> "TrafficParams":
        check_positive(self.alpha, "alpha", strict=False)
        check_positive(self.mu, "mu")
        check_positive(self.lambda_se, "lambda_se", strict=False)
        check_count(self.packet_size, "packet_size")
        check_positive(self.update_interval, "update_interval")
        if not 0.0 <= self.exit_prob <= 1.0:
            raise InvalidConfig(f"exit_prob must lie in [0, 1], got {self.exit_prob}")
        if self.demand_pairs is not None:
            check_count(self.demand_pairs, "demand_pairs", minimum=0)
        return self


@dataclass
class LinkState:
    key: tuple[int, int]
    capacity: float
    load: float = 0.0  # T_l, flows currently routed over the link
    gamma: float = 0.0  # flow arrival rate to the link
    last_update: float = 0.0


def unit_rate(packet_size: int = PACKET_SIZE_BYTES) -> float:
    """Mb/s consumed by one flow sending one packet per second."""
    return packet_size * 8 / 1e6


def link_load_closed_form(T0: float, gamma: float, mu: float, t: float) -> float:
    if not mu > 0:
        raise ValueError(f"mu must be > 0, got {mu}")
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    decay = math.exp(-mu * t)
    return T0 * decay + (gamma / mu) * (1.0 - decay)


def link_load_derivative(T: float, gamma: float, mu: float) -> float:
    if not mu > 0:
        raise ValueError(f"mu must be > 0, got {mu}")
    return gamma - T * mu


def available_bandwidth(capacity: float, load_bw: float) -> float:
    if load_bw < 0:
        raise ValueError(f"load must be >= 0, got {load_bw}")
    return max(capacity - load_bw, 0.0)


def traffic_intensity(packet_size: float, load: float, available: float) -> float:
    """Utilisation ``unit_rate * load / available``; dimensionless."""
    if available <= 0:
        raise SaturatedLink("no available bandwidth on link")
    return unit_rate(packet_size) * load / available


def link_bandwidth(state: LinkState, params: TrafficParams) -> float:
    return available_bandwidth(state.capacity, state.load * unit_rate(params.packet_size))


def link_intensity(state: LinkState, params: TrafficParams) -> float:
    """Intensity of ``state``; ``inf`` when the link is saturated."""
    try:
        return traffic_intensity(params.packet_size, state.load, link_bandwidth(state, params))
    except SaturatedLink:
        return math.inf


def bandwidth_map(states: dict, params: TrafficParams) -> dict[tuple[int, int], float]:
    return {key: link_bandwidth(s, params) for key, s in states.items()}


# -- flow assignment -------------------------------------------------------


def routing_matrix(topology: Topology, params: TrafficParams) -> np.ndarray:
    """Node-to-node routing probabilities ``p_ij``.

    Without an explicit matrix each node forwards to its neighbours uniformly
    and lets a job leave the cell with probability ``exit_prob``.
    """
    n = topology.node_count
    if params.routing_matrix is not None:
        P = np.asarray(params.routing_matrix, dtype=float)
        if P.shape != (n, n):
            raise InvalidConfig(f"routing matrix must be {n}x{n}, got {P.shape}")
        for i in range(n):
            row = check_probability_row(P[i], f"routing row {i}")
            off_link = [j for j in np.flatnonzero(row) if not topology.has_link(i, int(j))]
            if off_link:
                raise InvalidConfig(f"routing row {i} sends traffic off-link to {off_link}")
        return P
    P = np.zeros((n, n))
    for i in range(n):
        nbrs = sorted(topology.adjacency[i])
        if nbrs:
            P[i, nbrs] = (1.0 - params.exit_prob) / len(nbrs)
    return P


def exit_probabilities(P: np.ndarray) -> np.ndarray:
    return 1.0 - P.sum(axis=1)


def jackson_throughputs(P: np.ndarray, external: np.ndarray) -> np.ndarray:
    """Solve the traffic equations ``L = external + P^T L``."""
    n = P.shape[0]
    try:
        return np.linalg.solve(np.eye(n) - P.T, external)
    except np.linalg.LinAlgError as exc:
        raise InvalidConfig("routing matrix traps traffic (no exit path)") from exc


def _bfs_counts(topology: Topology, start: int):
    dist = [-1] * topology.node_count
    sigma = [0] * topology.node_count
    dist[start], sigma[start] = 0, 1
    queue = deque([start])
    while queue:
        u = queue.popleft()
        for v in topology.adjacency[u]:
            if dist[v] < 0:
                dist[v] = dist[u] + 1
                queue.append(v)
            if dist[v] == dist[u] + 1:
                sigma[v] += sigma[u]
    return dist, sigma


def draw_demands(topology: Topology, params: TrafficParams, seed) -> dict:
    if params.demands is not None:
        return {(int(s), int(e)): float(r) for (s, e), r in params.demands.items()}
    n = topology.node_count
    if n < 2 or params.lambda_se == 0:
        return {}
    rng = check_random_state(seed)
    count = n if params.demand_pairs is None else params.demand_pairs
    demands: dict = {}
    for _ in range(count):
        s, e = (int(v) for v in rng.choice(n, size=2, replace=False))
        demands[(s, e)] = demands.get((s, e), 0.0) + params.lambda_se
    return demands


def assign_flow_rates(topology: Topology, params: TrafficParams, seed=None) -> dict:
    """Arrival rate ``gamma`` for every link.

    External cell arrivals (rate ``alpha``, spread uniformly over nodes) move
    through the Jackson routing matrix; each pairwise demand ``(s, e)`` is
    split evenly across all minimum-hop ``s -> e`` paths. Demand pairs are
    drawn from ``seed`` unless listed explicitly in ``params.demands``.
    """
    params.validate()
    gamma = {link.key: 0.0 for link in topology.links}
    n = topology.node_count

    if params.alpha > 0 and topology.links:
        P = routing_matrix(topology, params)
        lam = jackson_throughputs(P, np.full(n, params.alpha / n))
        for (a, b) in gamma:
            gamma[(a, b)] += lam[a] * P[a, b] + lam[b] * P[b, a]

    for (s, e), rate in sorted(draw_demands(topology, params, seed).items()):
        if s == e or rate == 0:
            continue
        dist_s, sig_s = _bfs_counts(topology, s)
        if dist_s[e] < 0:
            continue  # unroutable demand
        dist_e, sig_e = _bfs_counts(topology, e)
        hops = dist_s[e]
        for (a, b) in gamma:
            for u, v in ((a, b), (b, a)):
                if dist_s[u] >= 0 and dist_e[v] >= 0 and dist_s[u] + 1 + dist_e[v] == hops:
                    gamma[(a, b)] += rate * sig_s[u] * sig_e[v] / sig_s[e]
    return gamma


# -- state evolution -------------------------------------------------------


def init_link_states(topology: Topology, gamma: dict, params: TrafficParams, seed=None) -> dict:
    """Initial link states with a random background load.

    Each link starts carrying a uniform number of flows between zero and the
    count that would saturate it.
    """
    rng = check_random_state(seed)
    r = unit_rate(params.packet_size)
    states = {}
    for link in topology.links:
        T0 = float(rng.uniform(0.0, link.capacity / r))
        states[link.key] = LinkState(
            key=link.key, capacity=link.capacity, load=T0, gamma=float(gamma.get(link.key, 0.0))
        )
    return states


def advance_traffic(states: dict, params: TrafficParams, now: float) -> dict:
    """Refresh every link whose last update is at least one interval old."""
    updates = {}
    for key, s in states.items():
        if now < s.last_update:
            raise ValueError(f"time went backwards on link {key}")
        elapsed = now - s.last_update
        if elapsed > 0 and elapsed >= params.update_interval:
            updates[key] = link_load_closed_form(s.load, s.gamma, params.mu, elapsed)
    for key, load in updates.items():
        states[key].load = load
        states[key].last_update = now
    return states


def warm_up(states: dict, params: TrafficParams, duration: float, trace: list | None = None) -> dict:
    """Advance all links through whole update intervals up to ``duration``.

    When ``trace`` is given, one ``(time, a, b, load, available, intensity)``
    row per link and tick is appended to it.
    """
    ticks = int(math.floor(duration / params.update_interval + 1e-9))
    start = max((s.last_update for s in states.values()), default=0.0)
    for k in range(1, ticks + 1):
        now = start + k * params.update_interval
        advance_traffic(states, params, now)
        if trace is not None:
            for key in sorted(states):
                s = states[key]
                trace.append(
                    (now, key[0], key[1], s.load, link_bandwidth(s, params), link_intensity(s, params))
                )
    return states


def write_trajectory_csv(rows, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["time", "link_a", "link_b", "T_l", "B_a", "intensity"])
        for row in rows:
            w.writerow([repr(float(row[0])), row[1], row[2], *(repr(float(v)) for v in row[3:])])


def link_for(states: dict, u: int, v: int) -> LinkState:
    return states[link_key(u, v)]
