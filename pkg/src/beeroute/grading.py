"""Agent QoS snapshots and the two-level node grading.

Level 1 scores each node on an integer scale from -3 (least productive) to
+3 (most productive) from its QoS snapshot; nodes below the production
cutoff are kept out of graded routing. Level 2 picks, among the feasible
neighbours of a node, the one reached over the widest link.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, fields

from ._validation import check_node
from .exceptions import InvalidConfig, NoFeasibleLink
from .topology import Topology, link_key
from .traffic import TrafficParams, link_bandwidth, link_intensity

GRADE_MIN, GRADE_MAX = -3, 3
DEFAULT_PRODUCTION_CUTOFF = 1


@dataclass(frozen=True)
class QosSnapshot:
    bandwidth_availability: float
    congested: bool
    delay_proxy: float
    node_density: float
    resource_allocation: float


@dataclass(frozen=True, order=True)
class Grade:
    value: int

    def __post_init__(self):
        if not GRADE_MIN <= self.value <= GRADE_MAX:
            raise ValueError(f"grade {self.value} outside [{GRADE_MIN}, {GRADE_MAX}]")

    def __int__(self):
        return self.value


@dataclass(frozen=True)
class GradingNorms:
    """Worst/best bounds used to put each metric on a 0..1 scale.

    ``weights`` apply to (bandwidth, delay, density, resource). The congestion
    flag is not averaged in; it caps the grade instead.
    """

    bandwidth: tuple[float, float] = (0.0, 120.0)
    delay: tuple[float, float] = (0.0, 5.0)
    density: tuple[float, float] = (0.0, 1.0)
    resource: tuple[float, float] = (0.0, 1.0)
    weights: tuple[float, float, float, float] = (1.0, 1.0, 1.0, 1.0)

    def __post_init__(self):
        for f in ("bandwidth", "delay", "density", "resource"):
            lo, hi = getattr(self, f)
            if not (math.isfinite(lo) and math.isfinite(hi)) or lo > hi:
                raise InvalidConfig(f"bad {f} bounds ({lo}, {hi})")
        if len(self.weights) != 4 or any(w < 0 for w in self.weights) or sum(self.weights) <= 0:
            raise InvalidConfig(f"bad grading weights {self.weights}")

    @classmethod
    def for_network(cls, topology: Topology, snapshots, threshold: float, weights=None) -> "GradingNorms":
        """Bounds anchored on physical limits of ``topology``.

        Bandwidth runs from zero to the largest link capacity; delay from zero
        to the intensity of a link loaded down to ``threshold``; density from
        zero to the busiest observed node.
        """
        cap_max = max((l.capacity for l in topology.links), default=1.0)
        thr = max(threshold, 1e-9)
        delay_hi = max((cap_max - thr) / thr, 1e-9)
        dens_hi = max((s.node_density for s in snapshots), default=0.0)
        return cls(
            bandwidth=(0.0, cap_max),
            delay=(0.0, delay_hi),
            density=(0.0, dens_hi),
            resource=(0.0, 1.0),
            weights=tuple(weights) if weights is not None else (1.0, 1.0, 1.0, 1.0),
        )


def collect_qos(
    topology: Topology,
    link_states: dict,
    node: int,
    threshold: float,
    params: TrafficParams | None = None,
) -> QosSnapshot:
    params = params or TrafficParams()
    node = check_node(topology, node)
    resource = topology.nodes[node].resource_allocation
    incident = [link_states[link_key(node, v)] for v in sorted(topology.adjacency[node])]
    if not incident:
        return QosSnapshot(0.0, True, 0.0, 0.0, resource)
    bws = [link_bandwidth(s, params) for s in incident]
    intensities = [link_intensity(s, params) for s in incident]
    arrivals = sum(s.gamma for s in incident) * params.update_interval
    return QosSnapshot(
        bandwidth_availability=sum(bws) / len(bws),
        congested=any(bw < threshold for bw in bws),
        delay_proxy=sum(intensities) / len(intensities),
        node_density=arrivals,
        resource_allocation=resource,
    )


def _unit(x: float, bounds: tuple[float, float]) -> float | None:
    lo, hi = bounds
    if hi <= lo:
        return None  # metric carries no information on this network
    x = min(max(x, lo), hi)
    return (x - lo) / (hi - lo)


def _round_half_away(x: float) -> int:
    return int(math.copysign(math.floor(abs(x) + 0.5), x))


def level1_grade(snapshot: QosSnapshot, norms: GradingNorms) -> Grade:
    scores = [
        _unit(snapshot.bandwidth_availability, norms.bandwidth),
        _unit(snapshot.delay_proxy, norms.delay),
        _unit(snapshot.node_density, norms.density),
        _unit(snapshot.resource_allocation, norms.resource),
    ]
    # lower delay and lower density are better
    for i in (1, 2):
        if scores[i] is not None:
            scores[i] = 1.0 - scores[i]
    used = [(s, w) for s, w in zip(scores, norms.weights) if s is not None and w > 0]
    if used:
        mean = sum(s * w for s, w in used) / sum(w for _, w in used)
    else:
        mean = 0.5
    value = _round_half_away(GRADE_MIN + (GRADE_MAX - GRADE_MIN) * mean)
    value = min(max(value, GRADE_MIN), GRADE_MAX)
    if snapshot.congested:
        value = min(value, -1)
    return Grade(value)


def is_production_node(grade, cutoff: int = DEFAULT_PRODUCTION_CUTOFF) -> bool:
    return int(grade) >= cutoff


def level2_weights(current: int, candidates, bandwidth: dict, threshold: float) -> dict[int, float]:
    """Normalised bandwidth share ``P(l_j)`` over the feasible candidates."""
    feasible = {j: bandwidth[link_key(current, j)] for j in candidates}
    feasible = {j: bw for j, bw in feasible.items() if bw >= threshold}
    total = sum(feasible.values())
    if not feasible:
        raise NoFeasibleLink(f"no link from {current} clears threshold {threshold}")
    if total == 0:
        return {j: 1.0 / len(feasible) for j in feasible}
    return {j: bw / total for j, bw in feasible.items()}


def level2_select(current: int, candidates, bandwidth: dict, threshold: float) -> int:
    """Neighbour reached over the widest feasible link; ties go to the lower id."""
    if not candidates:
        raise ValueError("level2_select needs at least one candidate")
    weights = level2_weights(current, candidates, bandwidth, threshold)
    return min(weights, key=lambda j: (-weights[j], j))


def grade_network(
    topology: Topology,
    link_states: dict,
    threshold: float,
    params: TrafficParams | None = None,
    norms: GradingNorms | None = None,
    weights=None,
) -> dict[int, tuple[QosSnapshot, Grade]]:
    snaps = [collect_qos(topology, link_states, n, threshold, params) for n in range(topology.node_count)]
    if norms is None:
        norms = GradingNorms.for_network(topology, snaps, threshold, weights)
    return {n: (s, level1_grade(s, norms)) for n, s in enumerate(snaps)}


def production_nodes(grades: dict, cutoff: int = DEFAULT_PRODUCTION_CUTOFF) -> set[int]:
    return {n for n, (_, g) in grades.items() if is_production_node(g, cutoff)}


def write_grades_csv(grades: dict, path) -> None:
    names = [f.name for f in fields(QosSnapshot)]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["node_id", "grade", *names])
        for n in sorted(grades):
            snap, grade = grades[n]
            w.writerow([n, grade.value, *(getattr(snap, k) for k in names)])
