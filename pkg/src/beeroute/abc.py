"""Artificial Bee Colony path search over a bandwidth-weighted topology.

Every employed bee holds a food source, the best complete path it has
found, whose nectar is the path's bottleneck available bandwidth. One
colony cycle moves every bee by one hop:

* each employed bee extends its current trip with fitness-proportional
  (roulette) selection; a finished trip is compared with the bee's food
  source and the better one is kept, and the next trip regrows a random
  prefix of that food source;
* each onlooker picks one of the reported trips with the same
  fitness-proportional law and proposes the widest-link alternative for its
  latest hop, which the trip adopts when it widens the bottleneck;
* a bee that dead-ends becomes a scout and restarts from the source; in
  graded mode, while no route is known, a scout may also use nodes from
  neighbouring quadrants.

The widest complete path seen so far is memorised. The colony stops after
``max(stall_cycles, best route hops)`` cycles without progress, or after
``max_cycles`` cycles.
"""

from __future__ import annotations

import enum
import math
import time
from dataclasses import dataclass, field

import numpy as np

from ._validation import check_count, check_node, check_positive
from .exceptions import CoincidentPoints, DeadEnd, NoViableCandidate
from .grading import level2_select
from .topology import Quadrant, Topology, link_key, nodes_in_quadrant, quadrant_of


class ScoutPolicy(str, enum.Enum):
    ADJACENT = "adjacent"
    ALL = "all"


class Mode(enum.Enum):
    ROULETTE = "roulette"
    GREEDY = "greedy"


@dataclass(frozen=True)
class AbcParams:
    max_cycles: int = 50
    threshold_bandwidth: float = 20.0
    graded_mode: bool = True
    rng_seed: int = 0
    scout_policy: ScoutPolicy = ScoutPolicy.ADJACENT
    # cycles without improvement tolerated once a complete path exists
    stall_cycles: int = 3
    # graded bees only step into the destination's quadrant as seen from
    # their current node
    heading: bool = True

    def validate(self) -> "AbcParams":
        check_count(self.max_cycles, "max_cycles")
        check_count(self.stall_cycles, "stall_cycles")
        check_positive(self.threshold_bandwidth, "threshold_bandwidth", strict=False)
        ScoutPolicy(self.scout_policy)
        return self


@dataclass(frozen=True)
class PathCandidate:
    nodes: tuple[int, ...]
    bottleneck_bw: float
    complete: bool
    fitness: float

    @property
    def last(self) -> int:
        return self.nodes[-1]

    @property
    def hops(self) -> int:
        return len(self.nodes) - 1

    def _rank(self):
        return (-self.bottleneck_bw, self.hops, self.nodes)

    def better_than(self, other: "PathCandidate | None") -> bool:
        return other is None or self._rank() < other._rank()


@dataclass
class SearchResult:
    best_path: PathCandidate | None
    cycles_used: int
    nodes_explored: int
    e_over_t: float
    scout_escapes: int = 0
    scouts: int = 0
    wall_ms: float = field(default=0.0, compare=False)

    @property
    def found(self) -> bool:
        return self.best_path is not None


def _start(source: int) -> PathCandidate:
    return PathCandidate((source,), math.inf, False, 0.0)


def path_bottleneck(nodes, bandwidth: dict) -> float:
    return min((bandwidth[link_key(u, v)] for u, v in zip(nodes, nodes[1:])), default=math.inf)


def node_fitness(node: int, bandwidth: float, in_quadrant: bool, params: AbcParams) -> float:
    """Nectar offered by moving to ``node`` over a link with ``bandwidth`` free."""
    if bandwidth < params.threshold_bandwidth:
        return 0.0
    if params.graded_mode and not in_quadrant:
        return 0.0
    return float(bandwidth)


def selection_probability(fitnesses) -> np.ndarray:
    f = np.asarray(fitnesses, dtype=float)
    if f.ndim != 1 or f.size == 0:
        raise NoViableCandidate("no candidates to select from")
    if np.any(f < 0) or not np.all(np.isfinite(f)):
        raise ValueError("fitness values must be finite and non-negative")
    total = f.sum()
    if total <= 0:
        raise NoViableCandidate("all candidates have zero fitness")
    return f / total


def extend_path(
    path: PathCandidate,
    topology: Topology,
    bandwidth: dict,
    dest: int,
    params: AbcParams,
    mode: Mode,
    rng: np.random.Generator,
    admissible: set | None = None,
) -> PathCandidate:
    """Append one hop to ``path``.

    ``admissible`` is the set of nodes a graded bee may enter; ``None``
    admits every node.
    """
    if path.complete:
        raise ValueError("path already reaches the destination")
    current = path.last
    on_path = set(path.nodes)
    viable, fits = [], []
    for v in sorted(topology.adjacency[current]):
        if v in on_path:
            continue
        bw = bandwidth[link_key(current, v)]
        f = node_fitness(v, bw, admissible is None or v in admissible, params)
        if f > 0:
            viable.append(v)
            fits.append(f)
    if not viable:
        raise DeadEnd(f"no viable successor of node {current}")

    if mode is Mode.GREEDY:
        nxt = level2_select(current, viable, bandwidth, params.threshold_bandwidth)
    else:
        p = selection_probability(fits)
        nxt = viable[int(rng.choice(len(viable), p=p))]

    bottleneck = min(path.bottleneck_bw, bandwidth[link_key(current, nxt)])
    return PathCandidate(path.nodes + (nxt,), bottleneck, nxt == dest, bottleneck)


def destination_quadrant(topology: Topology, source: int, dest: int) -> Quadrant | None:
    try:
        return quadrant_of(topology.position(source), topology.position(dest))
    except CoincidentPoints:
        return None


def candidate_nodes(
    topology: Topology,
    source: int,
    dest: int,
    production: set | None = None,
    quadrants=None,
) -> set[int]:
    """Nodes a graded bee may enter: production nodes inside ``quadrants``.

    ``quadrants`` defaults to the destination quadrant. The destination is
    always admitted.
    """
    if quadrants is None:
        q = destination_quadrant(topology, source, dest)
        quadrants = list(Quadrant) if q is None else [q]
    allowed: set[int] = set()
    for q in quadrants:
        allowed |= nodes_in_quadrant(topology, source, q)
    if production is not None:
        allowed &= set(production)
    allowed.add(dest)
    return allowed


class _Bee:
    """An employed bee: the food source it holds and the trip in progress."""

    __slots__ = ("food", "trip", "widened")

    def __init__(self, widened: bool = False):
        self.food: PathCandidate | None = None
        self.trip: PathCandidate | None = None
        self.widened = widened

    def offer(self, path: PathCandidate) -> bool:
        if path.better_than(self.food):
            self.food = path
            return True
        return False


def abc_search(
    topology: Topology,
    bandwidth: dict,
    source: int,
    dest: int,
    params: AbcParams,
    production: set | None = None,
) -> SearchResult:
    """Run the colony from ``source`` to ``dest``.

    ``bandwidth`` maps each link key to its available bandwidth. In graded
    mode ``production`` restricts bees to productive nodes in addition to
    the destination quadrant.
    """
    t0 = time.perf_counter()
    params.validate()
    source = check_node(topology, source)
    dest = check_node(topology, dest)
    if source == dest:
        trivial = PathCandidate((source,), math.inf, True, 0.0)
        return SearchResult(trivial, 0, 1, 0.0, wall_ms=(time.perf_counter() - t0) * 1e3)

    rng = np.random.default_rng(params.rng_seed)
    src_nbrs = sorted(topology.adjacency[source])
    if not src_nbrs:
        return SearchResult(None, 0, 1, 0.0, wall_ms=(time.perf_counter() - t0) * 1e3)
    graded = params.graded_mode

    base = wide = None
    onlooker_count = len(src_nbrs)
    escapes = 0
    start_widened = False
    if graded:
        q = destination_quadrant(topology, source, dest)
        if q is None:
            base = wide = candidate_nodes(topology, source, dest, production, list(Quadrant))
            in_quad = set(src_nbrs)
        else:
            base = candidate_nodes(topology, source, dest, production, [q])
            if ScoutPolicy(params.scout_policy) is ScoutPolicy.ALL:
                scout_quads = list(Quadrant)
            else:
                scout_quads = [q, *q.adjacent()]
            wide = candidate_nodes(topology, source, dest, production, scout_quads)
            in_quad = nodes_in_quadrant(topology, source, q)
        onlooker_count = sum(1 for v in src_nbrs if v in in_quad)
        if onlooker_count == 0:
            # no neighbour in the destination quadrant: scouts from the outset
            start_widened = True
            escapes += 1
            onlooker_count = sum(1 for v in src_nbrs if v in wide)

    bees = [_Bee(start_widened) for _ in src_nbrs]
    best: PathCandidate | None = None
    explored = {source}
    scouts = 0
    stall = 0
    cycle = 0

    def allowed(bee: _Bee, current: int):
        if not graded:
            return None
        if bee.widened:
            return wide
        if params.heading and current != source:
            q = destination_quadrant(topology, current, dest)
            if q is not None:
                return base & (nodes_in_quadrant(topology, current, q) | {dest})
        return base

    def arrive(bee: _Bee, path: PathCandidate) -> bool:
        """Record a step; returns True when it improves the colony's best."""
        nonlocal best
        bee.trip = path
        explored.add(path.last)
        if not path.complete:
            return False
        progressed = bee.offer(path)
        if path.better_than(best):
            best = path
            return True
        return progressed

    def new_trip(bee: _Bee) -> PathCandidate:
        # revisit a random stretch of the bee's food source, or start afresh
        if bee.food is None:
            return _start(source)
        cut = int(rng.integers(1, len(bee.food.nodes)))
        nodes = bee.food.nodes[:cut]
        return PathCandidate(nodes, path_bottleneck(nodes, bandwidth), False, 0.0)

    for cycle in range(1, params.max_cycles + 1):
        improved = False

        # employed bees: one fitness-proportional hop each
        for bee in bees:
            if bee.trip is None or bee.trip.complete:
                bee.trip = new_trip(bee)
            try:
                step = extend_path(
                    bee.trip, topology, bandwidth, dest, params, Mode.ROULETTE, rng,
                    allowed(bee, bee.trip.last),
                )
            except DeadEnd:
                # the bee turns scout and starts over from the source
                scouts += 1
                if graded and best is None and not bee.widened:
                    bee.widened = True
                    escapes += 1
                bee.trip = _start(source)
                continue
            improved |= arrive(bee, step)

        # onlookers: choose a reported trip with the same roulette odds and offer the
        # widest-link alternative for its latest hop
        reported = [b for b in bees if b.trip.hops >= 1 and not b.trip.complete]
        if reported and onlooker_count:
            probs = selection_probability([b.trip.bottleneck_bw for b in reported])
            for _ in range(onlooker_count):
                bee = reported[int(rng.choice(len(reported), p=probs))]
                if bee.trip.complete:
                    continue
                prefix_nodes = bee.trip.nodes[:-1]
                prefix = PathCandidate(prefix_nodes, path_bottleneck(prefix_nodes, bandwidth), False, 0.0)
                try:
                    alt = extend_path(
                        prefix, topology, bandwidth, dest, params, Mode.GREEDY, rng,
                        allowed(bee, prefix.last),
                    )
                except DeadEnd:
                    continue
                if alt.bottleneck_bw > bee.trip.bottleneck_bw:
                    improved |= arrive(bee, alt)

        if best is not None:
            stall = 0 if improved else stall + 1
            # give the colony one full trip along the best route to beat it
            if stall >= max(params.stall_cycles, best.hops):
                break

    e_over_t = best.bottleneck_bw / cycle if best is not None and cycle else 0.0
    return SearchResult(
        best_path=best,
        cycles_used=cycle,
        nodes_explored=len(explored),
        e_over_t=e_over_t,
        scout_escapes=escapes,
        scouts=scouts,
        wall_ms=(time.perf_counter() - t0) * 1e3,
    )


def path_is_valid(topology: Topology, nodes, source: int, dest: int) -> bool:
    """Simple, link-consecutive, starts at ``source`` and ends at ``dest``."""
    nodes = tuple(nodes)
    if not nodes or nodes[0] != source or nodes[-1] != dest:
        return False
    if len(set(nodes)) != len(nodes):
        return False
    return all(topology.has_link(u, v) for u, v in zip(nodes, nodes[1:]))


__all__ = [
    "AbcParams",
    "Mode",
    "PathCandidate",
    "ScoutPolicy",
    "SearchResult",
    "abc_search",
    "candidate_nodes",
    "extend_path",
    "node_fitness",
    "path_is_valid",
    "selection_probability",
]
