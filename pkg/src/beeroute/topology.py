"""Seeded random geometric topologies and source-centred quadrant queries."""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ._validation import check_count, check_node, check_positive
from .exceptions import CoincidentPoints, InvalidConfig

DEFAULT_BUFFER_BYTES = 1_048_576


class Quadrant(enum.Enum):
    Q1 = "Q1"  # x >= 0, y >= 0
    Q2 = "Q2"  # x < 0,  y >= 0
    Q3 = "Q3"  # x < 0,  y < 0
    Q4 = "Q4"  # x >= 0, y < 0

    def adjacent(self) -> tuple["Quadrant", "Quadrant"]:
        """The two quadrants sharing an axis with this one."""
        order = list(Quadrant)
        i = order.index(self)
        return order[(i - 1) % 4], order[(i + 1) % 4]


@dataclass(frozen=True)
class Node:
    id: int
    position: tuple[float, float]
    buffer_capacity: int = DEFAULT_BUFFER_BYTES
    resource_allocation: float = 0.5


@dataclass(frozen=True)
class Link:
    a: int
    b: int
    capacity: float

    def __post_init__(self):
        if self.a == self.b:
            raise InvalidConfig(f"self-loop on node {self.a}")
        if self.a > self.b:
            # endpoints are unordered; keep them canonical
            a, b = self.b, self.a
            object.__setattr__(self, "a", a)
            object.__setattr__(self, "b", b)
        if not self.capacity > 0:
            raise InvalidConfig(f"link capacity must be > 0, got {self.capacity}")

    @property
    def key(self) -> tuple[int, int]:
        return (self.a, self.b)


def link_key(u: int, v: int) -> tuple[int, int]:
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True)
class TopologyConfig:
    node_count: int = 15
    arena_side: float = 100.0
    connection_radius: float = 35.0
    capacity_range: tuple[float, float] = (80.0, 120.0)
    seed: int = 0

    def validate(self) -> "TopologyConfig":
        check_count(self.node_count, "node_count")
        check_positive(self.arena_side, "arena_side")
        check_positive(self.connection_radius, "connection_radius")
        lo, hi = self.capacity_range
        check_positive(lo, "capacity_range min")
        check_positive(hi, "capacity_range max")
        if lo > hi:
            raise InvalidConfig(f"capacity_range min {lo} exceeds max {hi}")
        return self


@dataclass(frozen=True)
class Topology:
    nodes: tuple[Node, ...]
    links: tuple[Link, ...]
    seed: int = 0
    adjacency: tuple[frozenset, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        adj = [set() for _ in self.nodes]
        seen = set()
        for link in self.links:
            for end in (link.a, link.b):
                if not 0 <= end < len(self.nodes):
                    raise InvalidConfig(f"link endpoint {end} is not a node")
            if link.key in seen:
                raise InvalidConfig(f"parallel link {link.key}")
            seen.add(link.key)
            adj[link.a].add(link.b)
            adj[link.b].add(link.a)
        for i, node in enumerate(self.nodes):
            if node.id != i:
                raise InvalidConfig("node ids must be dense and ordered 0..N-1")
        object.__setattr__(self, "adjacency", tuple(frozenset(s) for s in adj))
        object.__setattr__(self, "_capacity", {l.key: l.capacity for l in self.links})

    @property
    def node_count(self) -> int:
        return len(self.nodes)

    def position(self, n: int) -> tuple[float, float]:
        return self.nodes[n].position

    def capacity(self, u: int, v: int) -> float:
        return self._capacity[link_key(u, v)]

    def has_link(self, u: int, v: int) -> bool:
        return link_key(u, v) in self._capacity

    # -- serialization -----------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "nodes": [
                {
                    "id": n.id,
                    "x": n.position[0],
                    "y": n.position[1],
                    "buffer": n.buffer_capacity,
                    "resource": n.resource_allocation,
                }
                for n in self.nodes
            ],
            "links": [{"a": l.a, "b": l.b, "capacity": l.capacity} for l in self.links],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Topology":
        nodes = tuple(
            Node(
                id=int(rec["id"]),
                position=(float(rec["x"]), float(rec["y"])),
                buffer_capacity=int(rec["buffer"]),
                resource_allocation=float(rec["resource"]),
            )
            for rec in data["nodes"]
        )
        links = tuple(
            Link(int(rec["a"]), int(rec["b"]), float(rec["capacity"])) for rec in data["links"]
        )
        return cls(nodes=nodes, links=links, seed=int(data.get("seed", 0)))

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True) + "\n"

    def save(self, path) -> None:
        Path(path).write_text(self.dumps())

    @classmethod
    def load(cls, path) -> "Topology":
        return cls.from_dict(json.loads(Path(path).read_text()))


def generate_topology(config: TopologyConfig) -> Topology:
    """Draw a unit-disk random graph from ``config``.

    Node positions and resource allocations are uniform in the arena; every
    pair closer than ``connection_radius`` gets a link whose capacity is
    uniform in ``capacity_range``. The same config always yields the same
    topology.
    """
    config.validate()
    rng = np.random.default_rng(config.seed)
    n = config.node_count
    side = float(config.arena_side)
    pos = rng.uniform(0.0, side, size=(n, 2))
    resource = rng.uniform(0.0, 1.0, size=n)

    nodes = tuple(
        Node(
            id=i,
            position=(float(pos[i, 0]), float(pos[i, 1])),
            buffer_capacity=DEFAULT_BUFFER_BYTES,
            resource_allocation=float(resource[i]),
        )
        for i in range(n)
    )

    ii, jj = np.triu_indices(n, k=1)
    if ii.size:
        dist = np.hypot(pos[ii, 0] - pos[jj, 0], pos[ii, 1] - pos[jj, 1])
        close = dist <= config.connection_radius
        ii, jj = ii[close], jj[close]
    lo, hi = config.capacity_range
    caps = rng.uniform(lo, hi, size=ii.size) if lo < hi else np.full(ii.size, float(lo))
    links = tuple(Link(int(a), int(b), float(c)) for a, b, c in zip(ii, jj, caps))
    return Topology(nodes=nodes, links=links, seed=int(config.seed))


def quadrant_of(source_pos, target_pos) -> Quadrant:
    dx = float(target_pos[0]) - float(source_pos[0])
    dy = float(target_pos[1]) - float(source_pos[1])
    if not (math.isfinite(dx) and math.isfinite(dy)):
        raise InvalidConfig("positions must be finite")
    if dx == 0.0 and dy == 0.0:
        raise CoincidentPoints(f"target {tuple(target_pos)} coincides with source")
    if dy >= 0:
        return Quadrant.Q1 if dx >= 0 else Quadrant.Q2
    return Quadrant.Q4 if dx >= 0 else Quadrant.Q3


def nodes_in_quadrant(topology: Topology, source: int, q: Quadrant) -> set[int]:
    source = check_node(topology, source)
    origin = topology.position(source)
    out = set()
    for node in topology.nodes:
        if node.id == source:
            continue
        # a node stacked on the source belongs to no quadrant
        if node.position == origin:
            continue
        if quadrant_of(origin, node.position) is q:
            out.add(node.id)
    return out


def quadrant_partition(topology: Topology, source: int) -> dict[Quadrant, set[int]]:
    return {q: nodes_in_quadrant(topology, source, q) for q in Quadrant}


def neighbors(topology: Topology, n: int) -> set[int]:
    return set(topology.adjacency[check_node(topology, n)])


def connected_components(topology: Topology) -> list[set[int]]:
    """Components via union-find over the link list."""
    parent = list(range(topology.node_count))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for link in topology.links:
        ra, rb = find(link.a), find(link.b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)
    groups: dict[int, set[int]] = {}
    for v in range(topology.node_count):
        groups.setdefault(find(v), set()).add(v)
    return sorted(groups.values(), key=min)


def radius_for_degree(node_count: int, arena_side: float, mean_degree: float) -> float:
    """Connection radius whose expected unit-disk degree is ``mean_degree``.

    Border effects are ignored, so the realised degree runs slightly lower.
    """
    if node_count <= 1:
        return float(arena_side)
    return float(arena_side) * math.sqrt(mean_degree / (math.pi * (node_count - 1)))
