import pytest

from beeroute.topology import Link, Node, Topology
from beeroute.traffic import LinkState


def make_topology(positions, links, resources=None):
    """Topology from explicit positions and (a, b, capacity) triples."""
    resources = resources or [0.5] * len(positions)
    nodes = tuple(
        Node(id=i, position=(float(x), float(y)), resource_allocation=r)
        for i, ((x, y), r) in enumerate(zip(positions, resources))
    )
    return Topology(nodes=nodes, links=tuple(Link(a, b, float(c)) for a, b, c in links))


def states_with_loads(topology, loads=None, gammas=None):
    loads = loads or {}
    gammas = gammas or {}
    return {
        l.key: LinkState(l.key, l.capacity, load=loads.get(l.key, 0.0), gamma=gammas.get(l.key, 0.0))
        for l in topology.links
    }


def enumerate_simple_paths(topology, source, dest, allowed=None):
    """Every simple source->dest path, by depth-first search."""
    out = []

    def walk(path, seen):
        u = path[-1]
        if u == dest:
            out.append(tuple(path))
            return
        for v in sorted(topology.adjacency[u]):
            if v in seen or (allowed is not None and v not in allowed):
                continue
            seen.add(v)
            path.append(v)
            walk(path, seen)
            path.pop()
            seen.discard(v)

    walk([source], {source})
    return out


@pytest.fixture
def line4():
    # s=0 - a=1 - b=2 - d=3 along a rising diagonal, all in Q1 of the source
    return make_topology(
        [(0, 0), (1, 1), (2, 2), (3, 3)],
        [(0, 1, 100), (1, 2, 100), (2, 3, 100)],
    )


def pytest_terminal_summary(terminalreporter):
    """Repeat the acceptance pass/fail lines at the end of the run."""
    lines = []
    for key in ("passed", "failed"):
        for rep in terminalreporter.stats.get(key, []):
            if rep.when == "call" and "test_acceptance" in rep.nodeid:
                lines += [l for l in rep.capstdout.splitlines() if l.startswith(("[PASS]", "[FAIL]"))]
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda l: int(l.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)
