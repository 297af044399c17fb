import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from beeroute.exceptions import InvalidConfig, SaturatedLink
from beeroute.topology import TopologyConfig, generate_topology
from beeroute.traffic import (
    LinkState,
    TrafficParams,
    advance_traffic,
    assign_flow_rates,
    available_bandwidth,
    exit_probabilities,
    init_link_states,
    link_load_closed_form,
    link_load_derivative,
    routing_matrix,
    traffic_intensity,
    unit_rate,
    warm_up,
    write_trajectory_csv,
)

from conftest import make_topology


def rk4(T0, gamma, mu, t, steps=2000):
    """Classic fourth-order Runge-Kutta on dT/dt = gamma - mu*T."""
    f = lambda T: gamma - mu * T
    h = t / steps
    T = T0
    for _ in range(steps):
        k1 = f(T)
        k2 = f(T + h * k1 / 2)
        k3 = f(T + h * k2 / 2)
        k4 = f(T + h * k3)
        T += h * (k1 + 2 * k2 + 2 * k3 + k4) / 6
    return T


def test_closed_form_trivial():
    assert link_load_closed_form(0, 0, 0.3, 12.0) == 0
    assert link_load_closed_form(7.5, 2.0, 0.4, 0.0) == 7.5


def test_closed_form_matches_rk4_example():
    exact = link_load_closed_form(10, 2, 0.5, 3)
    assert exact == pytest.approx(rk4(10, 2, 0.5, 3), rel=1e-6)


def test_closed_form_rejects_bad_inputs():
    with pytest.raises(ValueError):
        link_load_closed_form(1, 1, 0.0, 1)
    with pytest.raises(ValueError):
        link_load_closed_form(1, 1, 1.0, -1)


def test_closed_form_monotone_toward_steady_state():
    for T0 in (0.0, 50.0):
        vals = [link_load_closed_form(T0, 3.0, 0.1, t) for t in np.linspace(0, 200, 50)]
        target = 30.0
        diffs = [abs(v - target) for v in vals]
        assert all(b <= a + 1e-12 for a, b in zip(diffs, diffs[1:]))
        side = [np.sign(v - target) for v in vals if abs(v - target) > 1e-9]
        assert len(set(side)) <= 1  # never overshoots


def test_derivative_examples():
    assert link_load_derivative(4.0, 2.0, 0.5) == 0
    assert link_load_derivative(0, 5, 1) == 5
    assert link_load_derivative(1.0, 2.0, 0.5) > 0
    assert link_load_derivative(10.0, 2.0, 0.5) < 0


def test_available_bandwidth_examples():
    assert available_bandwidth(100, 0) == 100
    assert available_bandwidth(100, 100) == 0
    assert available_bandwidth(10, 3.5) == pytest.approx(6.5)
    assert available_bandwidth(10, 30) == 0  # overload clamps
    with pytest.raises(ValueError):
        available_bandwidth(10, -1)


def test_intensity_examples():
    ps = 262144
    r = unit_rate(ps)
    assert r == pytest.approx(2.097152)
    assert traffic_intensity(ps, 0, 50) == 0
    assert traffic_intensity(ps, 10, 10 * r) == pytest.approx(1.0)
    assert traffic_intensity(ps, 5, 20) == pytest.approx(2 * traffic_intensity(ps, 5, 40))
    with pytest.raises(SaturatedLink):
        traffic_intensity(ps, 5, 0)


def test_advance_noop_and_delegation():
    params = TrafficParams()
    s = LinkState((0, 1), 100.0, load=12.0, gamma=0.5, last_update=0.0)
    advance_traffic({s.key: s}, params, 0.0)
    assert s.load == 12.0
    advance_traffic({s.key: s}, params, 10.0)  # under one interval: still waits
    assert s.load == 12.0
    advance_traffic({s.key: s}, params, 30.0)
    assert s.load == link_load_closed_form(12.0, 0.5, params.mu, 30.0)
    assert s.last_update == 30.0
    with pytest.raises(ValueError):
        advance_traffic({s.key: s}, params, 5.0)


def test_advance_converges_to_steady_state():
    params = TrafficParams(mu=1 / 60)  # 20/mu = 1200 s, a whole number of intervals
    states = {
        (0, 1): LinkState((0, 1), 100.0, load=0.0, gamma=0.4),
        (1, 2): LinkState((1, 2), 100.0, load=40.0, gamma=0.1),
    }
    warm_up(states, params, 20 / params.mu)
    for s in states.values():
        assert s.last_update == pytest.approx(1200.0)
        assert abs(s.load - s.gamma / params.mu) <= 1e-6


def test_no_traffic_gives_zero_rates():
    topo = generate_topology(TopologyConfig(node_count=12, seed=1))
    gamma = assign_flow_rates(topo, TrafficParams(alpha=0.0, lambda_se=0.0), seed=0)
    assert all(v == 0 for v in gamma.values())


def test_two_nodes_one_demand():
    topo = make_topology([(0, 0), (1, 0)], [(0, 1, 100)])
    params = TrafficParams(alpha=0.0, lambda_se=4.0, demand_pairs=1)
    assert assign_flow_rates(topo, params, seed=3) == {(0, 1): 4.0}
    explicit = TrafficParams(alpha=0.0, demands={(1, 0): 4.0})
    assert assign_flow_rates(topo, explicit) == {(0, 1): 4.0}


def ring4():
    return make_topology([(0, 0), (1, 0), (1, 1), (0, 1)],
                         [(0, 1, 100), (1, 2, 100), (2, 3, 100), (0, 3, 100)])


def neumann_link_rates(P, external, terms=200):
    """Sum of per-hop flows: job mass at step k crossing each directed edge."""
    n = len(external)
    mass = np.array(external, dtype=float)
    flows = np.zeros((n, n))
    for _ in range(terms):
        flows += mass[:, None] * P
        mass = P.T @ mass
    return flows


def test_ring_conservation_against_enumeration():
    topo = ring4()
    alpha = 2.0
    params = TrafficParams(alpha=alpha, lambda_se=0.0, exit_prob=0.5)
    gamma = assign_flow_rates(topo, params, seed=0)
    # each node forwards half its jobs, split over two neighbours: one
    # expected hop per job, alpha/4 per link
    assert sum(gamma.values()) == pytest.approx(alpha * 1.0)
    for v in gamma.values():
        assert v == pytest.approx(alpha / 4)
    flows = neumann_link_rates(routing_matrix(topo, params), np.full(4, alpha / 4))
    for (a, b), v in gamma.items():
        assert v == pytest.approx(flows[a, b] + flows[b, a], rel=1e-9)


def test_ring_demand_splits_over_shortest_paths():
    topo = ring4()
    params = TrafficParams(alpha=0.0, demands={(0, 2): 1.0})
    gamma = assign_flow_rates(topo, params)
    assert gamma == pytest.approx({(0, 1): 0.5, (1, 2): 0.5, (2, 3): 0.5, (0, 3): 0.5})
    # total link arrivals = injected rate x hop count
    assert sum(gamma.values()) == pytest.approx(1.0 * 2)


def test_probability_rows_sum_to_one():
    topo = generate_topology(TopologyConfig(node_count=30, seed=5))
    P = routing_matrix(topo, TrafficParams())
    q = exit_probabilities(P)
    assert np.all(P >= 0)
    assert np.all((q >= 0) & (q <= 1))
    assert np.allclose(P.sum(axis=1) + q, 1.0, atol=1e-12)


def test_explicit_routing_matrix_validation():
    topo = make_topology([(0, 0), (1, 0), (2, 0)], [(0, 1, 10), (1, 2, 10)])
    off_link = ((0, 0, 0.5), (0.5, 0, 0), (0, 0.5, 0))
    with pytest.raises(InvalidConfig):
        routing_matrix(topo, TrafficParams(routing_matrix=off_link))
    too_big = ((0, 1.2, 0), (0.5, 0, 0), (0, 0.5, 0))
    with pytest.raises(InvalidConfig):
        routing_matrix(topo, TrafficParams(routing_matrix=too_big))


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10_000), n=st.integers(2, 30),
       lam=st.floats(0, 0.5), alpha=st.floats(0, 5))
def test_non_negativity(seed, n, lam, alpha):
    topo = generate_topology(TopologyConfig(node_count=n, seed=seed))
    params = TrafficParams(alpha=alpha, lambda_se=lam)
    gamma = assign_flow_rates(topo, params, seed=seed)
    assert all(v >= 0 for v in gamma.values())
    states = init_link_states(topo, gamma, params, seed)
    trace = []
    warm_up(states, params, 90.0, trace)
    for _, _, _, T, bw, inten in trace:
        assert T >= 0 and bw >= 0 and inten >= 0


def test_trajectory_csv(tmp_path):
    topo = make_topology([(0, 0), (1, 0)], [(0, 1, 100)])
    states = init_link_states(topo, {(0, 1): 0.3}, TrafficParams(), seed=1)
    trace = []
    warm_up(states, TrafficParams(), 60.0, trace)
    path = tmp_path / "traj.csv"
    write_trajectory_csv(trace, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "time,link_a,link_b,T_l,B_a,intensity"
    assert len(lines) == 3
    assert float(lines[-1].split(",")[3]) == pytest.approx(states[(0, 1)].load)
