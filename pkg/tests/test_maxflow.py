import itertools
import math

import numpy as np
import pytest

from raycut.maxflow import (
    CutResult,
    SolverLimitError,
    UnboundedFlowError,
    max_flow_min_cut,
)
from raycut.raygraph import INFINITE, FlowNetwork

# ---------------------------------------------------------------------------
# Oracle: exhaustive minimum over all 2^n source-side subsets
# ---------------------------------------------------------------------------


def min_cut_enumeration(net: FlowNetwork) -> float:
    tails, heads, caps = net.arcs()
    others = [v for v in range(net.node_count) if v not in (net.source, net.sink)]
    best = math.inf
    for bits in range(2 ** len(others)):
        side = {net.source}
        for i, v in enumerate(others):
            if bits >> i & 1:
                side.add(v)
        cost = 0.0
        for t, h, c in zip(tails, heads, caps):
            if t in side and h not in side:
                cost += c
        best = min(best, cost)
    return best


def random_network(rng) -> FlowNetwork:
    n_inner = int(rng.integers(1, 11))
    n = n_inner + 2
    s, t = n - 2, n - 1
    net = FlowNetwork(n, s, t)
    inner = list(range(n_inner))
    for _ in range(int(rng.integers(1, 4))):
        net.add_arc(s, int(rng.choice(inner)), float(rng.integers(0, 11)))
        net.add_arc(int(rng.choice(inner)), t, float(rng.integers(0, 11)))
    for _ in range(int(rng.integers(0, 2 * n_inner + 1))):
        u, v = rng.choice(inner, size=2, replace=True)
        if u != v:
            net.add_arc(int(u), int(v), float(rng.integers(0, 11)))
    if rng.uniform() < 0.2:
        net.add_arc(s, t, float(rng.integers(0, 11)))
    return net


# ---------------------------------------------------------------------------


def test_single_arc():
    net = FlowNetwork(2, 0, 1)
    net.add_arc(0, 1, 5.0)
    cut = max_flow_min_cut(net)
    assert cut.flow_value == 5.0
    assert cut.in_source_set.tolist() == [True, False]


def test_bottleneck_chain():
    net = FlowNetwork(3, 0, 2)
    net.add_arc(0, 1, 3.0)
    net.add_arc(1, 2, 2.0)
    cut = max_flow_min_cut(net)
    assert cut.flow_value == 2.0
    assert cut.in_source_set.tolist() == [True, True, False]


def test_matches_enumeration_on_200_random_networks():
    rng = np.random.default_rng(99)
    for _ in range(200):
        net = random_network(rng)
        cut = max_flow_min_cut(net)
        assert cut.flow_value == min_cut_enumeration(net)


def test_cut_value_equals_crossing_capacity():
    rng = np.random.default_rng(5)
    for _ in range(50):
        net = random_network(rng)
        cut = max_flow_min_cut(net)
        tails, heads, caps = net.arcs()
        crossing = cut.in_source_set[tails] & ~cut.in_source_set[heads]
        assert cut.flow_value == pytest.approx(caps[crossing].sum(), abs=1e-9)
        assert cut.in_source_set[net.source]
        assert not cut.in_source_set[net.sink]


def test_flow_conservation_and_feasibility():
    rng = np.random.default_rng(7)
    for _ in range(50):
        net = random_network(rng)
        cut = max_flow_min_cut(net)
        tails, heads, caps = net.arcs()
        assert np.all(cut.arc_flow >= -1e-12)
        finite = np.isfinite(caps)
        assert np.all(cut.arc_flow[finite] <= caps[finite] + 1e-12)
        balance = np.zeros(net.node_count)
        np.subtract.at(balance, tails, cut.arc_flow)
        np.add.at(balance, heads, cut.arc_flow)
        for v in range(net.node_count):
            if v not in (net.source, net.sink):
                assert balance[v] == pytest.approx(0.0, abs=1e-9)


def test_scaling_property():
    rng = np.random.default_rng(21)
    for _ in range(20):
        net = random_network(rng)
        base = max_flow_min_cut(net)
        tails, heads, caps = net.arcs()
        for lam in (0.5, 2.0, 3.0, 8.0):
            scaled = FlowNetwork(net.node_count, net.source, net.sink)
            scaled.add_arcs(tails, heads, caps * lam)
            cut = max_flow_min_cut(scaled)
            assert cut.flow_value == pytest.approx(lam * base.flow_value, rel=1e-12)
            assert np.array_equal(cut.in_source_set, base.in_source_set)


def test_infinite_arcs_never_cross_the_cut():
    rng = np.random.default_rng(41)
    for _ in range(30):
        net = random_network(rng)
        tails, heads, _ = net.arcs()
        # add a few infinite arcs between inner nodes (never s->..->t only-inf)
        inner = [v for v in range(net.node_count) if v not in (net.source, net.sink)]
        if len(inner) >= 2:
            u, v = inner[0], inner[-1]
            if u != v:
                net.add_arc(u, v, INFINITE)
        cut = max_flow_min_cut(net)
        tails, heads, caps = net.arcs()
        crossing = cut.in_source_set[tails] & ~cut.in_source_set[heads]
        assert not np.any(np.isinf(caps[crossing]))


def test_unbounded_flow_detected():
    net = FlowNetwork(3, 0, 2)
    net.add_arc(0, 1, INFINITE)
    net.add_arc(1, 2, INFINITE)
    with pytest.raises(UnboundedFlowError):
        max_flow_min_cut(net)


def test_direct_infinite_terminal_arc_unbounded():
    net = FlowNetwork(2, 0, 1)
    net.add_arc(0, 1, INFINITE)
    with pytest.raises(UnboundedFlowError):
        max_flow_min_cut(net)


def test_determinism():
    rng = np.random.default_rng(77)
    net = random_network(rng)
    first = max_flow_min_cut(net)
    second = max_flow_min_cut(net)
    assert first.flow_value == second.flow_value
    assert np.array_equal(first.in_source_set, second.in_source_set)
    assert np.array_equal(first.arc_flow, second.arc_flow)


def test_no_path_means_zero_flow():
    net = FlowNetwork(4, 0, 3)
    net.add_arc(0, 1, 4.0)
    net.add_arc(2, 3, 4.0)
    cut = max_flow_min_cut(net)
    assert cut.flow_value == 0.0
    assert cut.in_source_set.tolist() == [True, True, False, False]


def test_terminal_orientation_enforced():
    net = FlowNetwork(3, 0, 2)
    with pytest.raises(ValueError):
        net.add_arc(1, 0, 2.0)  # into source
    with pytest.raises(ValueError):
        net.add_arc(2, 1, 2.0)  # out of sink
    with pytest.raises(ValueError):
        net.add_arc(0, 1, -1.0)
