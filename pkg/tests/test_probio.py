import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fixnet import netcore as nc
from fixnet import probio

TWO_NODE = "p fcnf 2 1\nn 1 5\nn 2 -5\na 1 2 0 10 3 100\n"


# -- parse_fcnf -------------------------------------------------------------------


def test_parse_minimal_instance():
    p = probio.parse_fcnf(TWO_NODE)
    assert p.node_count == 2 and p.arc_count == 1
    assert p.supply == (5, -5)
    a = p.arcs[0]
    assert (a.tail, a.head, a.cost, a.fixed, a.capacity) == (0, 1, 3, 100, 10)


def test_parse_missing_node_line_defaults_to_zero():
    text = "p fcnf 3 2\nn 1 5\nn 3 -5\na 1 2 0 10 3 0\na 2 3 0 10 3 0\n"
    p = probio.parse_fcnf(text)
    assert p.supply == (5, 0, -5)


def test_parse_comments_ignored():
    text = "c header\n" + TWO_NODE + "c trailer\n"
    assert probio.parse_fcnf(text) == probio.parse_fcnf(TWO_NODE)


def test_parse_rejects_self_loop_via_validation():
    text = "p fcnf 2 1\nn 1 5\nn 2 -5\na 1 1 0 10 3 100\n"
    with pytest.raises(nc.BadArcEndpoint):
        probio.parse_fcnf(text)


def test_parse_rejects_arc_count_mismatch():
    text = "p fcnf 2 2\nn 1 5\nn 2 -5\na 1 2 0 10 3 100\n"
    with pytest.raises(probio.CountMismatch):
        probio.parse_fcnf(text)


def test_parse_rejects_duplicate_node_line():
    text = "p fcnf 2 1\nn 1 5\nn 1 -5\na 1 2 0 10 3 100\n"
    with pytest.raises(probio.DuplicateNodeLine):
        probio.parse_fcnf(text)


def test_parse_rejects_nonzero_lower_bound():
    text = "p fcnf 2 1\nn 1 5\nn 2 -5\na 1 2 1 10 3 100\n"
    with pytest.raises(probio.FcnfSyntaxError) as err:
        probio.parse_fcnf(text)
    assert err.value.line == 4


def test_parse_rejects_garbage_record():
    with pytest.raises(probio.FcnfSyntaxError):
        probio.parse_fcnf("p fcnf 1 0\nq nonsense\n")


# -- write_fcnf -------------------------------------------------------------------


def test_write_round_trip_identity():
    p = probio.parse_fcnf(TWO_NODE)
    assert probio.parse_fcnf(probio.write_fcnf(p)) == p


def test_write_omits_zero_supplies_and_round_trips():
    p = nc.make_problem([5, 0, -5], [(0, 1, 3, 0, 10), (1, 2, 3, 0, 10)])
    text = probio.write_fcnf(p)
    assert "n 2" not in text
    assert probio.parse_fcnf(text) == p


def test_write_is_byte_stable():
    p = probio.generate_fctp(probio.FctpSpec(sources=3, sinks=4, total_supply=50, seed=8))
    assert probio.write_fcnf(p) == probio.write_fcnf(p)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6), st.integers(2, 5), st.integers(2, 5))
def test_generated_instances_round_trip(seed, m, n):
    p = probio.generate_fctp(
        probio.FctpSpec(sources=m, sinks=n, total_supply=10 * max(m, n), seed=seed)
    )
    assert probio.parse_fcnf(probio.write_fcnf(p)) == p


# -- generate_fctp ----------------------------------------------------------------


def test_fctp_published_small_shape():
    spec = probio.FctpSpec(sources=10, sinks=10, total_supply=10000,
                           cost_range=(3, 8), fc_range=(50, 200), seed=42)
    p = probio.generate_fctp(spec)
    assert p.arc_count == 100
    assert sum(b for b in p.supply if b > 0) == 10000
    assert all(3 <= a.cost <= 8 for a in p.arcs)
    assert all(50 <= a.fixed <= 200 for a in p.arcs)


def test_fctp_published_large_shape():
    spec = probio.FctpSpec(sources=50, sinks=100, total_supply=50000,
                           fc_range=(6400, 25600), seed=1)
    p = probio.generate_fctp(spec)
    assert p.arc_count == 5000
    assert all(6400 <= a.fixed <= 25600 for a in p.arcs)


def test_fctp_deterministic_in_seed():
    spec = probio.FctpSpec(sources=6, sinks=7, total_supply=300, seed=77)
    assert probio.generate_fctp(spec) == probio.generate_fctp(spec)
    other = probio.FctpSpec(sources=6, sinks=7, total_supply=300, seed=78)
    assert probio.generate_fctp(other) != probio.generate_fctp(spec)


def test_fctp_fc_count_limits_charged_arcs():
    spec = probio.FctpSpec(sources=5, sinks=5, total_supply=100, fc_count=12, seed=3)
    p = probio.generate_fctp(spec)
    assert sum(1 for a in p.arcs if a.fixed > 0) == 12


def test_fctp_capacities_are_tight_transport_bounds():
    spec = probio.FctpSpec(sources=3, sinks=3, total_supply=60, seed=5)
    p = probio.generate_fctp(spec)
    sup = p.supply[:3]
    dem = [-b for b in p.supply[3:]]
    for a in p.arcs:
        assert a.capacity == min(sup[a.tail], dem[a.head - 3])


def test_fctp_rejects_undersized_supply():
    with pytest.raises(probio.InfeasibleSpec):
        probio.generate_fctp(probio.FctpSpec(sources=10, sinks=3, total_supply=5, seed=0))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 12), st.integers(12, 400))
def test_partition_exact_and_positive(seed, k, total):
    rng = np.random.Generator(np.random.PCG64(seed))
    parts = probio._partition(rng, total, k)
    assert parts.sum() == total
    assert (parts >= 1).all()


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.integers(2, 12))
def test_partition_respects_upper_bound(seed, k):
    rng = np.random.Generator(np.random.PCG64(seed))
    total = 7 * k
    parts = probio._partition(rng, total, k, upper=9)
    assert parts.sum() == total
    assert (parts >= 1).all() and (parts <= 9).all()


# -- generate_netgen_fc -------------------------------------------------------------


def weakly_connected(problem):
    adj = [[] for _ in range(problem.node_count)]
    for a in problem.arcs:
        adj[a.tail].append(a.head)
        adj[a.head].append(a.tail)
    seen = {0}
    stack = [0]
    while stack:
        u = stack.pop()
        for v in adj[u]:
            if v not in seen:
                seen.add(v)
                stack.append(v)
    return len(seen) == problem.node_count


def test_netgen_published_row_dimensions():
    spec = probio.NetgenFcSpec(nodes=500, source_count=150, sink_count=350,
                               arc_count=10000, total_supply=100000,
                               fc_range=(20, 200), seed=0)
    p = probio.generate_netgen_fc(spec)
    assert p.node_count == 500 and p.arc_count == 10000
    assert sum(b for b in p.supply if b > 0) == 100000
    assert sum(1 for b in p.supply if b > 0) == 150
    assert sum(1 for b in p.supply if b < 0) == 350
    assert all(20 <= a.fixed <= 200 for a in p.arcs)
    assert all(200 <= a.capacity <= 1500 for a in p.arcs)
    assert all(3 <= a.cost <= 8 for a in p.arcs)


def test_netgen_transshipment_row_dimensions():
    spec = probio.NetgenFcSpec(nodes=1000, source_count=200, sink_count=200,
                               arc_count=50000, total_supply=500000,
                               fc_range=(1600, 6400), seed=44)
    p = probio.generate_netgen_fc(spec)
    assert p.node_count == 1000 and p.arc_count == 50000
    mids = sum(1 for b in p.supply if b == 0)
    assert mids == 600
    assert all(1600 <= a.fixed <= 6400 for a in p.arcs)


def test_netgen_no_duplicate_arcs_and_connected():
    spec = probio.NetgenFcSpec(nodes=40, source_count=10, sink_count=12,
                               arc_count=300, total_supply=2000, seed=5)
    p = probio.generate_netgen_fc(spec)
    pairs = {(a.tail, a.head) for a in p.arcs}
    assert len(pairs) == p.arc_count
    assert weakly_connected(p)


def test_netgen_instances_are_lp_feasible():
    for seed in range(4):
        spec = probio.NetgenFcSpec(nodes=24, source_count=6, sink_count=8,
                                   arc_count=90, total_supply=1200,
                                   cap_range=(100, 400), seed=seed)
        p = probio.generate_netgen_fc(spec)
        state = nc.solve_lp(p, [a.cost for a in p.arcs])
        state.assert_valid_basis()


def test_netgen_deterministic_in_seed():
    spec = probio.NetgenFcSpec(nodes=30, source_count=8, sink_count=9,
                               arc_count=120, total_supply=900, seed=13)
    assert probio.generate_netgen_fc(spec) == probio.generate_netgen_fc(spec)


def test_netgen_rejects_bad_specs():
    with pytest.raises(probio.InfeasibleSpec):
        probio.generate_netgen_fc(
            probio.NetgenFcSpec(nodes=10, source_count=6, sink_count=6,
                                arc_count=20, total_supply=100, seed=0)
        )
    with pytest.raises(probio.InfeasibleSpec):
        probio.generate_netgen_fc(
            probio.NetgenFcSpec(nodes=10, source_count=2, sink_count=2,
                                arc_count=5, total_supply=100, seed=0)
        )
