import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fixnet import netcore as nc
from ssp_reference import min_cost_flow


def two_by_two_diagonal():
    # arcs ordered (1->1', 1->2', 2->1', 2->2'); charges punish the off-diagonal
    return nc.make_problem(
        [5, 5, -5, -5],
        [(0, 2, 1, 0, 10), (0, 3, 1, 100, 10), (1, 2, 1, 100, 10), (1, 3, 1, 0, 10)],
    )


def random_transport(rng, m, n, cmax=8, fmax=0, cap_lo=4, cap_hi=14):
    sup = [int(rng.integers(3, 10)) for _ in range(m)]
    tot = sum(sup)
    dem = [1] * n
    rest = tot - n
    for _ in range(rest):
        dem[int(rng.integers(0, n))] += 1
    supply = sup + [-d for d in dem]
    arcs = []
    for i in range(m):
        for k in range(n):
            arcs.append(
                (i, m + k, int(rng.integers(1, cmax + 1)),
                 int(rng.integers(0, fmax + 1)) if fmax else 0,
                 int(rng.integers(cap_lo, cap_hi + 1)))
            )
    return nc.make_problem(supply, arcs)


# -- validate -----------------------------------------------------------------


def test_validate_accepts_minimal_instance():
    p = nc.make_problem([5, -5], [(0, 1, 3, 0, 10)])
    assert nc.validate(p) is p


def test_validate_rejects_unbalanced_supply():
    with pytest.raises(nc.UnbalancedSupply):
        nc.validate(nc.make_problem([5, -4], [(0, 1, 3, 0, 10)]))


def test_validate_rejects_self_loop():
    with pytest.raises(nc.BadArcEndpoint):
        nc.validate(nc.make_problem([0, 0], [(1, 1, 3, 0, 10)]))


def test_validate_rejects_negative_capacity_and_charge():
    with pytest.raises(nc.NegativeCapacityOrCharge):
        nc.validate(nc.make_problem([1, -1], [(0, 1, 3, 0, -2)]))
    with pytest.raises(nc.NegativeCapacityOrCharge):
        nc.validate(nc.make_problem([1, -1], [(0, 1, 3, -1, 2)]))


# -- solve_lp -----------------------------------------------------------------


def test_solve_lp_single_forced_arc():
    p = nc.make_problem([5, -5], [(0, 1, 3, 100, 10)])
    state = nc.solve_lp(p, [3.0])
    assert list(state.real_flows()) == [5]
    assert float(np.dot(state.real_flows(), [3])) == 15


def test_solve_lp_cost_equal_routings():
    p = nc.make_problem(
        [5, 5, -5, -5],
        [(0, 2, 1, 0, 10), (0, 3, 1, 0, 10), (1, 2, 1, 0, 10), (1, 3, 1, 0, 10)],
    )
    state = nc.solve_lp(p, [1.0] * 4)
    assert int(np.dot(state.real_flows(), [1, 1, 1, 1])) == 10


def test_solve_lp_detects_infeasible():
    p = nc.make_problem([5, -5], [(0, 1, 3, 0, 3)])
    with pytest.raises(nc.Infeasible):
        nc.solve_lp(p, [3.0])


def test_solve_lp_matches_ssp_oracle():
    rng = np.random.default_rng(1234)
    for _ in range(25):
        p = random_transport(rng, 3, 3)
        costs = [a.cost for a in p.arcs]
        rows = [(a.tail, a.head, a.cost, a.capacity) for a in p.arcs]
        feasible, ref_cost, _ = min_cost_flow(p.node_count, p.supply, rows)
        try:
            state = nc.solve_lp(p, costs)
        except nc.Infeasible:
            assert not feasible
            continue
        assert feasible
        got = int(np.dot(state.real_flows(), costs))
        assert got == ref_cost
        state.assert_valid_basis()


# -- reoptimize ---------------------------------------------------------------


def test_reoptimize_unchanged_costs_is_a_no_op():
    rng = np.random.default_rng(7)
    p = random_transport(rng, 3, 4)
    costs = [float(a.cost) for a in p.arcs]
    state = nc.solve_lp(p, costs)
    before = state.pivot_count
    obj0 = int(np.dot(state.real_flows(), costs))
    nc.reoptimize(state, costs)
    assert state.pivot_count == before
    assert int(np.dot(state.real_flows(), costs)) == obj0


def test_reoptimize_bigm_pushes_flow_off_arc():
    # two parallel routes; penalizing the used one must clear it
    p = nc.make_problem([5, 0, -5], [(0, 1, 1, 0, 10), (1, 2, 1, 0, 10), (0, 2, 5, 0, 10)])
    costs = np.array([1.0, 1.0, 5.0])
    state = nc.solve_lp(p, costs)
    assert state.real_flows()[0] == 5
    costs2 = costs.copy()
    costs2[0] += state.bigm
    nc.reoptimize(state, costs2)
    assert state.real_flows()[0] == 0
    assert state.real_flows()[2] == 5


def test_reoptimize_equals_cold_solve_after_perturbation():
    rng = np.random.default_rng(99)
    for _ in range(15):
        p = random_transport(rng, 3, 3)
        c0 = np.array([float(a.cost) for a in p.arcs])
        try:
            state = nc.solve_lp(p, c0)
        except nc.Infeasible:
            continue
        c1 = c0 + rng.integers(-2, 6, size=p.arc_count)
        nc.reoptimize(state, c1)
        cold = nc.solve_lp(p, c1)
        assert float(np.dot(state.real_flows(), c1)) == float(np.dot(cold.real_flows(), c1))
        state.assert_valid_basis()


# -- fc_objective ---------------------------------------------------------------


def test_fc_objective_zero_flow():
    p = nc.make_problem([0, 0], [(0, 1, 3, 100, 10)])
    assert nc.fc_objective(p, [0]) == 0


def test_fc_objective_single_arc():
    p = nc.make_problem([5, -5], [(0, 1, 3, 100, 10)])
    assert nc.fc_objective(p, [5]) == 115


def test_fc_objective_diagonal_instance():
    p = two_by_two_diagonal()
    assert nc.fc_objective(p, [5, 0, 0, 5]) == 10


def test_fc_objective_rejects_violations():
    p = nc.make_problem([5, -5], [(0, 1, 3, 100, 10)])
    with pytest.raises(nc.InfeasibleFlows):
        nc.fc_objective(p, [4])  # conservation
    with pytest.raises(nc.InfeasibleFlows):
        nc.fc_objective(p, [11])  # capacity


# -- evaluate_fc_entering -------------------------------------------------------


def parallel_arcs_problem(f0, f1, cap0=6):
    # arc 0 basic carrying 5, arc 1 the parallel candidate
    return nc.make_problem([5, -5], [(0, 1, 1, f0, cap0), (0, 1, 1, f1, 10)])


def test_evaluate_cost_neutral_parallel_swap():
    p = parallel_arcs_problem(0, 0)
    state = nc.solve_lp(p, [1.0, 1.0])
    assert state.status[0] == nc.IN_TREE and state.real_flows()[0] == 5
    ev = nc.evaluate_fc_entering(state, p, 1)
    assert ev.delta == 5
    assert ev.objective_delta == 0


def test_evaluate_charge_swap_is_exact():
    # diverting 5 units: 5*1 - 5*1 + 50 - 80 = -30
    p = parallel_arcs_problem(80, 50)
    state = nc.solve_lp(p, [1.0, 1.0])
    ev = nc.evaluate_fc_entering(state, p, 1)
    assert ev.delta == 5
    assert ev.objective_delta == -30


def test_evaluate_requires_nonbasic_arc():
    p = parallel_arcs_problem(0, 0)
    state = nc.solve_lp(p, [1.0, 1.0])
    with pytest.raises(ValueError):
        nc.evaluate_fc_entering(state, p, 0)


def test_evaluate_matches_pivot_recompute_everywhere():
    rng = np.random.default_rng(2024)
    checked = 0
    for _ in range(20):
        p = random_transport(rng, 3, 3, fmax=60)
        try:
            state = nc.solve_lp(p, [a.cost for a in p.arcs])
        except nc.Infeasible:
            continue
        before = nc.fc_objective(p, state.real_flows())
        cand, delta, xoj, ok = nc.evaluate_all_entering(state)
        for pos, j in enumerate(cand):
            ev = nc.evaluate_fc_entering(state, p, int(j))
            assert ev.delta == delta[pos]
            if not ok[pos]:
                continue
            assert ev.objective_delta == xoj[pos]
            clone = state.copy()
            nc.pivot(clone, ev)
            after = nc.fc_objective(p, clone.real_flows())
            assert after - before == ev.objective_delta
            clone.assert_valid_basis()
            checked += 1
    assert checked > 50


# -- pivot ----------------------------------------------------------------------


def test_pivot_bound_flip_keeps_tree():
    # entering arc blocks on its own capacity: status toggles, tree unchanged
    p = nc.make_problem([5, -5], [(0, 1, 1, 0, 8), (0, 1, 3, 0, 4)])
    state = nc.solve_lp(p, [1.0, 3.0])
    assert state.status[1] == nc.AT_LOWER
    tree_before = [list(adj) for adj in state.tree_adj]
    ev = nc.evaluate_fc_entering(state, p, 1)
    assert ev.leaving == ev.entering == 1
    nc.pivot(state, ev)
    assert state.status[1] == nc.AT_UPPER
    assert [list(adj) for adj in state.tree_adj] == tree_before
    state.assert_valid_basis()


def test_pivot_degenerate_changes_tree_not_flows():
    rng = np.random.default_rng(5)
    found = False
    for _ in range(40):
        p = random_transport(rng, 3, 3)
        try:
            state = nc.solve_lp(p, [a.cost for a in p.arcs])
        except nc.Infeasible:
            continue
        cand, delta, xoj, ok = nc.evaluate_all_entering(state)
        for pos, j in enumerate(cand):
            if delta[pos] == 0 and ok[pos]:
                ev = nc.evaluate_fc_entering(state, p, int(j))
                if ev.leaving == ev.entering:
                    continue
                flows = state.flow.copy()
                nc.pivot(state, ev)
                assert np.array_equal(state.flow, flows)
                assert state.status[j] == nc.IN_TREE
                state.assert_valid_basis()
                found = True
                break
        if found:
            break
    assert found, "no degenerate pivot candidate surfaced"


def test_pivot_rejects_stale_eval():
    p = parallel_arcs_problem(80, 50)
    state = nc.solve_lp(p, [1.0, 1.0])
    ev = nc.evaluate_fc_entering(state, p, 1)
    nc.pivot(state, ev)
    with pytest.raises(nc.StalePivotEval):
        nc.pivot(state, ev)


def test_pivot_objective_delta_applies_exactly():
    p = parallel_arcs_problem(80, 50)
    state = nc.solve_lp(p, [1.0, 1.0])
    before = nc.fc_objective(p, state.real_flows())
    ev = nc.evaluate_fc_entering(state, p, 1)
    nc.pivot(state, ev)
    assert nc.fc_objective(p, state.real_flows()) == before + ev.objective_delta


# -- solver invariants ------------------------------------------------------------


def test_solver_determinism():
    rng = np.random.default_rng(11)
    p = random_transport(rng, 4, 4)
    costs = [a.cost for a in p.arcs]
    s1 = nc.solve_lp(p, costs)
    s2 = nc.solve_lp(p, costs)
    assert np.array_equal(s1.real_flows(), s2.real_flows())
    assert s1.pivot_count == s2.pivot_count


def test_integrality_preserved_through_pivots():
    rng = np.random.default_rng(21)
    p = random_transport(rng, 4, 3, fmax=40)
    state = nc.solve_lp(p, [a.cost for a in p.arcs])
    assert state.flow.dtype == np.int64
    for _ in range(5):
        cand, delta, xoj, ok = nc.evaluate_all_entering(state)
        sel = np.nonzero(ok)[0]
        if not sel.size:
            break
        j = int(cand[sel[0]])
        nc.pivot(state, nc.evaluate_fc_entering(state, p, j))
        state.assert_valid_basis()


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.integers(2, 4), st.integers(2, 4))
def test_random_instances_solve_clean(seed, m, n):
    rng = np.random.default_rng(seed)
    p = random_transport(rng, m, n, cap_lo=2, cap_hi=9)
    rows = [(a.tail, a.head, a.cost, a.capacity) for a in p.arcs]
    feasible, ref_cost, _ = min_cost_flow(p.node_count, p.supply, rows)
    try:
        state = nc.solve_lp(p, [a.cost for a in p.arcs])
    except nc.Infeasible:
        assert not feasible
        return
    assert feasible
    state.assert_valid_basis()
    assert int(np.dot(state.real_flows(), [a.cost for a in p.arcs])) == ref_cost
