"""Fixed-charge network model and a warm-startable primal network simplex.

Flows, supplies and capacities are 64-bit integers; working costs are floats
so that penalized cost vectors can be non-integral. The spanning-tree basis
keeps strong feasibility (every degenerate tree arc points toward the root),
which together with the last-blocking leaving rule makes every solve finite.
With integer arc costs all pivot-delta arithmetic is exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

AT_LOWER = 0
IN_TREE = 1
AT_UPPER = 2

BIGM_CAP = 10**12
BIGM_FLOOR = 1000
PRICE_TOL = 1e-7


class FixnetError(Exception):
    """Base class for solver errors."""


class UnbalancedSupply(FixnetError):
    pass


class BadArcEndpoint(FixnetError):
    pass


class NegativeCapacityOrCharge(FixnetError):
    pass


class Infeasible(FixnetError):
    pass


class InfeasibleFlows(FixnetError):
    pass


class StalePivotEval(FixnetError):
    pass


class SimplexStalled(FixnetError):
    """Internal invariant breach; never expected on valid input."""


@dataclass(frozen=True)
class ArcData:
    """Directed arc: unit cost, fixed charge paid when flow is positive, capacity."""

    tail: int
    head: int
    cost: int
    fixed: int
    capacity: int


@dataclass(frozen=True)
class NetworkProblem:
    """Pure network with per-node supplies (positive = source) and fixed-charge arcs."""

    node_count: int
    supply: tuple
    arcs: tuple

    @property
    def arc_count(self) -> int:
        return len(self.arcs)

    def fc_indices(self) -> np.ndarray:
        """Indices of arcs with an effective fixed charge."""
        return np.nonzero(np.array([a.fixed for a in self.arcs], dtype=np.int64) > 0)[0]


def make_problem(supply: Sequence[int], arcs: Sequence) -> NetworkProblem:
    """Build a NetworkProblem from a supply vector and (tail, head, cost, fixed, capacity) rows."""
    rows = tuple(a if isinstance(a, ArcData) else ArcData(*a) for a in arcs)
    return NetworkProblem(node_count=len(supply), supply=tuple(int(b) for b in supply), arcs=rows)


def validate(problem: NetworkProblem) -> NetworkProblem:
    """Check model invariants; returns the problem unchanged when sound."""
    n = problem.node_count
    if n < 1 or len(problem.supply) != n:
        raise ValueError("supply vector must have one entry per node")
    for b in problem.supply:
        if not isinstance(b, (int, np.integer)):
            raise ValueError("supplies must be integers")
    if sum(problem.supply) != 0:
        raise UnbalancedSupply(f"supplies sum to {sum(problem.supply)}, expected 0")
    for idx, a in enumerate(problem.arcs):
        if not (0 <= a.tail < n) or not (0 <= a.head < n) or a.tail == a.head:
            raise BadArcEndpoint(f"arc {idx}: endpoints ({a.tail}, {a.head}) invalid")
        if not isinstance(a.capacity, (int, np.integer)) or a.capacity < 0:
            raise NegativeCapacityOrCharge(f"arc {idx}: capacity {a.capacity}")
        if not isinstance(a.fixed, (int, np.integer)) or a.fixed < 0:
            raise NegativeCapacityOrCharge(f"arc {idx}: fixed charge {a.fixed}")
        if not np.isfinite(a.cost):
            raise NegativeCapacityOrCharge(f"arc {idx}: cost must be finite")
    return problem


def default_bigm(problem: NetworkProblem) -> int:
    """Instance cost dominator: 2 * (sum |c_j| U_j + sum F_j), floored and capped."""
    total = sum(abs(int(a.cost)) * int(a.capacity) + int(a.fixed) for a in problem.arcs)
    return int(min(max(2 * total, BIGM_FLOOR), BIGM_CAP))


def fc_objective(problem: NetworkProblem, flows) -> int:
    """Fixed-charge objective sum c_j x_j + sum {F_j : x_j > 0} of a feasible flow."""
    m = problem.arc_count
    x = np.asarray(flows)
    if x.shape != (m,):
        raise InfeasibleFlows(f"flow vector has shape {x.shape}, expected ({m},)")
    if not np.issubdtype(x.dtype, np.integer):
        if not np.all(x == np.floor(x)):
            raise InfeasibleFlows("flows must be integral")
        x = x.astype(np.int64)
    else:
        x = x.astype(np.int64)
    tails = np.array([a.tail for a in problem.arcs], dtype=np.int64)
    heads = np.array([a.head for a in problem.arcs], dtype=np.int64)
    caps = np.array([a.capacity for a in problem.arcs], dtype=np.int64)
    if np.any(x < 0) or np.any(x > caps):
        j = int(np.nonzero((x < 0) | (x > caps))[0][0])
        raise InfeasibleFlows(f"arc {j}: flow {x[j]} outside [0, {caps[j]}]")
    net = np.zeros(problem.node_count, dtype=np.int64)
    np.add.at(net, tails, x)
    np.subtract.at(net, heads, x)
    bal = np.array(problem.supply, dtype=np.int64)
    if np.any(net != bal):
        i = int(np.nonzero(net != bal)[0][0])
        raise InfeasibleFlows(f"node {i}: net outflow {net[i]} != supply {bal[i]}")
    value = sum(a.cost * int(x[j]) for j, a in enumerate(problem.arcs) if x[j])
    value += sum(int(a.fixed) for j, a in enumerate(problem.arcs) if x[j] > 0)
    return value


@dataclass(frozen=True)
class PivotEval:
    """Outcome of a tentative pivot: entering arc, leaving arc, blocking flow
    change and the exact fixed-charge objective delta at that change."""

    entering: int
    leaving: int
    delta: int
    objective_delta: int
    _dirn: int
    _path_a: tuple
    _path_b: tuple
    _version: int


class SimplexState:
    """Basic feasible solution of the bounded network LP over an instance.

    The arc set is the instance's arcs followed by one artificial arc per node
    into a virtual root; artificial arcs carry working cost BigM so they drain
    to zero flow whenever the instance is feasible. Warm starts keep the basis
    and swap the working cost vector.
    """

    def __init__(self, problem: NetworkProblem, costs):
        self.problem = problem
        n = problem.node_count
        m = problem.arc_count
        self.n = n
        self.m = m
        self.root = n
        self.E = m + n
        self.bigm = default_bigm(problem)

        arcs = problem.arcs
        supply = np.array(problem.supply, dtype=np.int64)
        total_pos = int(supply[supply > 0].sum())
        art_cap = max(total_pos, 1)

        tail = np.empty(self.E, dtype=np.int64)
        head = np.empty(self.E, dtype=np.int64)
        cap = np.empty(self.E, dtype=np.int64)
        fixed = np.zeros(self.E, dtype=np.int64)
        flow = np.zeros(self.E, dtype=np.int64)
        status = np.full(self.E, AT_LOWER, dtype=np.int8)

        for j, a in enumerate(arcs):
            tail[j] = a.tail
            head[j] = a.head
            cap[j] = a.capacity
            fixed[j] = a.fixed
        for i in range(n):
            j = m + i
            # Supply nodes point at the root, others away from it, so the
            # initial all-artificial tree is strongly feasible.
            if supply[i] > 0:
                tail[j], head[j] = i, self.root
                flow[j] = supply[i]
            else:
                tail[j], head[j] = self.root, i
                flow[j] = -supply[i]
            cap[j] = art_cap
            status[j] = IN_TREE

        costs_arr = [a.cost for a in arcs]
        integral = all(isinstance(c, (int, np.integer)) for c in costs_arr)
        cdtype = np.int64 if integral else np.float64
        base_cost = np.zeros(self.E, dtype=cdtype)
        base_cost[:m] = costs_arr
        base_cost[m:] = self.bigm

        self.tail = tail
        self.head = head
        self.cap = cap
        self.fixed = fixed
        self.flow = flow
        self.status = status
        self.base_cost = base_cost
        self.work = np.empty(self.E, dtype=np.float64)
        self.work[m:] = float(self.bigm)

        self.parent = np.full(n + 1, -1, dtype=np.int64)
        self.pred_arc = np.full(n + 1, -1, dtype=np.int64)
        self.depth = np.zeros(n + 1, dtype=np.int64)
        self.pot_work = np.zeros(n + 1, dtype=np.float64)
        self.pot_c = np.zeros(n + 1, dtype=cdtype)
        self.tree_adj = [[] for _ in range(n + 1)]
        for i in range(n):
            j = m + i
            self.tree_adj[i].append(j)
            self.tree_adj[self.root].append(j)

        self.version = 0
        self.pivot_count = 0
        self.set_costs(costs)

    # -- basis bookkeeping -------------------------------------------------

    def set_costs(self, costs) -> None:
        """Install a new working cost vector for the instance arcs."""
        c = np.asarray(costs, dtype=np.float64)
        if c.shape != (self.m,):
            raise ValueError(f"cost vector has shape {c.shape}, expected ({self.m},)")
        if not np.all(np.isfinite(c)):
            raise ValueError("costs must be finite")
        self.work[: self.m] = c
        self._rebuild()

    def _rebuild(self) -> None:
        """Recompute labels, depths and both potential vectors from the tree arcs."""
        parent, pred, depth = self.parent, self.pred_arc, self.depth
        pw, pc = self.pot_work, self.pot_c
        tail, work, basec = self.tail, self.work, self.base_cost
        root = self.root
        parent[root] = -1
        pred[root] = -1
        depth[root] = 0
        pw[root] = 0.0
        pc[root] = 0
        stack = [root]
        count = 0
        while stack:
            u = stack.pop()
            count += 1
            pe = pred[u]
            du = depth[u]
            pwu = pw[u]
            pcu = pc[u]
            for a in self.tree_adj[u]:
                if a == pe:
                    continue
                t = tail[a]
                v = self.head[a] if t == u else t
                parent[v] = u
                pred[v] = a
                depth[v] = du + 1
                if t == v:
                    pw[v] = work[a] + pwu
                    pc[v] = basec[a] + pcu
                else:
                    pw[v] = pwu - work[a]
                    pc[v] = pcu - basec[a]
                stack.append(v)
        if count != self.n + 1:
            raise SimplexStalled("basis arcs do not span every node")

    def real_flows(self) -> np.ndarray:
        """Flows on the instance arcs."""
        return self.flow[: self.m].copy()

    def has_artificial_flow(self) -> bool:
        return bool(np.any(self.flow[self.m :] != 0))

    def copy(self) -> "SimplexState":
        """Independent clone; the original is left untouched by pivots on the copy."""
        new = object.__new__(SimplexState)
        new.problem = self.problem
        for name in ("n", "m", "root", "E", "bigm", "version", "pivot_count"):
            setattr(new, name, getattr(self, name))
        for name in (
            "tail",
            "head",
            "cap",
            "fixed",
            "flow",
            "status",
            "base_cost",
            "work",
            "parent",
            "pred_arc",
            "depth",
            "pot_work",
            "pot_c",
        ):
            setattr(new, name, getattr(self, name).copy())
        new.tree_adj = [list(adj) for adj in self.tree_adj]
        return new

    # -- pivoting machinery ------------------------------------------------

    def _price(self) -> int:
        """Dantzig rule: most violating nonbasic arc, lowest index on ties."""
        pw = self.pot_work
        rc = self.work - pw[self.tail] + pw[self.head]
        viol = np.where((self.status == AT_LOWER) & (rc < -PRICE_TOL), -rc, 0.0)
        viol = np.where((self.status == AT_UPPER) & (rc > PRICE_TOL), rc, viol)
        j = int(np.argmax(viol))
        return j if viol[j] > 0.0 else -1

    def _cycle(self, j: int, dirn: int):
        """Ratio test over the basis cycle of arc j pushed in direction dirn.

        Returns (delta, leaving arc, path_a, path_b) where the paths are
        (arc, sign) pairs; sign is +1 where cycle flow increases the arc.
        path_a climbs from the node the flow leaves the tree toward the apex,
        path_b from the node where it re-enters.
        """
        tail, parent, pred, depth = self.tail, self.parent, self.pred_arc, self.depth
        flow, cap = self.flow, self.cap
        if dirn > 0:
            na, nb = int(tail[j]), int(self.head[j])
        else:
            na, nb = int(self.head[j]), int(tail[j])
        path_a = []  # cycle flow runs parent -> node while climbing
        path_b = []  # cycle flow runs node -> parent while climbing
        while na != nb:
            if depth[na] >= depth[nb]:
                e = int(pred[na])
                sign = -1 if tail[e] == na else 1
                path_a.append((e, sign))
                na = int(parent[na])
            else:
                e = int(pred[nb])
                sign = 1 if tail[e] == nb else -1
                path_b.append((e, sign))
                nb = int(parent[nb])

        delta = int(cap[j])  # entering arc sits at one of its bounds
        for e, s in path_a:
            r = int(cap[e] - flow[e]) if s > 0 else int(flow[e])
            if r < delta:
                delta = r
        for e, s in path_b:
            r = int(cap[e] - flow[e]) if s > 0 else int(flow[e])
            if r < delta:
                delta = r

        # Leaving arc: last blocking arc traversing the cycle from the apex in
        # the push direction keeps the tree strongly feasible.
        leaving = -1
        for e, s in reversed(path_a):
            r = int(cap[e] - flow[e]) if s > 0 else int(flow[e])
            if r == delta:
                leaving = e
        if int(cap[j]) == delta:
            leaving = j
        for e, s in path_b:
            r = int(cap[e] - flow[e]) if s > 0 else int(flow[e])
            if r == delta:
                leaving = e
        if leaving < 0:
            raise SimplexStalled("ratio test found no blocking arc")
        return delta, leaving, path_a, path_b

    def _apply(self, j: int, k: int, delta: int, dirn: int, path_a, path_b) -> None:
        flow, status = self.flow, self.status
        if delta:
            flow[j] += dirn * delta
            for e, s in path_a:
                flow[e] += s * delta
            for e, s in path_b:
                flow[e] += s * delta
        if k == j:
            status[j] = AT_UPPER if dirn > 0 else AT_LOWER
        else:
            status[j] = IN_TREE
            self.tree_adj[int(self.tail[j])].append(j)
            self.tree_adj[int(self.head[j])].append(j)
            fk = int(flow[k])
            if fk == 0:
                status[k] = AT_LOWER
            elif fk == int(self.cap[k]):
                status[k] = AT_UPPER
            else:
                raise SimplexStalled(f"leaving arc {k} not at a bound (flow {fk})")
            self.tree_adj[int(self.tail[k])].remove(k)
            self.tree_adj[int(self.head[k])].remove(k)
            self._rebuild()
        self.version += 1
        self.pivot_count += 1

    def optimize(self) -> int:
        """Pivot until no working-cost violation remains; returns pivots done."""
        limit = 200 * self.E + 5000
        steps = 0
        while True:
            j = self._price()
            if j < 0:
                return steps
            dirn = 1 if self.status[j] == AT_LOWER else -1
            delta, k, pa, pb = self._cycle(j, dirn)
            self._apply(j, k, delta, dirn, pa, pb)
            steps += 1
            if steps > limit:
                raise SimplexStalled("pivot limit exceeded")

    # -- diagnostics ---------------------------------------------------------

    def assert_valid_basis(self) -> None:
        """Raise when any structural or flow invariant is broken (test hook)."""
        n, m = self.n, self.m
        if int(np.sum(self.status == IN_TREE)) != n:
            raise SimplexStalled("tree arc count is not node count")
        if np.any(self.flow < 0) or np.any(self.flow > self.cap):
            raise SimplexStalled("flow bound violated")
        nb_low = (self.status == AT_LOWER) & (self.flow != 0)
        nb_up = (self.status == AT_UPPER) & (self.flow != self.cap)
        if np.any(nb_low) or np.any(nb_up):
            raise SimplexStalled("nonbasic arc away from its bound")
        net = np.zeros(n + 1, dtype=np.int64)
        np.add.at(net, self.tail, self.flow)
        np.subtract.at(net, self.head, self.flow)
        expect = np.zeros(n + 1, dtype=np.int64)
        expect[:n] = self.problem.supply
        if np.any(net != expect):
            raise SimplexStalled("flow conservation violated")
        tree = np.nonzero(self.status == IN_TREE)[0]
        rc = self.work[tree] - self.pot_work[self.tail[tree]] + self.pot_work[self.head[tree]]
        scale = max(1.0, float(np.max(np.abs(self.work)))) if self.E else 1.0
        if np.any(np.abs(rc) > 1e-6 * scale):
            raise SimplexStalled("tree arc with nonzero reduced cost")


def solve_lp(problem: NetworkProblem, costs) -> SimplexState:
    """Cold-start optimal basic solution of min costs.x over the flow polytope."""
    validate(problem)
    state = SimplexState(problem, costs)
    state.optimize()
    if state.has_artificial_flow():
        raise Infeasible("no feasible flow meets all supplies")
    return state


def reoptimize(state: SimplexState, new_costs) -> SimplexState:
    """Re-optimize an existing basis after a cost change (warm start)."""
    state.set_costs(new_costs)
    state.optimize()
    if state.has_artificial_flow():
        raise Infeasible("no feasible flow meets all supplies")
    return state


def evaluate_fc_entering(state: SimplexState, problem: NetworkProblem, j: int) -> PivotEval:
    """Ratio test for nonbasic arc j plus the exact fixed-charge objective delta.

    The delta is evaluated at the full blocking flow change: linear cost along
    the cycle plus charges newly incurred minus charges released. Degenerate
    evaluations (delta 0) are legal and carry a zero flow delta.
    """
    if problem is not state.problem and problem != state.problem:
        raise ValueError("problem does not match the state's instance")
    if j < 0 or j >= state.m:
        raise ValueError(f"arc index {j} out of range")
    if state.status[j] == IN_TREE:
        raise ValueError(f"arc {j} is basic; entering arc must be nonbasic")
    dirn = 1 if state.status[j] == AT_LOWER else -1
    delta, k, path_a, path_b = state._cycle(j, dirn)

    rc = (state.base_cost[j] - state.pot_c[state.tail[j]] + state.pot_c[state.head[j]]).item()
    lin = (rc if dirn > 0 else -rc) * delta
    gain = 0
    drop = 0
    if delta > 0:
        flow, fixed = state.flow, state.fixed
        for e, s in path_a:
            if s > 0:
                if flow[e] == 0:
                    gain += int(fixed[e])
            elif flow[e] == delta:
                drop += int(fixed[e])
        for e, s in path_b:
            if s > 0:
                if flow[e] == 0:
                    gain += int(fixed[e])
            elif flow[e] == delta:
                drop += int(fixed[e])
        if dirn > 0:
            gain += int(state.fixed[j])
        elif delta == int(state.cap[j]):
            drop += int(state.fixed[j])
    return PivotEval(
        entering=j,
        leaving=k,
        delta=delta,
        objective_delta=lin + gain - drop,
        _dirn=dirn,
        _path_a=tuple(path_a),
        _path_b=tuple(path_b),
        _version=state.version,
    )


def pivot(state: SimplexState, ev: PivotEval) -> SimplexState:
    """Apply an evaluated pivot: basis exchange or bound flip plus flow update."""
    if ev._version != state.version:
        raise StalePivotEval("state changed since this pivot was evaluated")
    state._apply(ev.entering, ev.leaving, ev.delta, ev._dirn, list(ev._path_a), list(ev._path_b))
    return state


def evaluate_all_entering(state: SimplexState):
    """Vectorized tentative-pivot sweep over every nonbasic instance arc.

    Returns (candidates, delta, objective_delta, admissible). Inadmissible
    entries are moves that would push positive flow onto an artificial root
    arc; their objective delta is reported as 0 and must not be pivoted.
    Values agree exactly with evaluate_fc_entering on admissible arcs.
    """
    m = state.m
    status = state.status
    cand = np.nonzero(status[:m] != IN_TREE)[0]
    k = cand.size
    if k == 0:
        zi = np.zeros(0, dtype=np.int64)
        return cand, zi, zi.copy(), np.zeros(0, dtype=bool)

    tail, head = state.tail, state.head
    cap, flow, fixed = state.cap, state.flow, state.fixed
    parent, pred, depth = state.parent, state.pred_arc, state.depth

    dirn = np.where(status[cand] == AT_LOWER, 1, -1).astype(np.int64)
    na = np.where(dirn > 0, tail[cand], head[cand])
    nb = np.where(dirn > 0, head[cand], tail[cand])

    res = cap[cand].astype(np.int64)
    gain_raw = np.zeros(k, dtype=np.int64)
    art_inc = np.zeros(k, dtype=bool)

    ca = na.copy()
    cb = nb.copy()
    act = np.nonzero(ca != cb)[0]
    while act.size:
        da = depth[ca[act]]
        db = depth[cb[act]]
        ia = act[da >= db]
        ib = act[db >= da]
        if ia.size:
            w = ca[ia]
            e = pred[w]
            dec = tail[e] == w  # cycle flow runs parent -> node on this side
            r = np.where(dec, flow[e], cap[e] - flow[e])
            res[ia] = np.minimum(res[ia], r)
            inc = ~dec
            gain_raw[ia] += np.where(inc & (flow[e] == 0), fixed[e], 0)
            art_inc[ia] |= inc & (e >= m)
            ca[ia] = parent[w]
        if ib.size:
            w = cb[ib]
            e = pred[w]
            inc = tail[e] == w  # cycle flow runs node -> parent on this side
            r = np.where(inc, cap[e] - flow[e], flow[e])
            res[ib] = np.minimum(res[ib], r)
            gain_raw[ib] += np.where(inc & (flow[e] == 0), fixed[e], 0)
            art_inc[ib] |= inc & (e >= m)
            cb[ib] = parent[w]
        act = act[ca[act] != cb[act]]

    delta = res
    admissible = ~(art_inc & (delta > 0))
    d_eff = np.where(admissible, delta, 0)

    drop = np.zeros(k, dtype=np.int64)
    if np.any(d_eff > 0):
        ca = na.copy()
        cb = nb.copy()
        act = np.nonzero((ca != cb) & (d_eff > 0))[0]
        while act.size:
            da = depth[ca[act]]
            db = depth[cb[act]]
            ia = act[da >= db]
            ib = act[db >= da]
            if ia.size:
                w = ca[ia]
                e = pred[w]
                dec = tail[e] == w
                drop[ia] += np.where(dec & (flow[e] == d_eff[ia]), fixed[e], 0)
                ca[ia] = parent[w]
            if ib.size:
                w = cb[ib]
                e = pred[w]
                dec = tail[e] != w
                drop[ib] += np.where(dec & (flow[e] == d_eff[ib]), fixed[e], 0)
                cb[ib] = parent[w]
            act = act[ca[act] != cb[act]]

    fj = fixed[cand]
    gain = np.where(d_eff > 0, gain_raw, 0)
    gain += np.where((dirn > 0) & (d_eff > 0), fj, 0)
    drop += np.where((dirn < 0) & (d_eff > 0) & (d_eff == cap[cand]), fj, 0)

    rc = state.base_cost[cand] - state.pot_c[tail[cand]] + state.pot_c[head[cand]]
    xoj = dirn * rc * d_eff + gain - drop
    return cand, delta, xoj, admissible
