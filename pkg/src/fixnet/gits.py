"""Self-organizing ghost-image tabu search over a warm-started network simplex.

The search keeps an idealized LP relaxation whose per-arc penalties p_j = F_j/v_j
spread each fixed charge over a self-adjusting typical flow v_j. Outer passes
alternate penalty re-solves with a restriction refinement and an inside loop of
fixed-charge-guided simplex pivots under simple tabu control; duplicate zero
patterns trigger frequency-based diversification.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, fields, replace
from typing import Optional

import numpy as np

from . import netcore
from .netcore import fc_objective, reoptimize, solve_lp, validate


class _StopSearch(Exception):
    """Raised when the diversification budget is exhausted."""


@dataclass
class Params:
    """Tuning knobs. Field names double as config / --param keys."""

    MaxIter: int = 50
    MaxPass: int = 10
    MaxInsideImprove: int = 40
    BadLuck: int = 5
    OutOfLuck: int = 20
    Alpha1: float = 0.3
    Alpha2: float = 0.45
    Alpha3: float = 0.25
    Beta: float = 0.4
    MaxSol: int = 1000
    TabuTenure: int = 10
    DescentTenure: Optional[int] = None
    AscentTenure: Optional[int] = None
    LimMatch: int = 10
    sLim: int = 10
    ZeroRefresh: int = 30
    DoTabu: bool = True
    epsilon: float = 1e-6
    rng_seed: int = 0
    MaxOutsideIter: Optional[int] = None
    TimeLimit: Optional[float] = None
    diversify_use_capacity: bool = False

    def __post_init__(self):
        if self.DescentTenure is None:
            self.DescentTenure = self.TabuTenure
        if self.AscentTenure is None:
            self.AscentTenure = self.TabuTenure
        for name in (
            "MaxIter",
            "MaxPass",
            "MaxInsideImprove",
            "BadLuck",
            "OutOfLuck",
            "MaxSol",
            "TabuTenure",
            "DescentTenure",
            "AscentTenure",
            "LimMatch",
            "sLim",
            "ZeroRefresh",
        ):
            if int(getattr(self, name)) < 1:
                raise ValueError(f"{name} must be a positive integer")
        if abs(self.Alpha1 + self.Alpha2 + self.Alpha3 - 1.0) > 1e-9:
            raise ValueError("Alpha1 + Alpha2 + Alpha3 must equal 1")
        if not 0.0 <= self.Beta <= 1.0:
            raise ValueError("Beta must lie in [0, 1]")


_BOOL_TRUE = {"1", "true", "yes", "on"}
_BOOL_FALSE = {"0", "false", "no", "off"}


def _cast_field(f, raw: str):
    raw = raw.strip()
    kind = f.type
    if "bool" in kind:
        low = raw.lower()
        if low in _BOOL_TRUE:
            return True
        if low in _BOOL_FALSE:
            return False
        raise ValueError(f"{f.name}: expected a boolean, got {raw!r}")
    if "Optional" in kind:
        if raw.lower() in ("", "none"):
            return None
        return float(raw) if "float" in kind else int(raw)
    if "float" in kind:
        return float(raw)
    return int(raw)


def params_to_config(params: Params) -> str:
    """Flat key=value serialization; None-valued fields are omitted."""
    lines = []
    for f in fields(params):
        val = getattr(params, f.name)
        if val is None:
            continue
        lines.append(f"{f.name}={val}")
    return "\n".join(lines) + "\n"


def params_from_config(text: str, base: Optional[Params] = None) -> Params:
    """Parse key=value lines (comments start with '#') on top of base defaults."""
    params = base if base is not None else Params()
    pairs = []
    for ln, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"config line {ln}: expected KEY=VALUE, got {raw!r}")
        key, val = line.split("=", 1)
        pairs.append(f"{key.strip()}={val.strip()}")
    return apply_overrides(params, pairs)


def apply_overrides(params: Params, pairs) -> Params:
    """Apply KEY=VALUE strings; keys are Params field names."""
    by_name = {f.name: f for f in fields(params)}
    updates = {}
    for pair in pairs:
        if "=" not in pair:
            raise ValueError(f"expected KEY=VALUE, got {pair!r}")
        key, val = pair.split("=", 1)
        key = key.strip()
        if key not in by_name:
            raise ValueError(f"unknown parameter {key!r}")
        updates[key] = _cast_field(by_name[key], val)
    return replace(params, **updates)


@dataclass
class Penalties:
    """Penalty state: denominators v, penalties p, history means, proxy bounds."""

    v: np.ndarray
    p: np.ndarray
    mean: np.ndarray
    u_o: int
    u0: np.ndarray
    fc_idx: np.ndarray
    num_sol: int = 0


@dataclass
class SearchMemory:
    """Tabu tenures, duplicate-signature ring and every loop counter and flag."""

    tabu: np.ndarray
    ring: np.ndarray
    sum_zero: np.ndarray
    zero_now: np.ndarray
    first: int = 0
    jiter: int = 0
    inside_iter: int = 0
    pass_num: int = 0
    no_luck: int = 0
    n_match: int = 0
    recover: int = 0
    max_recover: int = 0
    s_max: int = 0
    best_iter: int = 0
    best_iter_g: int = 0
    gbest_iter: int = 0
    best_pass: int = 0
    ts_improve: int = 0
    all_ts_improve: int = 0
    descent_improve: int = 0
    last_inside_improve: int = 0
    tenure: int = 0
    aspire: int = 0
    v_iter: int = 0
    descent: bool = True
    improve: bool = False
    inside_ok: bool = True
    outside_ok: bool = False

    @classmethod
    def fresh(cls, arc_count: int, params: Params) -> "SearchMemory":
        return cls(
            tabu=np.zeros(arc_count, dtype=np.int64),
            ring=np.zeros((params.sLim, arc_count), dtype=bool),
            sum_zero=np.zeros(arc_count, dtype=np.int64),
            zero_now=np.zeros(arc_count, dtype=bool),
            tenure=params.TabuTenure,
            v_iter=params.MaxIter // 4,
        )


@dataclass
class RunResult:
    """Best solution found plus run statistics."""

    best_flows: np.ndarray
    best_value: int
    best_pass: int
    gbest_iter: int
    passes_used: int
    outside_iters: int
    inside_iters: int
    total_pivots: int
    elapsed: float
    gbest_trace: list = field(default_factory=list)


def build_penalties(pen: Penalties, fixed: np.ndarray, bigm: float, eps: float) -> np.ndarray:
    """p_j = F_j / v_j with the conventions: F_j = 0 gives 0, v_j < eps gives
    BigM, v_j > BigM gives 0. BigM is also the price ceiling: a denominator
    small enough to push F_j / v_j past it marks the arc as closed, exactly
    like v_j < eps. Stores and returns the penalty vector."""
    v = pen.v
    fc = fixed > 0
    p = np.zeros(len(fixed), dtype=np.float64)
    small = fc & (v < eps)
    huge = fc & (v > bigm)
    rest = fc & ~small & ~huge
    p[small] = float(bigm)
    p[rest] = np.minimum(fixed[rest] / v[rest], float(bigm))
    pen.p = p
    return p


def v_update(pen: Penalties, xstar: np.ndarray, params: Params) -> Penalties:
    """Blend the locally best flows into the typical-flow estimates v.

    Mean_j tracks a running mean over at most MaxSol recorded solutions; v_j
    becomes the Alpha-weighted mix of the incumbent flow, the previous v_j and
    the Beta-damped history/proxy mean.
    """
    pen.num_sol += 1
    y = min(pen.num_sol, params.MaxSol)
    x = 1.0 / y
    i = pen.fc_idx
    xs = xstar[i].astype(np.float64)
    pen.mean[i] = x * xs + (1.0 - x) * pen.mean[i]
    umean = params.Beta * pen.mean[i] + (1.0 - params.Beta) * pen.u_o
    pen.v[i] = params.Alpha1 * xs + params.Alpha2 * pen.v[i] + params.Alpha3 * umean
    return pen


class GhostImageSearch:
    """One run of the search on one instance; owns its simplex state and memory."""

    def __init__(self, problem: netcore.NetworkProblem, params: Optional[Params] = None,
                 collect_trace: bool = False):
        self.problem = validate(problem)
        self.params = params if params is not None else Params()
        m = problem.arc_count
        self.m = m
        self.c = np.array([a.cost for a in problem.arcs], dtype=np.int64)
        self.c_float = self.c.astype(np.float64)
        self.F = np.array([a.fixed for a in problem.arcs], dtype=np.int64)
        self.U = np.array([a.capacity for a in problem.arcs], dtype=np.int64)
        self.fc_mask = self.F > 0
        self.fc_idx = np.nonzero(self.fc_mask)[0]
        self.state: Optional[netcore.SimplexState] = None
        self.pen: Optional[Penalties] = None
        self.mem: Optional[SearchMemory] = None
        self.collect_trace = collect_trace
        self.move_log: list = []
        self.trace: list = []
        self.total_inside = 0
        self.xdd_val = 0

    # -- global best bookkeeping --------------------------------------------

    def _record_global(self, set_gbest_iter: bool = False, set_best_pass: bool = False) -> None:
        if self.xstar_val < self.xg_val:
            self.xg_val = self.xstar_val
            self.xg = self.xstar.copy()
            if set_gbest_iter:
                self.mem.gbest_iter = self.mem.jiter
            if set_best_pass:
                self.mem.best_pass = self.mem.pass_num
            self.trace.append(self.xg_val)

    def _v_update(self) -> None:
        v_update(self.pen, self.xstar, self.params)
        self._record_global(set_gbest_iter=True)

    def _ghost_reoptimize(self) -> None:
        """Re-solve the penalized image. If closure-level penalties ever make
        the artificial root arcs cheaper than every real route, the image has
        stopped describing the instance; fall back to the plain relaxation
        (always artificial-free, feasibility was proven at bootstrap)."""
        try:
            reoptimize(self.state, self.c_float + self.pen.p)
        except netcore.Infeasible:
            reoptimize(self.state, self.c_float)

    # -- bootstrap: initial LP, first penalties, first test solution ---------

    def _bootstrap(self) -> None:
        prm = self.params
        self.mem = mem = SearchMemory.fresh(self.m, prm)
        self.state = solve_lp(self.problem, self.c_float)
        self.bigm = self.state.bigm
        self._max_outside = prm.MaxOutsideIter if prm.MaxOutsideIter is not None else prm.MaxIter

        x = self.state.real_flows()
        self.xstar = x
        self.xstar_val = fc_objective(self.problem, x)
        self.xg = None
        self.xg_val = self.bigm
        self.trace = []

        i = self.fc_idx
        u_o = int(x[i].max()) if i.size else 0
        pen = Penalties(
            v=self.U.astype(np.float64),
            p=np.zeros(self.m, dtype=np.float64),
            mean=self.U.astype(np.float64),
            u_o=u_o,
            u0=np.zeros(self.m, dtype=np.int64),
            fc_idx=i,
        )
        pen.u0[i] = x[i]
        self.pen = pen
        build_penalties(pen, self.F, self.bigm, prm.epsilon)

        self._ghost_reoptimize()
        x1 = self.state.real_flows()
        xo1 = fc_objective(self.problem, x1)
        pen.num_sol = 1
        pen.u0[i] = np.maximum(pen.u0[i], x1[i])
        if xo1 < self.xstar_val:
            self.xstar_val = xo1
            self.xstar = x1
            mem.descent = True
            self._v_update()
        mem.zero_now = (x1 == 0) & self.fc_mask
        mem.first = 0
        mem.ring[0] = mem.zero_now
        mem.sum_zero = mem.zero_now.astype(np.int64)
        mem.outside_ok = True

    # -- phase I: restriction refinement -------------------------------------

    def phase1_restrict(self) -> np.ndarray:
        """Pin the currently-zero charged arcs at zero cost-wise and re-optimize."""
        mem, pen = self.mem, self.pen
        costs = self.c_float + np.where(mem.zero_now, float(self.bigm), 0.0)
        reoptimize(self.state, costs)
        x = self.state.real_flows()
        self.xdd_val = fc_objective(self.problem, x)
        if self.xdd_val < self.xstar_val:
            mem.descent = True
        if mem.jiter <= mem.v_iter:
            i = pen.fc_idx
            pen.u0[i] = np.maximum(pen.u0[i], x[i])
        return x

    # -- phase II: inside loop -----------------------------------------------

    def inside_loop(self) -> None:
        prm, mem, state = self.params, self.mem, self.state
        mem.inside_iter = 0
        mem.best_iter = 0
        mem.ts_improve = 0
        mem.descent_improve = 0
        mem.last_inside_improve = 0
        mem.descent = True
        mem.improve = False
        mem.tenure = prm.DescentTenure
        mem.tabu[:] = 0
        mem.aspire = min(self.xdd_val, self.xstar_val)
        mem.inside_ok = True
        while mem.inside_iter < prm.MaxIter and mem.inside_ok:
            mem.inside_iter += 1
            self.total_inside += 1
            cand, delta, xoj, feas = netcore.evaluate_all_entering(state)
            if cand.size:
                allowed = feas & (
                    (mem.tabu[cand] < mem.inside_iter) | (xoj < mem.aspire - self.xdd_val)
                )
                sel = np.nonzero(allowed)[0]
            else:
                sel = np.zeros(0, dtype=np.int64)
            if sel.size:
                pos = sel[int(np.argmin(xoj[sel]))]
                jstar = int(cand[pos])
                ev = netcore.evaluate_fc_entering(state, self.problem, jstar)
                assert ev.objective_delta == xoj[pos]
                if self.collect_trace:
                    self.move_log.append(
                        (
                            mem.jiter,
                            mem.inside_iter,
                            jstar,
                            ev.leaving,
                            int(ev.objective_delta),
                            mem.descent,
                            int(mem.tabu[jstar]),
                            int(mem.aspire - self.xdd_val),
                        )
                    )
                self.descend_step(ev)
            # no admissible move: count the iteration, pivot nothing
            if mem.inside_iter - mem.last_inside_improve > prm.MaxInsideImprove:
                mem.inside_ok = False

    def pivot_jstar(self, ev: netcore.PivotEval) -> None:
        """Apply the chosen pivot and refresh the per-arc max-flow proxies."""
        netcore.pivot(self.state, ev)
        self.xdd_val += ev.objective_delta
        i = self.pen.fc_idx
        f = self.state.flow[: self.m]
        self.pen.u0[i] = np.maximum(self.pen.u0[i], f[i])

    def descend_step(self, ev: netcore.PivotEval) -> None:
        """One move: descent while deltas improve, then a single tabu ascent phase.

        The first non-improving delta flips Descent off for the rest of the
        inside loop; later improving moves restore the descent tenure without
        re-entering the descent phase.
        """
        prm, mem = self.params, self.mem
        if mem.descent:
            if ev.objective_delta < 0:
                self.pivot_jstar(ev)
                mem.aspire = min(self.xstar_val, self.xdd_val)
                mem.descent_improve += 1
            else:
                mem.descent = False
                mem.tenure = prm.AscentTenure
                if self.xdd_val < self.xstar_val:
                    mem.improve = True
                    mem.best_iter = mem.last_inside_improve = mem.inside_iter - 1
                    mem.best_iter_g = mem.jiter
                    self.xstar_val = self.xdd_val
                    self.xstar = self.state.real_flows()
                    self._v_update()
                if not prm.DoTabu:
                    mem.inside_ok = False
                    return
                self.pivot_jstar(ev)
        else:
            self.pivot_jstar(ev)
            if ev.objective_delta < 0:
                mem.tenure = prm.DescentTenure
                if self.xdd_val < self.xstar_val:
                    mem.improve = True
                    mem.best_iter = mem.last_inside_improve = mem.inside_iter
                    mem.best_iter_g = mem.jiter
                    self.xstar_val = self.xdd_val
                    self.xstar = self.state.real_flows()
                    mem.ts_improve += 1
                    mem.all_ts_improve += 1
                    mem.aspire = self.xstar_val
                    self._v_update()
            else:
                mem.tenure = prm.AscentTenure
        if ev.leaving < self.m:  # artificial root arcs never re-enter anyway
            mem.tabu[ev.leaving] = mem.inside_iter + mem.tenure

    # -- penalty self-organization -------------------------------------------

    def mini_diversify(self) -> None:
        """Reflect v through the scalar flow proxy and restart the local best."""
        pen = self.pen
        i = pen.fc_idx
        pen.v[i] = np.maximum(pen.u_o - pen.v[i], 1.0)
        self._record_global()
        self.xstar_val = self.bigm

    def dup_check(self) -> bool:
        """Scan the signature ring for the current zero pattern.

        A hit past the match budget triggers diversification; a miss records
        the pattern, accumulates frequency counts and evicts the oldest slot.
        Returns whether a duplicate was found.
        """
        prm, mem = self.params, self.mem
        s = mem.first
        match_pos = 0
        for chk in range(1, prm.sLim + 1):
            if np.array_equal(mem.ring[s], mem.zero_now):
                match_pos = chk
                break
            s = (s + 1) % prm.sLim
        if match_pos:
            mem.n_match += 1
            if mem.n_match > prm.LimMatch:
                mem.s_max = max(mem.s_max, match_pos)
                self.diversify()
                mem.n_match = 0
            return True
        if mem.n_match > 0:
            mem.recover += 1
            mem.max_recover = max(mem.recover, mem.max_recover)
            mem.n_match = 0
        mem.sum_zero += mem.zero_now
        last = (mem.first - 1) % prm.sLim
        mem.ring[last] = mem.zero_now
        mem.first = last
        return False

    def diversify(self) -> None:
        """Frequency-based restart of v from the zero-pattern counts."""
        prm, mem, pen = self.params, self.mem, self.pen
        self._record_global(set_best_pass=True)
        if mem.pass_num == prm.MaxPass:
            raise _StopSearch
        mem.pass_num += 1
        i = pen.fc_idx
        if i.size:
            counts = mem.sum_zero[i]
            mx = int(counts.max())
            f = counts / mx if mx > 0 else np.zeros(i.size, dtype=np.float64)
            base_hi = self.U[i].astype(np.float64) if prm.diversify_use_capacity \
                else pen.u0[i].astype(np.float64)
            v_hi = np.floor(f * base_hi)
            v_lo = np.maximum(np.floor(f * pen.u0[i]), 1.0)
            pen.v[i] = np.where(2 * counts > mx, v_hi, v_lo)
        build_penalties(pen, self.F, self.bigm, prm.epsilon)
        self._ghost_reoptimize()
        x = self.state.real_flows()
        self.xstar = x
        self.xstar_val = fc_objective(self.problem, x)
        pen.u0[i] = np.maximum(pen.u0[i], x[i])
        mem.zero_now = (x == 0) & self.fc_mask
        self._v_update()
        mem.first = 0
        mem.ring[:] = False
        mem.ring[0] = mem.zero_now
        if mem.pass_num % prm.ZeroRefresh == 0:
            mem.sum_zero[:] = 0

    # -- main loop -------------------------------------------------------------

    def run(self) -> RunResult:
        t0 = time.perf_counter()
        prm = self.params
        self._bootstrap()
        mem, pen = self.mem, self.pen
        try:
            while mem.outside_ok:
                if prm.TimeLimit is not None and time.perf_counter() - t0 > prm.TimeLimit:
                    break
                self.phase1_restrict()
                self.inside_loop()
                mem.jiter += 1
                if mem.jiter > self._max_outside:
                    mem.outside_ok = False
                if mem.improve:
                    mem.no_luck = 0
                else:
                    mem.no_luck += 1
                    if mem.no_luck == prm.OutOfLuck:
                        mem.outside_ok = False
                        break
                    if mem.no_luck == prm.BadLuck:
                        self.mini_diversify()
                build_penalties(pen, self.F, self.bigm, prm.epsilon)
                self._ghost_reoptimize()
                xp = self.state.real_flows()
                xo = fc_objective(self.problem, xp)
                i = pen.fc_idx
                pen.u0[i] = np.maximum(pen.u0[i], xp[i])
                if xo < self.xstar_val:
                    self.xstar_val = xo
                    self.xstar = xp
                    self._v_update()
                mem.zero_now = (xp == 0) & self.fc_mask
                self.dup_check()
        except _StopSearch:
            pass
        self._record_global(set_best_pass=True)
        elapsed = time.perf_counter() - t0
        return RunResult(
            best_flows=self.xg.copy(),
            best_value=self.xg_val,
            best_pass=mem.best_pass,
            gbest_iter=mem.gbest_iter,
            passes_used=mem.pass_num,
            outside_iters=mem.jiter,
            inside_iters=self.total_inside,
            total_pivots=self.state.pivot_count,
            elapsed=elapsed,
            gbest_trace=list(self.trace),
        )


def run(problem: netcore.NetworkProblem, params: Optional[Params] = None,
        collect_trace: bool = False) -> RunResult:
    """Solve a fixed-charge instance heuristically; deterministic per input."""
    return GhostImageSearch(problem, params, collect_trace=collect_trace).run()
