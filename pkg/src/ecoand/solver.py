"""Parametric NLP solver for corridor crossing profiles.

The decision object is a fixed-count sequence of linear-acceleration
triplets (a_i, b_i, tau_i): 3 segments for a single intersection and
4(N-1)+3 for N intersections, with the crossing knots at indices
4, 8, ..., 4(N-1) and the last knot.  Objective and constraints are
polynomials in the triplets, so analytic first derivatives are assembled
alongside every evaluation and handed to an SQP method; nonconvexity is
handled by a deterministic multistart.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np
from scipy.optimize import lsq_linear, minimize

from .kinematics import (
    AccelProfile,
    LinearSegment,
    VehicleState,
    evaluate_profile,
    integrate_numeric,
)
from .planner import WindowPlan, enumerate_window_plans, reachable_time_bounds
from .scenario import Scenario, ScenarioOptions, is_green, validate

_DEGENERATE = 1e-7  # segments shorter than this are treated as zero-duration


class InfeasibleError(Exception):
    """No feasible profile was found."""


class NumericalFailureError(Exception):
    """The optimizer produced non-finite numbers on every start."""


@dataclass(frozen=True)
class SolverOptions:
    feas_tol: float = 1e-6
    stat_tol: float = 1e-4
    multistart: int = 8
    max_iter: int = 400
    seed: int = 0
    plans_cap: int = 64
    jerk_limit: float | None = None
    u0: float | None = None
    # Experimental override of the per-leg segment counts (defaults to
    # 4 per leg and 3 for the last).
    segments_per_leg: tuple[int, ...] | None = None


@dataclass(frozen=True)
class Solution:
    profile: AccelProfile
    crossing_times: tuple[float, ...]
    plan: WindowPlan
    J_t: float
    J_u: float
    J: float
    max_violation: float
    stationarity: float
    max_knot_jump: float
    terminal_accel: float
    per_segment_costs: tuple[float, ...] | None = None
    z: np.ndarray | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class StructuralReport:
    """Emergent-property audit; reported, never enforced."""

    max_knot_jump: float
    terminal_accel: float
    max_speed_violation: float
    crossings_green: tuple[bool, ...]
    crossings_in_plan_windows: tuple[bool, ...]


def _default_layout(n_intersections: int) -> tuple[int, ...]:
    if n_intersections == 1:
        return (3,)
    return (4,) * (n_intersections - 1) + (3,)


@dataclass(frozen=True)
class ParametricProblem:
    sc: Scenario
    plan: WindowPlan
    layout: tuple[int, ...]  # segments per leg
    jerk_limit: float | None
    u0: float | None

    @property
    def M(self) -> int:
        return sum(self.layout)

    @property
    def crossing_knots(self) -> tuple[int, ...]:
        out, acc = [], 0
        for n in self.layout:
            acc += n
            out.append(acc)
        return tuple(out)

    @property
    def single(self) -> bool:
        return self.sc.n_intersections == 1

    def leg_of_segment(self, s: int) -> int:
        """Leg index (0-based) of 1-based segment s."""
        acc = 0
        for leg, n in enumerate(self.layout):
            acc += n
            if s <= acc:
                return leg
        return len(self.layout) - 1

    def v_cap_at_knot(self, i: int) -> float:
        """Speed ceiling binding at knot i (stricter of adjacent legs)."""
        cap = self.sc.segment_v_max(self.leg_of_segment(i))
        if i < self.M:
            cap = min(cap, self.sc.segment_v_max(self.leg_of_segment(i + 1)))
        return cap

    @property
    def tau_ub(self) -> float:
        return self.plan.windows[-1][1]


def build_problem(
    sc: Scenario, plan: WindowPlan, opts: SolverOptions | None = None
) -> ParametricProblem:
    """Assemble the parametric program for one window plan."""
    opts = opts or SolverOptions()
    n = sc.n_intersections
    if len(plan.k) != n or len(plan.windows) != n:
        raise ValueError("window plan does not match the corridor")
    for lo, hi in plan.windows:
        if lo > hi or not math.isfinite(lo) or not math.isfinite(hi):
            raise ValueError("window plan has an empty or unbounded crossing window")
    layout = opts.segments_per_leg or _default_layout(n)
    if len(layout) != n or any(m < 1 for m in layout):
        raise ValueError("segment layout must give at least one segment per leg")
    jerk = opts.jerk_limit if opts.jerk_limit is not None else sc.options.jerk_limit
    u0 = opts.u0 if opts.u0 is not None else sc.options.u0
    return ParametricProblem(sc=sc, plan=plan, layout=layout, jerk_limit=jerk, u0=u0)


class _Evaluator:
    """Shared evaluation of states, objective and constraints with jacobians."""

    def __init__(self, pb: ParametricProblem):
        self.pb = pb
        self._key = None
        self._data = None

    def _compute(self, z: np.ndarray) -> dict:
        pb = self.pb
        M = pb.M
        n = 3 * M
        sc = pb.sc
        a = z[:M]
        b = z[M : 2 * M]
        tau = np.concatenate(([sc.initial.t], z[2 * M :]))
        v = np.zeros(M + 1)
        x = np.zeros(M + 1)
        dv = np.zeros((M + 1, n))
        dx = np.zeros((M + 1, n))
        v[0] = sc.initial.v
        E = 0.0
        dE = np.zeros(n)
        for i in range(1, M + 1):
            ai, bi = a[i - 1], b[i - 1]
            t1, tp = tau[i], tau[i - 1]
            d = t1 - tp
            ia, ib, it1 = i - 1, M + i - 1, 2 * M + i - 1
            it0 = 2 * M + i - 2 if i >= 2 else None
            c2 = t1 * t1 - tp * tp
            c3 = t1**3 - tp**3
            v[i] = v[i - 1] + bi * d + 0.5 * ai * c2
            dv[i] = dv[i - 1]
            dv[i, ia] += 0.5 * c2
            dv[i, ib] += d
            dv[i, it1] += bi + ai * t1
            if it0 is not None:
                dv[i, it0] += -bi - ai * tp
            poly = t1**3 + 2.0 * tp**3 - 3.0 * tp * tp * t1
            x[i] = x[i - 1] + v[i - 1] * d + 0.5 * bi * d * d + ai / 6.0 * poly
            dx[i] = dx[i - 1] + dv[i - 1] * d
            dx[i, ia] += poly / 6.0
            dx[i, ib] += 0.5 * d * d
            dx[i, it1] += v[i - 1] + bi * d + 0.5 * ai * c2
            if it0 is not None:
                dx[i, it0] += -v[i - 1] - bi * d + ai * (tp * tp - tp * t1)
            E += ai * ai / 3.0 * c3 + ai * bi * c2 + bi * bi * d
            dE[ia] += 2.0 * ai / 3.0 * c3 + bi * c2
            dE[ib] += ai * c2 + 2.0 * bi * d
            dE[it1] += (ai * t1 + bi) ** 2
            if it0 is not None:
                dE[it0] += -((ai * tp + bi) ** 2)

        rho_t, rho_u = sc.weights.rho_t, sc.weights.rho_u
        f = rho_t * tau[M] + rho_u * E
        g = rho_u * dE.copy()
        g[n - 1] += rho_t

        eq_vals: list[float] = []
        eq_jac: list[np.ndarray] = []
        for knot, cum in zip(pb.crossing_knots, sc.cumulative_lengths):
            eq_vals.append(x[knot] - cum)
            eq_jac.append(dx[knot])
        if pb.u0 is not None:
            row = np.zeros(n)
            row[0] = tau[0]
            row[M] = 1.0
            eq_vals.append(a[0] * tau[0] + b[0] - pb.u0)
            eq_jac.append(row)

        iq_vals: list[float] = []
        iq_jac: list[np.ndarray] = []

        def add(val, row):
            iq_vals.append(val)
            iq_jac.append(row)

        def e(idx):
            row = np.zeros(n)
            row[idx] = 1.0
            return row

        # Knot ordering.
        for i in range(1, M + 1):
            row = e(2 * M + i - 1)
            if i >= 2:
                row[2 * M + i - 2] = -1.0
            add(tau[i] - tau[i - 1], row)
        # Crossing windows.
        for knot, (lo, hi) in zip(pb.crossing_knots, pb.plan.windows):
            add(tau[knot] - lo, e(2 * M + knot - 1))
            add(hi - tau[knot], -e(2 * M + knot - 1))

        # The single-intersection problem only needs the terminal speed and
        # initial acceleration bounds at its true optimum, whose speed is
        # monotone.  A local method can exploit the gap, so the knot speed
        # bounds, per-endpoint acceleration bounds and sign constraints are
        # kept in both variants; they are inactive at the true optimum and
        # make every single-leg solution feasible for the joint program.
        lim = sc.limits
        for i in range(1, M + 1):
            cap = pb.v_cap_at_knot(i)
            add(v[i] - lim.v_min, dv[i])
            add(cap - v[i], -dv[i])
        for i in range(1, M + 1):
            ai, bi = a[i - 1], b[i - 1]
            t1, tp = tau[i], tau[i - 1]
            ia, ib, it1 = i - 1, M + i - 1, 2 * M + i - 1
            it0 = 2 * M + i - 2 if i >= 2 else None
            for t_pt, it_pt in ((t1, it1), (tp, it0)):
                u_pt = ai * t_pt + bi
                row = np.zeros(n)
                row[ia] = t_pt
                row[ib] = 1.0
                if it_pt is not None:
                    row[it_pt] = ai
                add(u_pt - lim.u_min, row)
                add(lim.u_max - u_pt, -row)
            # Monotone-speed sign constraint.
            p = ai * t1 + bi
            q = ai * tp + bi
            row = np.zeros(n)
            row[ia] = t1 * q + tp * p
            row[ib] = p + q
            row[it1] = ai * q
            if it0 is not None:
                row[it0] = ai * p
            add(p * q, row)
        if pb.jerk_limit is not None:
            for i in range(M):
                add(pb.jerk_limit - a[i], -e(i))
                add(a[i] + pb.jerk_limit, e(i))

        eq_v = np.array(eq_vals)
        eq_J = np.array(eq_jac) if eq_jac else np.zeros((0, n))
        iq_v = np.array(iq_vals)
        iq_J = np.array(iq_jac)
        viol = 0.0
        if eq_v.size:
            viol = float(np.max(np.abs(eq_v)))
        if iq_v.size:
            viol = max(viol, float(np.max(np.maximum(0.0, -iq_v))))
        return {
            "f": f,
            "g": g,
            "eq": eq_v,
            "eq_jac": eq_J,
            "iq": iq_v,
            "iq_jac": iq_J,
            "viol": viol,
            "tau": tau,
            "v": v,
            "x": x,
            "E": E,
        }

    def eval(self, z: np.ndarray) -> dict:
        key = z.tobytes()
        if key != self._key:
            self._key = key
            self._data = self._compute(np.asarray(z, dtype=float))
        return self._data


def _variable_bounds(pb: ParametricProblem) -> list[tuple[float, float]]:
    lim = pb.sc.limits
    a_cap = pb.jerk_limit if pb.jerk_limit is not None else 10.0
    tau_ub = pb.tau_ub
    u_lim = max(lim.u_max, abs(lim.u_min))
    b_cap = u_lim + a_cap * max(abs(tau_ub), abs(pb.sc.initial.t)) + 1.0
    M = pb.M
    bounds = [(-a_cap, a_cap)] * M
    bounds += [(-b_cap, b_cap)] * M
    bounds += [(pb.sc.initial.t, tau_ub)] * M
    return bounds


def initial_guess(
    sc: Scenario,
    plan: WindowPlan,
    variant: int,
    seed: int = 0,
    sequential: "Solution | None" = None,
    layout: tuple[int, ...] | None = None,
) -> np.ndarray:
    """Deterministic start vectors.

    Variant 0 is a ramp-and-cruise profile through the window midpoints,
    variant 1 re-expresses the sequential baseline (padding each leg with a
    zero-duration segment), and higher variants are seeded perturbations of
    variant 0.
    """
    layout = layout or _default_layout(sc.n_intersections)
    M = sum(layout)
    if variant == 1:
        if sequential is None:
            sequential = solve_sequential(sc)
        return _sequential_vector(sequential, layout)

    lim = sc.limits
    t0, v0 = sc.initial.t, sc.initial.v
    # Nondecreasing crossing targets near the window midpoints.
    targets: list[float] = []
    t_prev = t0
    for i, (lo, hi) in enumerate(plan.windows):
        gap = sc.segments[i].length / sc.segment_v_max(i)
        t_c = max(0.5 * (lo + hi), t_prev + gap)
        t_c = min(max(t_c, lo), hi)
        if t_c <= t_prev:
            t_c = t_prev + 0.5 * gap + 1e-3
        targets.append(t_c)
        t_prev = t_c

    a = np.zeros(M)
    b = np.zeros(M)
    tau = np.zeros(M)
    idx = 0
    t_prev, v_prev = t0, v0
    for i, n_seg in enumerate(layout):
        span = max(targets[i] - t_prev, 1e-3)
        d_ramp = span / 3.0
        denom = span - 0.5 * d_ramp
        v_t = (sc.segments[i].length - 0.5 * v_prev * d_ramp) / denom
        v_t = min(max(v_t, lim.v_min), sc.segment_v_max(i))
        ramp = (v_t - v_prev) / d_ramp
        ramp = min(max(ramp, lim.u_min), lim.u_max)
        b[idx] = ramp
        tau[idx] = t_prev + d_ramp
        idx += 1
        n_cruise = n_seg - 1
        for j in range(n_cruise):
            tau[idx] = t_prev + d_ramp + (span - d_ramp) * (j + 1) / n_cruise
            idx += 1
        t_prev = targets[i]
        v_prev = v_prev + ramp * d_ramp

    if variant >= 2:
        rng = np.random.default_rng(1_000_003 * seed + variant)
        a = a + rng.normal(0.0, 0.05, size=M)
        b = b + rng.normal(0.0, 0.4, size=M)
        tau = tau + rng.uniform(-1.5, 1.5, size=M)
        tau = np.maximum.accumulate(np.maximum(tau, t0))
        # Pull crossing knots back inside their windows, keeping order.
        acc = 0
        for i, n_seg in enumerate(layout):
            acc += n_seg
            lo, hi = plan.windows[i]
            tau[acc - 1] = min(max(tau[acc - 1], lo), hi)
        tau = np.maximum.accumulate(tau)
    return np.concatenate([a, b, tau])


def _sequential_vector(seq: Solution, layout: tuple[int, ...]) -> np.ndarray:
    """Re-express a sequential solution in the joint segment layout."""
    segs = list(seq.profile.segments)
    if len(segs) != 3 * len(layout):
        raise ValueError("sequential profile does not have 3 segments per leg")
    a, b, tau = [], [], []
    for i, n_seg in enumerate(layout):
        leg = segs[3 * i : 3 * i + 3]
        for s in leg:
            a.append(s.a)
            b.append(s.b)
            tau.append(s.t_end)
        for _ in range(n_seg - 3):
            a.append(0.0)
            b.append(0.0)
            tau.append(leg[-1].t_end)
    return np.concatenate([a, b, tau]).astype(float)


def _stationarity(data: dict, act_tol: float = 1e-5) -> float:
    """KKT residual via a sign-constrained least-squares multiplier fit."""
    g = data["g"]
    rows = [data["eq_jac"]]
    n_eq = data["eq_jac"].shape[0]
    active = data["iq"] <= act_tol
    rows.append(data["iq_jac"][active])
    A = np.vstack(rows)
    if A.shape[0] == 0:
        return float(np.max(np.abs(g))) if g.size else 0.0
    # Stationarity: grad f = sum mu_i * grad g_i with mu >= 0 for active
    # g >= 0 rows, i.e. the fitted coefficients of A^T lambda = -grad f
    # must be non-positive on inequality rows.
    lb = np.full(A.shape[0], -np.inf)
    ub = np.concatenate([np.full(n_eq, np.inf), np.zeros(int(np.sum(active)))])
    try:
        res = lsq_linear(A.T, -g, bounds=(lb, ub), max_iter=200)
        r = A.T @ res.x + g
        return float(np.max(np.abs(r)))
    except Exception:
        return float("inf")


def _profile_from_z(pb: ParametricProblem, z: np.ndarray) -> AccelProfile:
    M = pb.M
    a, b = z[:M], z[M : 2 * M]
    knots = [pb.sc.initial.t]
    for t in z[2 * M :]:
        knots.append(max(float(t), knots[-1]))
    segs = tuple(
        LinearSegment(float(a[i]), float(b[i]), knots[i], knots[i + 1]) for i in range(M)
    )
    return AccelProfile(segs)


def _structural_metrics(profile: AccelProfile) -> tuple[float, float]:
    """Max acceleration jump across physical knots and |u| at the end."""
    real = [s for s in profile.segments if s.duration > _DEGENERATE]
    if not real:
        return 0.0, 0.0
    jump = 0.0
    for prev, nxt in zip(real, real[1:]):
        t = prev.t_end
        jump = max(jump, abs(nxt.u(nxt.t_start) - prev.u(t)))
    terminal = abs(real[-1].u(real[-1].t_end))
    return jump, terminal


def _solution_from_z(
    pb: ParametricProblem, ev: _Evaluator, z: np.ndarray, opts: SolverOptions
) -> Solution:
    data = ev.eval(z)
    sc = pb.sc
    profile = _profile_from_z(pb, z)
    tau = data["tau"]
    crossing = tuple(float(tau[j]) for j in pb.crossing_knots)
    J_t = float(tau[-1] - sc.initial.t)
    J_u = float(data["E"])
    J = sc.weights.rho_t * J_t + sc.weights.rho_u * J_u
    jump, terminal = _structural_metrics(profile)
    return Solution(
        profile=profile,
        crossing_times=crossing,
        plan=pb.plan,
        J_t=J_t,
        J_u=J_u,
        J=J,
        max_violation=float(data["viol"]),
        stationarity=_stationarity(data),
        max_knot_jump=jump,
        terminal_accel=terminal,
        z=np.array(z, dtype=float),
    )


def solve(
    pb: ParametricProblem,
    opts: SolverOptions | None = None,
    extra_starts: tuple[np.ndarray, ...] = (),
) -> Solution:
    """Multistart SQP solve of one parametric problem.

    Feasible warm starts in `extra_starts` are also evaluated directly, so
    the returned cost never exceeds the cost of a feasible start vector.
    """
    opts = opts or SolverOptions()
    ev = _Evaluator(pb)
    bounds = _variable_bounds(pb)
    cons = [
        {
            "type": "eq",
            "fun": lambda zz: ev.eval(zz)["eq"],
            "jac": lambda zz: ev.eval(zz)["eq_jac"],
        },
        {
            "type": "ineq",
            "fun": lambda zz: ev.eval(zz)["iq"],
            "jac": lambda zz: ev.eval(zz)["iq_jac"],
        },
    ]

    def fun(zz):
        d = ev.eval(zz)
        return d["f"], d["g"]

    # Warm starts go first so the early-stop heuristic can never skip them.
    starts: list[np.ndarray] = [np.asarray(s, dtype=float) for s in extra_starts]
    variants = [v for v in range(opts.multistart + 1) if v != 1][: opts.multistart]
    for v in variants:
        try:
            starts.append(initial_guess(pb.sc, pb.plan, v, seed=opts.seed, layout=pb.layout))
        except Exception:
            continue
    if not starts:
        raise NumericalFailureError("could not construct any start vector")

    best_z, best_key = None, None
    saw_finite = False
    basin_hits = 0
    for z0 in starts:
        candidates = [z0]
        try:
            res = minimize(
                fun,
                z0,
                jac=True,
                method="SLSQP",
                bounds=bounds,
                constraints=cons,
                options={"maxiter": opts.max_iter, "ftol": 1e-12},
            )
            candidates.append(res.x)
        except (ValueError, FloatingPointError):
            pass
        for zc in candidates:
            if not np.all(np.isfinite(zc)):
                continue
            d = ev.eval(np.asarray(zc, dtype=float))
            if not (np.isfinite(d["f"]) and d["viol"] < np.inf):
                continue
            saw_finite = True
            if d["viol"] > opts.feas_tol:
                continue
            key = (d["f"], d["tau"][-1])
            if best_key is None or key < best_key:
                if best_key is not None and abs(key[0] - best_key[0]) <= 1e-9 * (
                    1.0 + abs(best_key[0])
                ):
                    basin_hits += 1
                else:
                    basin_hits = 1
                best_key = key
                best_z = np.array(zc, dtype=float)
            elif abs(key[0] - best_key[0]) <= 1e-9 * (1.0 + abs(best_key[0])):
                basin_hits += 1
        # Once several starts land in the same best basin, more restarts
        # rarely help; stop early (deterministically).
        if basin_hits >= 3:
            break
    if best_z is not None:
        # Polish pass from the winning point only.
        try:
            res2 = minimize(
                fun,
                best_z,
                jac=True,
                method="SLSQP",
                bounds=bounds,
                constraints=cons,
                options={"maxiter": opts.max_iter, "ftol": 1e-14},
            )
            if np.all(np.isfinite(res2.x)):
                d = ev.eval(np.asarray(res2.x, dtype=float))
                if np.isfinite(d["f"]) and d["viol"] <= opts.feas_tol:
                    key = (d["f"], d["tau"][-1])
                    if key < best_key:
                        best_key = key
                        best_z = np.array(res2.x, dtype=float)
        except (ValueError, FloatingPointError):
            pass
    if best_z is None:
        if not saw_finite:
            raise NumericalFailureError("all starts produced non-finite evaluations")
        raise InfeasibleError(f"no feasible point for plan k={pb.plan.k}")
    return _solution_from_z(pb, ev, best_z, opts)


def _single_leg_scenario(sc: Scenario, i: int, t_start: float, v_start: float) -> Scenario:
    seg = sc.segments[i]
    # The crossing speed hands over to the next leg, so it must respect the
    # stricter of the two adjacent ceilings or the chained profile could not
    # be re-expressed in the joint program.
    cap = sc.segment_v_max(i)
    if i + 1 < sc.n_intersections:
        cap = min(cap, sc.segment_v_max(i + 1))
    limits = replace(sc.limits, v_max=cap)
    options = ScenarioOptions(
        u0=sc.options.u0 if i == 0 else None,
        jerk_limit=sc.options.jerk_limit,
        theta=sc.options.theta,
        sigma=sc.options.sigma,
        alpha=sc.options.alpha,
        beta=sc.options.beta,
    )
    return Scenario(
        segments=(replace(seg, v_max_override=None),),
        limits=limits,
        weights=sc.weights,
        initial=VehicleState(t=t_start, x=0.0, v=v_start),
        options=options,
        crossing_windows=(sc.crossing_window(i),),
    )


def solve_sequential(sc: Scenario, opts: SolverOptions | None = None) -> Solution:
    """Per-segment baseline: chain single-intersection optima.

    Memoized: the joint solver reuses the same baseline as a warm start,
    so repeated calls with identical inputs cost nothing.
    """
    return _solve_sequential_cached(sc, opts or SolverOptions())


@lru_cache(maxsize=64)
def _solve_sequential_cached(sc: Scenario, opts: SolverOptions) -> Solution:
    problems = validate(sc)
    if problems:
        raise InfeasibleError("; ".join(problems))
    t_cur, v_cur = sc.initial.t, sc.initial.v
    segs: list[LinearSegment] = []
    ks: list[int] = []
    crossing: list[float] = []
    per_costs: list[float] = []
    J_u = 0.0
    viol = 0.0
    stat = 0.0
    leg_opts = replace(opts, segments_per_leg=None)
    for i in range(sc.n_intersections):
        sub = _single_leg_scenario(sc, i, t_cur, v_cur)
        try:
            sol = solve_best(sub, leg_opts)
        except InfeasibleError as exc:
            raise InfeasibleError(f"sequential baseline: leg {i} infeasible") from exc
        segs.extend(sol.profile.segments)
        ks.append(sol.plan.k[0])
        t_cross = sol.crossing_times[0]
        crossing.append(t_cross)
        per_costs.append(sc.weights.rho_t * (t_cross - t_cur) + sc.weights.rho_u * sol.J_u)
        J_u += sol.J_u
        viol = max(viol, sol.max_violation)
        stat = max(stat, sol.stationarity)
        _, v_end, _ = evaluate_profile(
            sol.profile, VehicleState(t_cur, 0.0, v_cur), sol.profile.t_end
        )
        t_cur, v_cur = t_cross, v_end
    profile = AccelProfile(tuple(segs))
    windows = []
    for i, k in enumerate(ks):
        from .scenario import green_window

        lo, hi = green_window(sc.segments[i].light, k)
        forced = sc.crossing_window(i)
        if forced is not None:
            lo, hi = max(lo, forced[0]), min(hi, forced[1])
        windows.append((lo, hi))
    plan = WindowPlan(k=tuple(ks), windows=tuple(windows), earliest_finish=crossing[-1])
    J_t = crossing[-1] - sc.initial.t
    jump, terminal = _structural_metrics(profile)
    return Solution(
        profile=profile,
        crossing_times=tuple(crossing),
        plan=plan,
        J_t=J_t,
        J_u=J_u,
        J=sc.weights.rho_t * J_t + sc.weights.rho_u * J_u,
        max_violation=viol,
        stationarity=stat,
        max_knot_jump=jump,
        terminal_accel=terminal,
        per_segment_costs=tuple(per_costs),
    )


def solve_best(sc: Scenario, opts: SolverOptions | None = None) -> Solution:
    """Joint optimum over enumerated window plans, with cost-bound pruning."""
    opts = opts or SolverOptions()
    problems = validate(sc)
    if problems:
        raise InfeasibleError("; ".join(problems))
    bounds = reachable_time_bounds(sc)
    plans = enumerate_window_plans(sc, bounds, cap=opts.plans_cap)
    if not plans:
        raise InfeasibleError("no consistent green-window plan exists")

    seq: Solution | None = None
    layout = opts.segments_per_leg or _default_layout(sc.n_intersections)
    if sc.n_intersections > 1 and all(m >= 3 for m in layout):
        try:
            seq = solve_sequential(sc, opts)
        except (InfeasibleError, NumericalFailureError):
            seq = None
    if seq is not None and not any(p.k == seq.plan.k for p in plans):
        plans.append(seq.plan)

    best: Solution | None = None
    failure: NumericalFailureError | None = None
    for plan in plans:
        lb = sc.weights.rho_t * (plan.earliest_finish - sc.initial.t)
        if best is not None and lb > best.J + 1e-12:
            continue
        pb = build_problem(sc, plan, opts)
        extra: list[np.ndarray] = []
        if seq is not None and plan.k == seq.plan.k:
            try:
                extra.append(_sequential_vector(seq, pb.layout))
            except ValueError:
                pass
        try:
            sol = solve(pb, opts, extra_starts=tuple(extra))
        except InfeasibleError:
            continue
        except NumericalFailureError as exc:
            failure = exc
            continue
        if best is None or (sol.J, sol.crossing_times[-1], sol.plan.k) < (
            best.J,
            best.crossing_times[-1],
            best.plan.k,
        ):
            best = sol
    if best is None:
        if failure is not None:
            raise failure
        raise InfeasibleError("every enumerated plan is infeasible")
    return best


def verify_solution(sol: Solution, sc: Scenario, dt: float = 0.01) -> StructuralReport:
    """Audit emergent structure and dense-grid constraint satisfaction."""
    profile = sol.profile
    jump, terminal = _structural_metrics(profile)
    real = [s for s in profile.segments if s.duration > _DEGENERATE]
    start = real[0].t_end if real else profile.t_end
    lim = sc.limits
    worst = 0.0
    if profile.t_end > start:
        traj = integrate_numeric(profile, sc.initial, dt)
        mask = traj.t >= start - 1e-12
        ts, vs = traj.t[mask], traj.v[mask]
        # Leg of each sample: crossing times partition the timeline.
        inner = np.array(sol.crossing_times[:-1])
        legs = np.searchsorted(inner, ts, side="left")
        caps = np.array([sc.segment_v_max(i) for i in range(sc.n_intersections)])[legs]
        if ts.size:
            worst = float(max(np.max(lim.v_min - vs), np.max(vs - caps)))
    green = tuple(
        is_green(sc.segments[i].light, t, tol=1e-6) for i, t in enumerate(sol.crossing_times)
    )
    in_windows = tuple(
        lo - 1e-9 <= t <= hi + 1e-9
        for t, (lo, hi) in zip(sol.crossing_times, sol.plan.windows)
    )
    return StructuralReport(
        max_knot_jump=jump,
        terminal_accel=terminal,
        max_speed_violation=float(max(worst, 0.0)),
        crossings_green=green,
        crossings_in_plan_windows=in_windows,
    )
