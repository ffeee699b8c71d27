"""Discretized dynamic-programming oracle for independent validation.

Backward DP over a (time, position, speed) grid with piecewise-constant
controls per step.  Every grid policy is a feasible piecewise-linear
control for the continuous problem (up to knot count), so the DP cost is
used strictly as an upper bound on the continuous optimum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .planner import reachable_time_bounds
from .scenario import Scenario, is_green
from .solver import InfeasibleError, Solution


@dataclass(frozen=True)
class GridSpec:
    dt: float = 0.5
    dv: float = 0.25
    n_controls: int = 13
    horizon: float | None = None  # defaults to the latest reachable final arrival
    dx: float | None = None  # defaults to dv * dt

    def resolved_dx(self) -> float:
        return self.dx if self.dx is not None else self.dv * self.dt


@dataclass(frozen=True)
class OracleSolution:
    cost: float
    crossing_times: tuple[float, ...]
    controls: np.ndarray  # piecewise-constant control trace, one value per step
    times: np.ndarray  # step left edges matching `controls`
    notes: dict


@dataclass(frozen=True)
class ComparisonReport:
    j_solver: float
    j_oracle: float
    j_difference: float
    crossing_differences: tuple[float, ...]
    sandwich_holds: bool
    allowance: float


def control_levels(u_min: float, u_max: float, n: int) -> np.ndarray:
    """n acceleration levels spanning [u_min, u_max], always including 0."""
    if n < 3:
        raise ValueError("need at least 3 control levels")
    n_neg = n // 2 + 1
    n_pos = n - n_neg + 1
    neg = np.linspace(u_min, 0.0, n_neg)
    pos = np.linspace(0.0, u_max, n_pos)
    return np.unique(np.concatenate([neg, pos]))


def _crossing_allowed(sc: Scenario, i: int, t: float) -> bool:
    if not is_green(sc.segments[i].light, t):
        return False
    forced = sc.crossing_window(i)
    if forced is not None and not (forced[0] <= t <= forced[1]):
        return False
    return True


def dp_solve(sc: Scenario, grid: GridSpec | None = None) -> OracleSolution:
    """Grid-optimal cost and control trace, or InfeasibleError.

    Speed is rounded to the grid after each step; position advances by the
    exact kinematic increment rounded to whole position cells (no value
    interpolation).  Speeds below v_min are allowed only until the vehicle
    first reaches the v_min grid level.
    """
    grid = grid or GridSpec()
    lim = sc.limits
    dt, dv = grid.dt, grid.dv
    dx = grid.resolved_dx()
    t0 = sc.initial.t
    horizon = grid.horizon
    if horizon is None:
        horizon = reachable_time_bounds(sc).t_max[-1]
    K = int(math.ceil((horizon - t0) / dt))
    if K < 1:
        raise InfeasibleError("oracle horizon shorter than one time step")

    n_v = int(round(lim.v_max / dv)) + 1
    v_grid = dv * np.arange(n_v)
    vmin_lv = int(round(lim.v_min / dv))  # grid level treated as the v_min floor
    cums = sc.cumulative_lengths
    light_idx = [int(round(c / dx)) for c in cums]
    P = light_idx[-1]
    if P < 1:
        raise InfeasibleError("final intersection at zero distance")

    controls = control_levels(lim.u_min, lim.u_max, grid.n_controls)
    # Per-position speed caps from traffic adjustments.
    cap_per_pos = np.full(P, lim.v_max)
    lo_idx = 0
    for i in range(sc.n_intersections):
        hi_idx = min(light_idx[i], P)
        cap_per_pos[lo_idx:hi_idx] = sc.segment_v_max(i)
        lo_idx = hi_idx
    state_ok = v_grid[None, :] <= cap_per_pos[:, None] + 0.5 * dv

    # Transition tables per (speed level, control).
    v_next = v_grid[:, None] + controls[None, :] * dt
    valid = (v_next > -0.5 * dv) & (v_next < lim.v_max + 0.5 * dv)
    vi_next = np.clip(np.rint(np.clip(v_next, 0.0, lim.v_max) / dv).astype(int), 0, n_v - 1)
    # Once at or above the v_min level, never drop below it again.
    from_above = np.arange(n_v)[:, None] >= vmin_lv
    valid &= ~(from_above & (vi_next < vmin_lv))
    delta_x = v_grid[:, None] * dt + 0.5 * controls[None, :] * dt * dt
    valid &= delta_x >= 0.0
    shift = np.rint(delta_x / dx).astype(int)

    max_shift = int(shift[valid].max()) if np.any(valid) else 0
    min_seg_cells = min(
        b - a for a, b in zip([0] + list(light_idx[:-1]), light_idx)
    )
    if max_shift >= min_seg_cells:
        raise InfeasibleError(
            "grid too coarse: one step can span a whole road segment; refine dt or dx"
        )

    INF = np.inf
    V_next = np.full((P, n_v), INF)
    policy = np.full((K, P, n_v), -1, dtype=np.int8)
    step_cost = sc.weights.rho_u * controls**2 * dt

    for k in range(K - 1, -1, -1):
        t_k = t0 + k * dt
        green = [_crossing_allowed(sc, i, t_k) for i in range(sc.n_intersections)]
        terminal = sc.weights.rho_t * (t_k + dt - t0)
        V_cur = np.full((P, n_v), INF)
        for vi in range(n_v):
            for uj in range(controls.size):
                if not valid[vi, uj]:
                    continue
                s = shift[vi, uj]
                vn = vi_next[vi, uj]
                cand = np.full(P, INF)
                if s == 0:
                    cand[:] = V_next[:, vn]
                else:
                    cand[: P - s] = V_next[s:, vn]
                    # Interior crossings happening inside this step.
                    for i in range(sc.n_intersections - 1):
                        li = light_idx[i]
                        lo = max(li - s, 0)
                        if not green[i]:
                            cand[lo:li] = INF
                    # Final crossing absorbs.
                    if green[-1]:
                        cand[P - s :] = terminal
                    else:
                        cand[P - s :] = INF
                total = step_cost[uj] + cand
                better = total < V_cur[:, vi]
                V_cur[better, vi] = total[better]
                policy[k, better, vi] = uj
        V_cur[~state_ok] = INF
        V_next = V_cur

    p0 = 0
    v0_idx = int(round(min(max(sc.initial.v, 0.0), lim.v_max) / dv))
    if not np.isfinite(V_next[p0, v0_idx]):
        raise InfeasibleError("no grid trajectory crosses every light on green")
    cost = float(V_next[p0, v0_idx])

    # Forward pass to recover the control trace and crossing times.
    trace_u: list[float] = []
    trace_t: list[float] = []
    crossings: list[float] = []
    p, vi = p0, v0_idx
    for k in range(K):
        uj = int(policy[k, p, vi])
        if uj < 0:
            break
        t_k = t0 + k * dt
        trace_u.append(float(controls[uj]))
        trace_t.append(t_k)
        s = int(shift[vi, uj])
        p_new = p + s
        for i, li in enumerate(light_idx):
            if p < li <= p_new and len(crossings) <= i:
                crossings.append(t_k)
        if p_new >= P:
            break
        p, vi = p_new, int(vi_next[vi, uj])
    if len(crossings) != sc.n_intersections:
        raise InfeasibleError("oracle trace did not cross every intersection")
    return OracleSolution(
        cost=cost,
        crossing_times=tuple(crossings),
        controls=np.array(trace_u),
        times=np.array(trace_t),
        notes={
            "dx": dx,
            "dt": dt,
            "dv": dv,
            "n_controls": int(controls.size),
            "horizon": horizon,
            "rounding": "speed nearest grid level; position shift nearest cell",
            "v0_rounded_to": float(v_grid[v0_idx]),
            "time_cost_convention": "final crossing charged at the step's right edge",
            "crossing_time_convention": "reported at the step's left edge (green-checked)",
        },
    )


def compare(sol: Solution, osol: OracleSolution, allowance: float = 0.1) -> ComparisonReport:
    """Check the one-sided sandwich: solver cost <= oracle cost + allowance."""
    diffs = tuple(
        s - o for s, o in zip(sol.crossing_times, osol.crossing_times)
    )
    holds = sol.J <= osol.cost * (1.0 + allowance) + 1e-12
    return ComparisonReport(
        j_solver=sol.J,
        j_oracle=osol.cost,
        j_difference=sol.J - osol.cost,
        crossing_differences=diffs,
        sandwich_holds=bool(holds),
        allowance=allowance,
    )
