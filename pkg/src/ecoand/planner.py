"""Reachable arrival-time bounds and green-window plan enumeration."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

from .scenario import Scenario, green_window


@dataclass(frozen=True)
class TimeBounds:
    """Per-intersection earliest/latest arrival times (valid relaxations)."""

    t_min: tuple[float, ...]
    t_max: tuple[float, ...]


@dataclass(frozen=True)
class WindowPlan:
    """One choice of green-window index per intersection.

    `windows` are the green intervals already intersected with any forced
    crossing windows; `earliest_finish` is a lower bound on the final
    crossing time achievable under this plan.
    """

    k: tuple[int, ...]
    windows: tuple[tuple[float, float], ...]
    earliest_finish: float


def _bang_cruise_time(dist: float, v0: float, v_cap: float, u_max: float) -> float:
    """Minimum time to cover dist starting at speed v0 <= v_cap."""
    if dist <= 0:
        return 0.0
    v0 = min(v0, v_cap)
    t_acc = (v_cap - v0) / u_max
    d_acc = v0 * t_acc + 0.5 * u_max * t_acc * t_acc
    if d_acc >= dist:
        return (-v0 + math.sqrt(v0 * v0 + 2.0 * u_max * dist)) / u_max
    return t_acc + (dist - d_acc) / v_cap


def reachable_time_bounds(sc: Scenario) -> TimeBounds:
    """Bracket each crossing time by bang-cruise kinematics.

    Earliest: full acceleration then cruise at the (possibly per-segment)
    speed ceiling.  Latest: reach v_min as fast as possible if starting
    below it, then cruise at v_min.
    """
    lim = sc.limits
    t0, v0 = sc.initial.t, sc.initial.v
    t_min: list[float] = []
    t, v = t0, v0
    for i, seg in enumerate(sc.segments):
        cap = sc.segment_v_max(i)
        v = min(v, cap)
        t += _bang_cruise_time(seg.length, v, cap, lim.u_max)
        v = cap  # optimistic carry-over keeps the bound a relaxation
        t_min.append(t)

    t_max: list[float] = []
    if v0 < lim.v_min:
        t_ramp = (lim.v_min - v0) / lim.u_max
        d_ramp = v0 * t_ramp + 0.5 * lim.u_max * t_ramp * t_ramp
    else:
        t_ramp, d_ramp = 0.0, 0.0
    for cum in sc.cumulative_lengths:
        if cum <= d_ramp:
            t_max.append(t0 + (-v0 + math.sqrt(v0 * v0 + 2.0 * lim.u_max * cum)) / lim.u_max)
        else:
            t_max.append(t0 + t_ramp + (cum - d_ramp) / lim.v_min)
    t_max = [max(lo, hi) for lo, hi in zip(t_min, t_max)]
    return TimeBounds(t_min=tuple(t_min), t_max=tuple(t_max))


def _candidate_windows(
    sc: Scenario, bounds: TimeBounds, i: int
) -> list[tuple[int, tuple[float, float]]]:
    """Green windows of intersection i that overlap its reachable time range."""
    light = sc.segments[i].light
    lo_t, hi_t = bounds.t_min[i], bounds.t_max[i]
    forced = sc.crossing_window(i)
    out = []
    k_lo = max(0, int(math.floor(lo_t / light.period)) - 1)
    k_hi = int(math.floor(hi_t / light.period)) + 1
    for k in range(k_lo, k_hi + 1):
        w_lo, w_hi = green_window(light, k)
        if forced is not None:
            w_lo, w_hi = max(w_lo, forced[0]), min(w_hi, forced[1])
        w_lo, w_hi = max(w_lo, lo_t), min(w_hi, hi_t)
        if w_lo <= w_hi:
            out.append((k, (w_lo, w_hi)))
    return out


def _greedy_finish(sc: Scenario, windows: list[tuple[float, float]]) -> float | None:
    """Earliest nondecreasing crossing selection, or None if inconsistent.

    Consecutive crossings are separated by at least the free-flow traversal
    time of the segment between them.
    """
    t = -math.inf
    for i, (lo, hi) in enumerate(windows):
        if i == 0:
            t = lo
        else:
            gap = sc.segments[i].length / sc.segment_v_max(i)
            t = max(lo, t + gap)
        if t > hi:
            return None
    return t


def enumerate_window_plans(sc: Scenario, bounds: TimeBounds, cap: int = 64) -> list[WindowPlan]:
    """All mutually consistent window choices, earliest-finishing first.

    An empty list means no stop-free plan exists for the corridor.
    """
    per_int = [_candidate_windows(sc, bounds, i) for i in range(sc.n_intersections)]
    if any(not c for c in per_int):
        return []
    plans: list[WindowPlan] = []
    for combo in itertools.product(*per_int):
        ks = tuple(k for k, _ in combo)
        wins = [w for _, w in combo]
        finish = _greedy_finish(sc, wins)
        if finish is None:
            continue
        plans.append(WindowPlan(k=ks, windows=tuple(wins), earliest_finish=finish))
    plans.sort(key=lambda p: (p.earliest_finish, p.k))
    return plans[:cap]
