"""Exact kinematics under piecewise-linear acceleration.

A segment applies u(t) = a*t + b over an absolute time interval.  Speed,
position and control energy (integral of u^2) have closed forms that the
solver differentiates analytically; a Simpson-rule integrator is kept
around as an independent numerical cross-check.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass

import numpy as np

_KNOT_TOL = 1e-9


@dataclass(frozen=True)
class VehicleState:
    """Time, route distance and speed of the vehicle."""

    t: float
    x: float
    v: float


@dataclass(frozen=True)
class LinearSegment:
    """One linear-acceleration piece u(t) = a*t + b on [t_start, t_end]."""

    a: float
    b: float
    t_start: float
    t_end: float

    def __post_init__(self):
        if self.t_end < self.t_start:
            raise ValueError(f"segment ends before it starts: {self}")

    @property
    def duration(self) -> float:
        return self.t_end - self.t_start

    def u(self, t: float) -> float:
        return self.a * t + self.b


@dataclass(frozen=True)
class AccelProfile:
    """Contiguous sequence of linear segments; zero-duration pieces are legal."""

    segments: tuple[LinearSegment, ...]

    def __post_init__(self):
        if not self.segments:
            raise ValueError("profile needs at least one segment")
        for prev, nxt in zip(self.segments, self.segments[1:]):
            if abs(nxt.t_start - prev.t_end) > _KNOT_TOL:
                raise ValueError(
                    f"segments not contiguous at t={prev.t_end} vs {nxt.t_start}"
                )

    @property
    def t_start(self) -> float:
        return self.segments[0].t_start

    @property
    def t_end(self) -> float:
        return self.segments[-1].t_end

    @property
    def knots(self) -> tuple[float, ...]:
        return (self.t_start,) + tuple(s.t_end for s in self.segments)


def segment_end_state(s0: VehicleState, seg: LinearSegment) -> VehicleState:
    """Advance a state across one segment using the closed-form kinematics."""
    if abs(s0.t - seg.t_start) > 1e-6:
        raise ValueError(f"state time {s0.t} does not match segment start {seg.t_start}")
    t0, t1 = seg.t_start, seg.t_end
    dt = t1 - t0
    v1 = s0.v + seg.b * dt + 0.5 * seg.a * (t1 * t1 - t0 * t0)
    x1 = (
        s0.x
        + s0.v * dt
        + 0.5 * seg.b * dt * dt
        + seg.a / 6.0 * (t1**3 + 2.0 * t0**3 - 3.0 * t0 * t0 * t1)
    )
    return VehicleState(t=t1, x=x1, v=v1)


def segment_energy(s0: VehicleState, seg: LinearSegment) -> float:
    """Exact integral of u(t)^2 over the segment."""
    if abs(s0.t - seg.t_start) > 1e-6:
        raise ValueError(f"state time {s0.t} does not match segment start {seg.t_start}")
    t0, t1 = seg.t_start, seg.t_end
    return (
        seg.a * seg.a / 3.0 * (t1**3 - t0**3)
        + seg.a * seg.b * (t1 * t1 - t0 * t0)
        + seg.b * seg.b * (t1 - t0)
    )


def evaluate_profile(p: AccelProfile, s0: VehicleState, t: float) -> tuple[float, float, float]:
    """Return (x, v, u) at time t.

    At an interior knot the later segment's acceleration is reported; the
    state itself is continuous by construction.
    """
    if t < p.t_start - _KNOT_TOL or t > p.t_end + _KNOT_TOL:
        raise ValueError(f"t={t} outside profile span [{p.t_start}, {p.t_end}]")
    t = min(max(t, p.t_start), p.t_end)
    starts = [s.t_start for s in p.segments]
    idx = max(bisect_right(starts, t) - 1, 0)
    state = s0
    for seg in p.segments[:idx]:
        state = segment_end_state(state, seg)
    seg = p.segments[idx]
    partial = LinearSegment(seg.a, seg.b, seg.t_start, t)
    state = segment_end_state(state, partial)
    return state.x, state.v, seg.u(t)


@dataclass(frozen=True)
class SampledTrajectory:
    """Numerically integrated trajectory with cumulative control energy."""

    t: np.ndarray
    x: np.ndarray
    v: np.ndarray
    u: np.ndarray
    energy: float

    @property
    def final(self) -> VehicleState:
        return VehicleState(t=float(self.t[-1]), x=float(self.x[-1]), v=float(self.v[-1]))


def integrate_numeric(p: AccelProfile, s0: VehicleState, dt: float) -> SampledTrajectory:
    """Fixed-step Simpson integration of the dynamics under the profile.

    Test-only oracle for the closed forms; exact to roundoff for linear
    accelerations since Simpson integrates the involved polynomials
    without truncation error.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    ts = [np.array([s0.t])]
    xs = [np.array([s0.x])]
    vs = [np.array([s0.v])]
    us = [np.array([p.segments[0].u(s0.t)])]
    x0, v0 = s0.x, s0.v
    energy = 0.0
    for seg in p.segments:
        dur = seg.duration
        if dur <= 0:
            continue
        n = max(1, int(math.ceil(dur / dt)))
        h = dur / n
        grid = seg.t_start + h * np.arange(n + 1)
        mid = grid[:-1] + 0.5 * h
        u_g = seg.a * grid + seg.b
        u_m = seg.a * mid + seg.b
        # Simpson step for v' = u(t).
        v_inc = h / 6.0 * (u_g[:-1] + 4.0 * u_m + u_g[1:])
        v_grid = v0 + np.concatenate([[0.0], np.cumsum(v_inc)])
        # Trapezoid is exact for the linear u, giving v at midpoints.
        v_mid = v_grid[:-1] + 0.25 * h * (u_g[:-1] + u_m)
        x_inc = h / 6.0 * (v_grid[:-1] + 4.0 * v_mid + v_grid[1:])
        x_grid = x0 + np.concatenate([[0.0], np.cumsum(x_inc)])
        e_inc = h / 6.0 * (u_g[:-1] ** 2 + 4.0 * u_m**2 + u_g[1:] ** 2)
        energy += float(np.sum(e_inc))
        ts.append(grid[1:])
        xs.append(x_grid[1:])
        vs.append(v_grid[1:])
        us.append(u_g[1:])
        x0, v0 = float(x_grid[-1]), float(v_grid[-1])
    return SampledTrajectory(
        t=np.concatenate(ts),
        x=np.concatenate(xs),
        v=np.concatenate(vs),
        u=np.concatenate(us),
        energy=energy,
    )


def profile_end_state(p: AccelProfile, s0: VehicleState) -> VehicleState:
    """Compose the closed forms across every segment of the profile."""
    state = s0
    for seg in p.segments:
        state = segment_end_state(state, seg)
    return state


def profile_energy(p: AccelProfile) -> float:
    """Total control energy of the profile."""
    total = 0.0
    for seg in p.segments:
        total += segment_energy(VehicleState(seg.t_start, 0.0, 0.0), seg)
    return total
