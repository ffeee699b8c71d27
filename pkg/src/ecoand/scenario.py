"""Problem data model: corridor geometry, signal timing, limits and weights."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

from .kinematics import VehicleState


class ScenarioError(ValueError):
    """Raised for scenario files or parameters that cannot be used."""


@dataclass(frozen=True)
class TrafficLight:
    """Periodic signal: green on [kT, kT + duty*T] for every integer k >= 0."""

    period: float
    duty: float
    offset: float = 0.0  # reserved in the file format; must be 0 in v1


@dataclass(frozen=True)
class RoadSegment:
    """Road stretch ending at a signalized intersection."""

    length: float
    light: TrafficLight
    # Set by traffic adjustments (slower ceiling behind a lead vehicle).
    v_max_override: float | None = None


@dataclass(frozen=True)
class VehicleLimits:
    v_min: float
    v_max: float
    u_min: float
    u_max: float


@dataclass(frozen=True)
class Weights:
    """Objective weights: rho_t on travel time, rho_u on control energy."""

    rho_t: float
    rho_u: float


@dataclass(frozen=True)
class ScenarioOptions:
    u0: float | None = None
    jerk_limit: float | None = None
    theta: float = 0.9
    sigma: float = 0.0
    alpha: float = 1.0
    beta: float = 5.0


@dataclass(frozen=True)
class Scenario:
    segments: tuple[RoadSegment, ...]
    limits: VehicleLimits
    weights: Weights
    initial: VehicleState
    options: ScenarioOptions = field(default_factory=ScenarioOptions)
    # Per-intersection crossing-time restriction (absolute [lo, hi], hi may be
    # inf); None means only the signal itself constrains the crossing.
    crossing_windows: tuple[tuple[float, float] | None, ...] | None = None

    @property
    def n_intersections(self) -> int:
        return len(self.segments)

    @property
    def cumulative_lengths(self) -> tuple[float, ...]:
        out, total = [], 0.0
        for seg in self.segments:
            total += seg.length
            out.append(total)
        return tuple(out)

    def segment_v_max(self, i: int) -> float:
        ov = self.segments[i].v_max_override
        return self.limits.v_max if ov is None else min(self.limits.v_max, ov)

    def crossing_window(self, i: int) -> tuple[float, float] | None:
        if self.crossing_windows is None:
            return None
        return self.crossing_windows[i]


def is_green(light: TrafficLight, t: float, tol: float = 0.0) -> bool:
    """Whether the signal shows green at time t (closed green interval).

    A positive tol absorbs roundoff on the phase boundaries.
    """
    if t < 0:
        raise ValueError("signal time must be non-negative")
    r = t - math.floor(t / light.period) * light.period
    return r <= light.duty * light.period + tol or r >= light.period - tol


def green_window(light: TrafficLight, k: int) -> tuple[float, float]:
    """The k-th green interval [kT, kT + duty*T]."""
    if k < 0:
        raise ValueError("green-window index must be non-negative")
    lo = k * light.period
    return lo, lo + light.duty * light.period


def default_weights(sc: Scenario, w: float = 0.5) -> Weights:
    """Normalize the time/energy trade-off from the corridor's own scales.

    rho_t spreads weight w over the reachable span of final-intersection
    arrival times; rho_u spreads the rest over the energy of driving at
    the acceleration limit for the whole latest-arrival horizon.
    """
    if not 0.0 <= w <= 1.0:
        raise ScenarioError("weight fraction w must lie in [0, 1]")
    from .planner import reachable_time_bounds  # late import: planner builds on scenario

    tb = reachable_time_bounds(sc)
    t_lb, t_ub = tb.t_min[-1], tb.t_max[-1]
    if t_ub - t_lb <= 1e-12:
        raise ScenarioError("degenerate corridor: no spread in reachable arrival times")
    u_lim = max(sc.limits.u_max, abs(sc.limits.u_min))
    return Weights(rho_t=w / (t_ub - t_lb), rho_u=(1.0 - w) / (u_lim * u_lim * t_ub))


def validate(sc: Scenario) -> list[str]:
    """Collect every invariant violation; an empty list means the scenario is usable."""
    bad: list[str] = []
    if sc.n_intersections < 1:
        bad.append("corridor needs at least one road segment")
    for i, seg in enumerate(sc.segments):
        if not seg.length > 0:
            bad.append(f"segment {i}: length must be positive")
        li = seg.light
        if not li.period > 0:
            bad.append(f"segment {i}: signal period must be positive")
        if not 0.0 < li.duty < 1.0:
            bad.append(f"segment {i}: duty out of (0,1)")
        if li.offset != 0.0:
            bad.append(f"segment {i}: signal offset must be 0 in v1")
        if seg.v_max_override is not None and not seg.v_max_override > 0:
            bad.append(f"segment {i}: v_max override must be positive")
    lim = sc.limits
    if not 0.0 < lim.v_min <= lim.v_max:
        bad.append("speed limits must satisfy 0 < v_min <= v_max")
    if not lim.u_min < 0.0:
        bad.append("u_min must be negative")
    if not lim.u_max > 0.0:
        bad.append("u_max must be positive")
    wt = sc.weights
    if wt.rho_t < 0.0 or wt.rho_u < 0.0:
        bad.append("weights must be non-negative")
    if not wt.rho_t + wt.rho_u > 0.0:
        bad.append("at least one weight must be positive")
    if sc.initial.v < 0.0:
        bad.append("initial speed must be non-negative")
    if not math.isfinite(sc.initial.t) or not math.isfinite(sc.initial.x):
        bad.append("initial state must be finite")
    opt = sc.options
    if opt.u0 is not None and not lim.u_min <= opt.u0 <= lim.u_max:
        bad.append("initial acceleration u0 outside [u_min, u_max]")
    if opt.jerk_limit is not None and not opt.jerk_limit > 0:
        bad.append("jerk limit must be positive")
    if not 0.0 < opt.theta < 1.0:
        bad.append("theta must lie in (0,1)")
    if opt.sigma < 0.0 or opt.alpha < 0.0 or opt.beta < 0.0:
        bad.append("sigma, alpha and beta must be non-negative")
    if sc.crossing_windows is not None:
        if len(sc.crossing_windows) != sc.n_intersections:
            bad.append("crossing-window list length must match intersection count")
        else:
            for i, win in enumerate(sc.crossing_windows):
                if win is not None and win[0] > win[1]:
                    bad.append(f"intersection {i}: empty forced crossing window")
    return bad


def scenario_from_dict(data: dict) -> Scenario:
    """Build a scenario from parsed JSON; omitted weights fall back to defaults."""
    try:
        segments = tuple(
            RoadSegment(
                length=float(s["length_m"]),
                light=TrafficLight(
                    period=float(s["light"]["period_s"]),
                    duty=float(s["light"]["green_fraction"]),
                    offset=float(s["light"].get("offset_s", 0.0)),
                ),
            )
            for s in data["segments"]
        )
        lim = data["limits"]
        limits = VehicleLimits(
            v_min=float(lim["v_min"]),
            v_max=float(lim["v_max"]),
            u_min=float(lim["u_min"]),
            u_max=float(lim["u_max"]),
        )
        ini = data.get("initial", {})
        initial = VehicleState(t=float(ini.get("t0", 0.0)), x=0.0, v=float(ini.get("v0", 0.0)))
        opt_raw = data.get("options", {})
        options = ScenarioOptions(
            u0=None if ini.get("u0") is None else float(ini["u0"]),
            jerk_limit=None
            if opt_raw.get("jerk_limit") is None
            else float(opt_raw["jerk_limit"]),
            theta=float(opt_raw.get("theta", 0.9)),
            sigma=float(opt_raw.get("sigma", 0.0)),
            alpha=float(opt_raw.get("alpha", 1.0)),
            beta=float(opt_raw.get("beta", 5.0)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ScenarioError(f"malformed scenario data: {exc}") from exc

    wt_raw = data.get("weights", {}) or {}
    sc = Scenario(
        segments=segments,
        limits=limits,
        weights=Weights(rho_t=1.0, rho_u=0.0),  # placeholder until validated
        initial=initial,
        options=options,
    )
    problems = validate(sc)
    if problems:
        raise ScenarioError("; ".join(problems))
    if "rho_t" in wt_raw or "rho_u" in wt_raw:
        weights = Weights(
            rho_t=float(wt_raw.get("rho_t", 0.0)), rho_u=float(wt_raw.get("rho_u", 0.0))
        )
    else:
        weights = default_weights(sc, w=float(wt_raw.get("w", 0.5)))
    sc = replace(sc, weights=weights)
    problems = validate(sc)
    if problems:
        raise ScenarioError("; ".join(problems))
    return sc


def load_scenario(path: str | Path) -> Scenario:
    """Read and validate a scenario JSON file."""
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ScenarioError(f"cannot read scenario file {path}: {exc}") from exc
    return scenario_from_dict(data)
