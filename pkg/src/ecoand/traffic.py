"""Interfering-traffic adjustments and safety-gap checking.

The lead vehicle's predicted trajectory and per-intersection status are
inputs; the module rewrites the scenario (forced crossing windows or a
reduced speed ceiling) and audits the headway inequality
x_lead - x >= alpha * v + beta after solving.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .kinematics import AccelProfile, evaluate_profile
from .scenario import Scenario, ScenarioError, green_window

CASE_LEAD_CROSSES_AHEAD = "crosses_in_window"
CASE_SAME_WINDOW = "crosses_same_window"
CASE_STOPPED = "stopped_at_intersection"
_CASES = (CASE_LEAD_CROSSES_AHEAD, CASE_SAME_WINDOW, CASE_STOPPED)


class AdjustmentError(ValueError):
    """Raised when an adjustment leaves no feasible crossing in the cycle."""


@dataclass(frozen=True)
class SafetyParams:
    alpha: float  # dynamic gap, seconds of headway
    beta: float  # static gap, meters
    theta: float = 0.9  # speed-ceiling factor when sharing a green window
    sigma: float = 0.0  # time gap behind a queued lead after green onset


@dataclass(frozen=True)
class IntersectionStatus:
    """What the lead vehicle does at one intersection."""

    case: str
    k: int | None = None  # green-window index, where the case needs one

    def __post_init__(self):
        if self.case not in _CASES:
            raise ValueError(f"unknown lead status {self.case!r}")
        if self.case in (CASE_LEAD_CROSSES_AHEAD, CASE_STOPPED) and self.k is None:
            raise ValueError(f"lead status {self.case!r} needs a window index")


@dataclass(frozen=True)
class PrecedingInfo:
    """Sampled lead trajectory plus per-intersection status tags."""

    t: tuple[float, ...]
    x: tuple[float, ...]
    status: tuple[IntersectionStatus | None, ...]

    def __post_init__(self):
        if len(self.t) != len(self.x):
            raise ValueError("lead trajectory samples must pair t and x")
        if any(b < a for a, b in zip(self.x, self.x[1:])):
            raise ValueError("lead position must be nondecreasing")

    def position(self, times: np.ndarray) -> np.ndarray:
        return np.interp(times, self.t, self.x)


def adjust_scenario(sc: Scenario, info: PrecedingInfo, sp: SafetyParams) -> Scenario:
    """Rewrite the scenario so the planned crossings respect the lead vehicle.

    Lead crosses a window the ego cannot share: push the crossing to the
    next green interval.  Both share a window: lower the speed ceiling to
    theta * v_max on that segment.  Lead queued at the light: cross only
    sigma seconds after the green onset.
    """
    if len(info.status) != sc.n_intersections:
        raise AdjustmentError("status list length must match intersection count")
    windows: list[tuple[float, float] | None] = list(
        sc.crossing_windows or (None,) * sc.n_intersections
    )
    segments = list(sc.segments)
    for i, st in enumerate(info.status):
        if st is None:
            continue
        light = sc.segments[i].light
        if st.case == CASE_LEAD_CROSSES_AHEAD:
            forced = ((st.k + 1) * light.period, np.inf)
        elif st.case == CASE_STOPPED:
            lo, hi = green_window(light, st.k)
            if sp.sigma >= light.duty * light.period:
                raise AdjustmentError(
                    f"intersection {i}: no room to cross {sp.sigma}s after green onset"
                )
            forced = (lo + sp.sigma, hi)
        else:  # CASE_SAME_WINDOW
            segments[i] = replace(
                segments[i], v_max_override=sp.theta * sc.limits.v_max
            )
            continue
        prev = windows[i]
        if prev is not None:
            forced = (max(forced[0], prev[0]), min(forced[1], prev[1]))
            if forced[0] > forced[1]:
                raise AdjustmentError(f"intersection {i}: forced windows conflict")
        windows[i] = forced
    return replace(sc, segments=tuple(segments), crossing_windows=tuple(windows))


def check_safety(
    profile: AccelProfile,
    sc: Scenario,
    info: PrecedingInfo,
    sp: SafetyParams,
    dt: float = 0.1,
) -> list[float]:
    """Instants where the headway inequality fails; empty means safe."""
    lo = max(profile.t_start, min(info.t))
    hi = min(profile.t_end, max(info.t))
    if hi < lo:
        return []
    times = np.arange(lo, hi + 0.5 * dt, dt)
    times = np.minimum(times, hi)
    bad: list[float] = []
    lead_x = info.position(times)
    for t, xh in zip(times, lead_x):
        x, v, _ = evaluate_profile(profile, sc.initial, float(t))
        if xh - x < sp.alpha * v + sp.beta:
            bad.append(float(t))
    return bad


def load_preceding(path: str | Path) -> PrecedingInfo:
    """Read a lead-vehicle JSON file: {samples: [{t, x}], status: [...]}."""
    try:
        data = json.loads(Path(path).read_text())
        samples = data["samples"]
        t = tuple(float(s["t"]) for s in samples)
        x = tuple(float(s["x"]) for s in samples)
        status: list[IntersectionStatus | None] = []
        for st in data["status"]:
            if st is None:
                status.append(None)
            else:
                status.append(
                    IntersectionStatus(case=st["case"], k=st.get("k"))
                )
        return PrecedingInfo(t=t, x=x, status=tuple(status))
    except (OSError, json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise ScenarioError(f"cannot read preceding-vehicle file {path}: {exc}") from exc
