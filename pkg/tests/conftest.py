import numpy as np
import pytest

from ecoand.kinematics import VehicleState
from ecoand.planner import enumerate_window_plans, reachable_time_bounds
from ecoand.scenario import (
    RoadSegment,
    Scenario,
    ScenarioError,
    TrafficLight,
    VehicleLimits,
    Weights,
    default_weights,
)


def corridor_scenario(
    lengths=(200.0, 200.0),
    period=40.0,
    duty=0.5,
    v_min=2.78,
    v_max=20.0,
    u_min=-2.9,
    u_max=2.5,
    v0=0.0,
    weights=None,
):
    light = TrafficLight(period=period, duty=duty)
    segs = tuple(RoadSegment(length=l, light=light) for l in lengths)
    limits = VehicleLimits(v_min=v_min, v_max=v_max, u_min=u_min, u_max=u_max)
    sc = Scenario(segs, limits, Weights(1.0, 0.0), VehicleState(0.0, 0.0, v0))
    if weights is None:
        weights = default_weights(sc)
    return Scenario(segs, limits, weights, VehicleState(0.0, 0.0, v0))


@pytest.fixture(scope="session")
def corridor():
    """The two-intersection benchmark corridor used throughout."""
    return corridor_scenario()


def random_corridor(seed, n_choices=(1, 2, 3), lengths=(150.0, 300.0)):
    """Seeded random corridor, or None if the draw is unusable."""
    rng = np.random.default_rng(seed)
    n = int(rng.choice(n_choices))
    segs = tuple(
        RoadSegment(
            length=float(rng.uniform(*lengths)),
            light=TrafficLight(
                period=float(rng.uniform(30, 60)), duty=float(rng.uniform(0.4, 0.7))
            ),
        )
        for _ in range(n)
    )
    limits = VehicleLimits(
        v_min=float(rng.uniform(2, 3)),
        v_max=float(rng.uniform(14, 20)),
        u_min=float(-rng.uniform(2, 3)),
        u_max=float(rng.uniform(2, 3)),
    )
    v0 = float(rng.uniform(limits.v_min, 0.8 * limits.v_max))
    sc = Scenario(segs, limits, Weights(1.0, 0.0), VehicleState(0.0, 0.0, v0))
    try:
        weights = default_weights(sc)
    except ScenarioError:
        return None
    return Scenario(segs, limits, weights, VehicleState(0.0, 0.0, v0))


def stopped_lead_info(sc, intersection=1, k=1, standoff=2.0, horizon=200.0):
    """Lead vehicle queued just past an intersection, departing at green onset.

    Stationary until the k-th green window opens, then full acceleration up
    to the speed limit and cruise.
    """
    from ecoand.traffic import CASE_STOPPED, IntersectionStatus, PrecedingInfo

    light = sc.segments[intersection].light
    t_go = k * light.period
    x0 = sc.cumulative_lengths[intersection] + standoff
    u, v_cap = sc.limits.u_max, sc.limits.v_max
    t_top = v_cap / u
    ts = np.arange(0.0, horizon, 0.5)
    xs = []
    for t in ts:
        if t <= t_go:
            xs.append(x0)
        elif t <= t_go + t_top:
            d = t - t_go
            xs.append(x0 + 0.5 * u * d * d)
        else:
            xs.append(x0 + 0.5 * u * t_top * t_top + v_cap * (t - t_go - t_top))
    status = [None] * sc.n_intersections
    status[intersection] = IntersectionStatus(case=CASE_STOPPED, k=k)
    return PrecedingInfo(t=tuple(float(t) for t in ts), x=tuple(xs), status=tuple(status))


def feasible_corridors(count, start_seed=0, **kwargs):
    """First `count` seeded corridors that admit at least one window plan."""
    out = []
    seed = start_seed
    while len(out) < count:
        sc = random_corridor(seed, **kwargs)
        seed += 1
        if sc is None:
            continue
        if not enumerate_window_plans(sc, reachable_time_bounds(sc)):
            continue
        out.append((seed - 1, sc))
    return out
