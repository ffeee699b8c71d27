"""Stop-free eco-driving through corridors of signalized intersections.

The package plans piecewise-linear acceleration profiles that carry a
vehicle across every intersection of a corridor during a green phase,
minimizing a weighted sum of travel time and control energy.
"""

from .kinematics import AccelProfile, LinearSegment, VehicleState
from .scenario import (
    RoadSegment,
    Scenario,
    ScenarioError,
    TrafficLight,
    VehicleLimits,
    Weights,
    load_scenario,
)
from .planner import TimeBounds, WindowPlan, enumerate_window_plans, reachable_time_bounds
from .solver import (
    InfeasibleError,
    NumericalFailureError,
    Solution,
    SolverOptions,
    solve_best,
    solve_sequential,
)
from .oracle import GridSpec, OracleSolution, dp_solve

__all__ = [
    "AccelProfile",
    "LinearSegment",
    "VehicleState",
    "RoadSegment",
    "Scenario",
    "ScenarioError",
    "TrafficLight",
    "VehicleLimits",
    "Weights",
    "load_scenario",
    "TimeBounds",
    "WindowPlan",
    "enumerate_window_plans",
    "reachable_time_bounds",
    "InfeasibleError",
    "NumericalFailureError",
    "Solution",
    "SolverOptions",
    "solve_best",
    "solve_sequential",
    "GridSpec",
    "OracleSolution",
    "dp_solve",
]
