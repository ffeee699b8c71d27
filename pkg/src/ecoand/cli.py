"""Batch front end: scenario ingestion, mode dispatch, CSV/JSON emission.

Modes: solve (joint optimum), baseline (sequential), compare (both plus an
improvement table), oracle (DP sandwich check), adjust (apply traffic
adjustments then solve).  Exit codes: 0 ok, 2 validation failure,
3 infeasible, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import sys
from pathlib import Path

from .kinematics import evaluate_profile
from .oracle import GridSpec, compare, dp_solve
from .scenario import Scenario, ScenarioError, load_scenario
from .solver import (
    InfeasibleError,
    NumericalFailureError,
    Solution,
    SolverOptions,
    solve_best,
    solve_sequential,
    verify_solution,
)
from .traffic import (
    AdjustmentError,
    SafetyParams,
    adjust_scenario,
    check_safety,
    load_preceding,
)

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_INFEASIBLE = 3
EXIT_NUMERICAL = 4


def _round_sig(value, digits: int = 12):
    """Normalize floats to 12 significant digits for byte-stable reports."""
    if isinstance(value, float):
        if not math.isfinite(value):
            return str(value)
        return float(f"{value:.{digits}g}")
    if isinstance(value, dict):
        return {k: _round_sig(v, digits) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_round_sig(v, digits) for v in value]
    return value


def _solution_block(sol: Solution, sc: Scenario) -> dict:
    report = verify_solution(sol, sc)
    return {
        "J_t": sol.J_t,
        "J_u": sol.J_u,
        "J": sol.J,
        "per_segment_costs": list(sol.per_segment_costs) if sol.per_segment_costs else None,
        "crossing_times": list(sol.crossing_times),
        "window_plan": list(sol.plan.k),
        "max_violation": sol.max_violation,
        "stationarity": sol.stationarity,
        "max_knot_jump": report.max_knot_jump,
        "terminal_accel": report.terminal_accel,
        "max_speed_violation": report.max_speed_violation,
        "crossings_green": list(report.crossings_green),
    }


def _write_trajectory(path: Path, sol: Solution, sc: Scenario, dt: float) -> None:
    profile = sol.profile
    n = max(1, int(math.ceil((profile.t_end - profile.t_start) / dt)))
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "x", "v", "u"])
        for i in range(n + 1):
            t = min(profile.t_start + i * dt, profile.t_end)
            x, v, u = evaluate_profile(profile, sc.initial, t)
            writer.writerow([f"{t:.12g}", f"{x:.12g}", f"{v:.12g}", f"{u:.12g}"])


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="ecoand",
        description="Plan stop-free crossings of a signalized corridor.",
    )
    p.add_argument("mode", choices=["solve", "baseline", "compare", "oracle", "adjust"])
    p.add_argument("--scenario", required=True, help="scenario JSON file")
    p.add_argument("--preceding", help="lead-vehicle JSON file (adjust mode)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--grid-dt", type=float, default=0.5)
    p.add_argument("--grid-dv", type=float, default=0.25)
    p.add_argument("--plans-cap", type=int, default=64)
    p.add_argument("--csv-dt", type=float, default=0.05)
    return p


def run(args: argparse.Namespace) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    try:
        raw = Path(args.scenario).read_bytes()
        sc = load_scenario(args.scenario)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    opts = SolverOptions(seed=args.seed, plans_cap=args.plans_cap)
    report: dict = {
        "mode": args.mode,
        "scenario_digest": hashlib.sha256(raw).hexdigest(),
        "seed": args.seed,
        "weights": {"rho_t": sc.weights.rho_t, "rho_u": sc.weights.rho_u},
    }
    try:
        if args.mode == "solve":
            sol = solve_best(sc, opts)
            report["joint"] = _solution_block(sol, sc)
            _write_trajectory(out_dir / "trajectory_joint.csv", sol, sc, args.csv_dt)
        elif args.mode == "baseline":
            sol = solve_sequential(sc, opts)
            report["sequential"] = _solution_block(sol, sc)
            _write_trajectory(out_dir / "trajectory_sequential.csv", sol, sc, args.csv_dt)
        elif args.mode == "compare":
            joint = solve_best(sc, opts)
            seq = solve_sequential(sc, opts)
            report["joint"] = _solution_block(joint, sc)
            report["sequential"] = _solution_block(seq, sc)
            report["improvement"] = (seq.J - joint.J) / seq.J
            _write_trajectory(out_dir / "trajectory_joint.csv", joint, sc, args.csv_dt)
            _write_trajectory(out_dir / "trajectory_sequential.csv", seq, sc, args.csv_dt)
        elif args.mode == "oracle":
            joint = solve_best(sc, opts)
            osol = dp_solve(sc, GridSpec(dt=args.grid_dt, dv=args.grid_dv))
            cmp_report = compare(joint, osol)
            report["joint"] = _solution_block(joint, sc)
            report["oracle"] = {
                "J": osol.cost,
                "crossing_times": list(osol.crossing_times),
                "notes": osol.notes,
            }
            report["comparison"] = {
                "j_difference": cmp_report.j_difference,
                "crossing_differences": list(cmp_report.crossing_differences),
                "sandwich_holds": cmp_report.sandwich_holds,
                "allowance": cmp_report.allowance,
            }
            _write_trajectory(out_dir / "trajectory_joint.csv", joint, sc, args.csv_dt)
        elif args.mode == "adjust":
            if not args.preceding:
                print("error: adjust mode needs --preceding", file=sys.stderr)
                return EXIT_VALIDATION
            info = load_preceding(args.preceding)
            sp = SafetyParams(
                alpha=sc.options.alpha,
                beta=sc.options.beta,
                theta=sc.options.theta,
                sigma=sc.options.sigma,
            )
            adjusted = adjust_scenario(sc, info, sp)
            sol = solve_best(adjusted, opts)
            violations = check_safety(sol.profile, adjusted, info, sp)
            report["adjusted"] = _solution_block(sol, adjusted)
            report["safety_violation_instants"] = violations
            try:
                free = solve_best(sc, opts)
                report["free_flow"] = _solution_block(free, sc)
                report["first_crossing_delta"] = (
                    sol.crossing_times[0] - free.crossing_times[0]
                )
            except (InfeasibleError, NumericalFailureError):
                report["free_flow"] = None
            _write_trajectory(out_dir / "trajectory_adjusted.csv", sol, adjusted, args.csv_dt)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (InfeasibleError, AdjustmentError) as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        report["infeasible"] = str(exc)
        (out_dir / "report.json").write_text(
            json.dumps(_round_sig(report), indent=2, sort_keys=True) + "\n"
        )
        return EXIT_INFEASIBLE
    except NumericalFailureError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL

    (out_dir / "report.json").write_text(
        json.dumps(_round_sig(report), indent=2, sort_keys=True) + "\n"
    )
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    return run(args)


if __name__ == "__main__":
    sys.exit(main())
