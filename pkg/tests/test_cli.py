import csv
import json

import numpy as np
import pytest

from conftest import corridor_scenario, stopped_lead_info
from ecoand.cli import EXIT_INFEASIBLE, EXIT_OK, EXIT_VALIDATION, main
from ecoand.traffic import CASE_STOPPED

BENCH = {
    "segments": [
        {"length_m": 200, "light": {"period_s": 40, "green_fraction": 0.5}},
        {"length_m": 200, "light": {"period_s": 40, "green_fraction": 0.5}},
    ],
    "limits": {"v_min": 2.78, "v_max": 20, "u_min": -2.9, "u_max": 2.5},
    "initial": {"t0": 0, "v0": 0},
    "options": {"sigma": 4.0},
}


@pytest.fixture()
def scenario_file(tmp_path):
    path = tmp_path / "scenario.json"
    path.write_text(json.dumps(BENCH))
    return path


def read_report(out_dir):
    return json.loads((out_dir / "report.json").read_text())


def test_solve_mode(scenario_file, tmp_path):
    out = tmp_path / "out"
    assert main(["solve", "--scenario", str(scenario_file), "--out", str(out)]) == EXIT_OK
    rep = read_report(out)
    assert rep["mode"] == "solve"
    assert rep["joint"]["crossing_times"][1] == pytest.approx(40.0, abs=0.1)
    assert all(rep["joint"]["crossings_green"])
    assert (out / "trajectory_joint.csv").exists()


def test_trajectory_csv_reintegrates_to_crossings(scenario_file, tmp_path):
    out = tmp_path / "out"
    assert main(["solve", "--scenario", str(scenario_file), "--out", str(out)]) == EXIT_OK
    rep = read_report(out)
    with (out / "trajectory_joint.csv").open() as fh:
        rows = list(csv.DictReader(fh))
    t = np.array([float(r["t"]) for r in rows])
    v = np.array([float(r["v"]) for r in rows])
    x = np.array([float(r["x"]) for r in rows])
    x_num = np.concatenate([[0.0], np.cumsum(0.5 * (v[1:] + v[:-1]) * np.diff(t))])
    assert float(np.max(np.abs(x_num - x))) < 1e-3
    for cum, t_c in zip((200.0, 400.0), rep["joint"]["crossing_times"]):
        x_at = float(np.interp(t_c, t, x_num))
        assert x_at == pytest.approx(cum, abs=1e-3)


def test_compare_mode_reports_improvement(scenario_file, tmp_path):
    out = tmp_path / "out"
    assert main(["compare", "--scenario", str(scenario_file), "--out", str(out)]) == EXIT_OK
    rep = read_report(out)
    assert rep["improvement"] > 0.0
    assert rep["joint"]["crossing_times"][1] == pytest.approx(40.0, abs=0.1)
    assert rep["sequential"]["crossing_times"][1] == pytest.approx(40.0, abs=0.1)
    assert (out / "trajectory_sequential.csv").exists()


def test_baseline_mode(scenario_file, tmp_path):
    out = tmp_path / "out"
    assert main(["baseline", "--scenario", str(scenario_file), "--out", str(out)]) == EXIT_OK
    rep = read_report(out)
    assert "sequential" in rep
    assert rep["sequential"]["per_segment_costs"] is not None


def test_oracle_mode(scenario_file, tmp_path):
    out = tmp_path / "out"
    assert main(["oracle", "--scenario", str(scenario_file), "--out", str(out)]) == EXIT_OK
    rep = read_report(out)
    assert rep["comparison"]["sandwich_holds"] is True


def test_adjust_mode(scenario_file, tmp_path):
    sc = corridor_scenario()
    info = stopped_lead_info(sc, intersection=1, k=1)
    lead = tmp_path / "lead.json"
    lead.write_text(
        json.dumps(
            {
                "samples": [
                    {"t": t, "x": x} for t, x in zip(info.t, info.x)
                ],
                "status": [None, {"case": CASE_STOPPED, "k": 1}],
            }
        )
    )
    out = tmp_path / "out"
    code = main(
        [
            "adjust",
            "--scenario",
            str(scenario_file),
            "--preceding",
            str(lead),
            "--out",
            str(out),
        ]
    )
    assert code == EXIT_OK
    rep = read_report(out)
    assert 44.0 <= rep["adjusted"]["crossing_times"][1] <= 60.0
    assert rep["safety_violation_instants"] == []
    assert "first_crossing_delta" in rep


def test_adjust_requires_preceding(scenario_file, tmp_path):
    code = main(
        ["adjust", "--scenario", str(scenario_file), "--out", str(tmp_path / "o")]
    )
    assert code == EXIT_VALIDATION


def test_validation_exit_code(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{broken")
    assert (
        main(["solve", "--scenario", str(bad), "--out", str(tmp_path / "o")])
        == EXIT_VALIDATION
    )


def test_infeasible_exit_code(tmp_path):
    data = {
        "segments": [{"length_m": 150, "light": {"period_s": 40, "green_fraction": 0.25}}],
        "limits": {"v_min": 10, "v_max": 10, "u_min": -2, "u_max": 2},
        "initial": {"t0": 0, "v0": 10},
        "weights": {"rho_t": 1.0, "rho_u": 0.0},
    }
    path = tmp_path / "pinned.json"
    path.write_text(json.dumps(data))
    assert (
        main(["solve", "--scenario", str(path), "--out", str(tmp_path / "o")])
        == EXIT_INFEASIBLE
    )


def test_reports_are_byte_identical(scenario_file, tmp_path):
    out1, out2 = tmp_path / "a", tmp_path / "b"
    for out in (out1, out2):
        assert (
            main(
                [
                    "solve",
                    "--scenario",
                    str(scenario_file),
                    "--seed",
                    "3",
                    "--out",
                    str(out),
                ]
            )
            == EXIT_OK
        )
    assert (out1 / "report.json").read_bytes() == (out2 / "report.json").read_bytes()
