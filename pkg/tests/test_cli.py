import json
import math
from pathlib import Path

import numpy as np
import pandas as pd
import pytest

from nlqm import create_app


def write_config(tmp_path, data, name="run.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return str(path)


def read_csv(path):
    return pd.read_csv(path, float_precision="round_trip")


def out_dir(app):
    return Path(app.config["OUT_DIR"])


### taudelta / figures ###
def test_taudelta_figure_preset(app, runner):
    result = runner.invoke(args=["taudelta"])
    assert result.exit_code == 0, result.output
    out = out_dir(app)
    closed = read_csv(out / "taudelta-closed.csv")
    integrated = read_csv(out / "taudelta-integrated.csv")
    gap = read_csv(out / "taudelta-gap.csv")
    assert list(closed.columns) == ["s", "t", "kappa", "tau", "delta", "h", "c_recovered"]

    origin = closed[closed["s"].abs() < 1e-12].iloc[0]
    assert origin["kappa"] == pytest.approx(0.0, abs=1e-12)
    assert origin["tau"] == pytest.approx(math.sqrt(17.0), abs=1e-12)
    assert origin["delta"] == pytest.approx(1.0, abs=1e-12)
    assert gap["max_gap"].max() <= 1e-6
    np.testing.assert_allclose(closed["h"], 25.0, atol=1e-10)
    np.testing.assert_allclose(integrated["h"], 25.0, atol=1e-10)
    np.testing.assert_allclose(closed["t"], closed["s"] / -0.5)

    for name in ("kappa.svg", "tau.svg", "delta.svg", "taudelta.json"):
        assert (out / name).exists()
        assert str(out / name) in result.output
    summary = json.loads((out / "taudelta.json").read_text())
    assert summary["p"] == -1.0
    assert summary["max_gap"] <= 1e-6


def test_figures_alias(app, runner):
    result = runner.invoke(args=["figures"])
    assert result.exit_code == 0, result.output
    assert (out_dir(app) / "taudelta-gap.csv").exists()


def test_taudelta_is_deterministic(tmp_path, runner):
    for name in ("a", "b"):
        assert runner.invoke(args=["taudelta", "--out", str(tmp_path / name)]).exit_code == 0
    for name in ("taudelta-closed.csv", "taudelta-integrated.csv", "taudelta.json", "kappa.svg"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_closed_solver_needs_pneg1(tmp_path, runner):
    config = write_config(tmp_path, {"params": {"mu": -0.25}, "solver": "closed"})
    result = runner.invoke(args=["taudelta", "--config", config])
    assert result.exit_code == 2
    assert "p = -1" in result.output


def test_integrator_only_for_general_p(app, tmp_path, runner):
    config = write_config(tmp_path, {"params": {"mu": -0.25}, "c": 2.0, "solver": "integrate", "s_range": [0.0, 1.0], "points": 21})
    result = runner.invoke(args=["taudelta", "--config", config])
    assert result.exit_code == 0, result.output
    series = read_csv(out_dir(app) / "taudelta-integrated.csv")
    assert not (out_dir(app) / "taudelta-closed.csv").exists()
    np.testing.assert_allclose(series["c_recovered"], 2.0, rtol=1e-6)


def test_unknown_config_key_is_a_usage_error(tmp_path, runner):
    config = write_config(tmp_path, {"colour": "blue"})
    result = runner.invoke(args=["taudelta", "--config", config])
    assert result.exit_code == 2
    assert "colour" in result.output


def test_energy_below_barrier_is_reported(tmp_path, runner):
    config = write_config(tmp_path, {"params": {"N": 2.0}})
    result = runner.invoke(args=["taudelta", "--config", config])
    assert result.exit_code == 1
    assert "barrier" in result.output


def test_sweep_writes_one_set_per_entry(app, tmp_path, runner):
    config = write_config(tmp_path, {"sweep": [{"N": 4.0}, {"N": 6.0}], "label": "scan", "points": 41})
    result = runner.invoke(args=["taudelta", "--config", config, "--jobs", "2"])
    assert result.exit_code == 0, result.output
    for index, n in ((0, 4.0), (1, 6.0)):
        series = read_csv(out_dir(app) / f"scan-taudelta-closed-{index}.csv")
        np.testing.assert_allclose(series["h"], n * n, rtol=1e-10)


def test_out_dir_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("NLQM_OUT_DIR", str(tmp_path / "env-out"))
    app = create_app({"TESTING": True})
    result = app.test_cli_runner().invoke(args=["figures"])
    assert result.exit_code == 0, result.output
    assert (tmp_path / "env-out" / "kappa.svg").exists()


def test_numeric_out_dir_from_environment(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    monkeypatch.setenv("NLQM_OUT_DIR", "2026")
    app = create_app({"TESTING": True})
    assert app.config["OUT_DIR"] == "2026"
    result = app.test_cli_runner().invoke(args=["figures"])
    assert result.exit_code == 0, result.output
    assert (tmp_path / "2026" / "taudelta-gap.csv").exists()


### state ###
def test_state_fixed_point(app, runner):
    result = runner.invoke(args=["state", "--seed", "7"])
    assert result.exit_code == 0, result.output
    out = out_dir(app)
    residuals = read_csv(out / "residuals.csv")
    assert residuals["norm_sum_resid"].max() <= 1e-10
    assert residuals["gamma_resid"].max() <= 1e-10
    report = json.loads((out / "state-report.json").read_text())
    assert report["theta_error"] <= 1e-10
    assert report["seed"] == 7
    states = json.loads((out / "states.json").read_text())
    assert len(states) == 101
    assert len(states[0]["psi"]) == 4


def test_state_seed_repeat_is_byte_identical(tmp_path, runner):
    for name in ("a", "b"):
        assert runner.invoke(args=["state", "--seed", "3", "--out", str(tmp_path / name)]).exit_code == 0
    for name in ("states.json", "residuals.csv", "state-report.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_state_on_oscillating_background(app, tmp_path, runner):
    config = write_config(tmp_path, {"background": "pneg1", "c": 0.5, "t_range": [0.0, 5.0], "t_points": 21})
    result = runner.invoke(args=["state", "--config", config])
    assert result.exit_code == 0, result.output
    residuals = read_csv(out_dir(app) / "residuals.csv")
    for column in ("norm_sum_resid", "tau_resid", "gamma_resid"):
        assert residuals[column].max() <= 1e-7
    report = json.loads((out_dir(app) / "state-report.json").read_text())
    assert report["wronskian_drift"] <= 1e-8


def test_state_regime_violation(tmp_path, runner):
    config = write_config(tmp_path, {"params": {"mu": 0.5}})
    result = runner.invoke(args=["state", "--config", config])
    assert result.exit_code == 1
    assert "b > 0 and -b < mu < 0" in result.output


def test_state_background_needs_c(tmp_path, runner):
    config = write_config(tmp_path, {"background": "integrated"})
    result = runner.invoke(args=["state", "--config", config])
    assert result.exit_code == 2


### trajectory ###
def test_trajectory(app, runner):
    result = runner.invoke(args=["trajectory"])
    assert result.exit_code == 0, result.output
    out = out_dir(app)
    samples = read_csv(out / "trajectory.csv")
    assert list(samples.columns) == ["t", "x1", "x2", "x3"]
    assert len(samples) == 400
    meta = json.loads((out / "ellipse.json").read_text())
    assert meta["period"] == pytest.approx(math.pi / meta["sigma"], abs=1e-10)
    assert meta["period_error"] <= 1e-10
    assert meta["conic_residual"] <= 1e-9
    assert meta["warnings"] == []
    assert (out / "orbit.svg").read_text().startswith("<?xml")


### verify ###
def test_verify_subset_passes(app, tmp_path, runner):
    config = write_config(tmp_path, {"checks": ["ELL-ROUNDTRIP", "TD-FIGURE-ORIGIN", "RHO-PURITY-FIXED"]})
    result = runner.invoke(args=["verify", "--config", config])
    assert result.exit_code == 0, result.output
    report = json.loads((out_dir(app) / "verify.json").read_text())
    assert report["passed"]
    assert [c["id"] for c in report["checks"]] == ["ELL-ROUNDTRIP", "TD-FIGURE-ORIGIN", "RHO-PURITY-FIXED"]


def test_verify_tolerance_override_fails(app, tmp_path, runner):
    config = write_config(tmp_path, {"checks": ["TD-FIGURE-GAP"]})
    result = runner.invoke(args=["verify", "--config", config, "--tol", "1e-15"])
    assert result.exit_code == 1
    report = json.loads((out_dir(app) / "verify.json").read_text())
    assert report["failed"] == ["TD-FIGURE-GAP"]
    assert report["checks"][0]["tolerance"] == 1e-15
