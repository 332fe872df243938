import numpy as np
from flask import Blueprint, current_app

from ..approx import harmonic_background, small_osc
from ..config import model_params
from ..errors import ConfigError
from ..output import output_path, write_csv, write_json
from ..params import derive, validate
from ..statevec_general import (
    fixed_point_background,
    integrated_background,
    pneg1_background,
    solve_general,
    theta0_for_simple,
)
from ..statevec_simple import EnergyBasis, fixed_point, solve_simple
from ..taudelta import PotentialSpec
from . import echo_paths, run_entries, run_options
from .reduced import require_c, starting_state

state = Blueprint("state", __name__, cli_group=None)

BACKGROUND_SAMPLES = 2001


def _time_grid(entry):
    lo, hi = entry.get("t_range", [0.0, 10.0])
    if hi <= lo:
        raise ConfigError(f"t_range must be increasing, got {[lo, hi]}")
    return np.linspace(lo, hi, int(entry.get("t_points", 101)))


def _energies(entry):
    if "energies" not in entry:
        raise ConfigError("state runs need basis 'energies'")
    return np.asarray(entry["energies"], dtype=float)


def simple_report(vp, solution, t):
    """Residuals of the exact fixed-point solution and a fitted gamma phase slope."""
    mc, n = solution.modes, vp.n_norm
    states = [solution.state(ti) for ti in t]
    gamma = np.array([sv.gamma for sv in states])
    expected = solution.gamma(t)
    residuals = {
        "t": t,
        "norm_sum_resid": np.array([abs(sv.psi_norm + sv.phi_norm - n) for sv in states]),
        "psi_norm_resid": np.array([abs(sv.psi_norm - 0.5 * n) for sv in states]),
        "phi_norm_resid": np.array([abs(sv.phi_norm - 0.5 * n) for sv in states]),
        "tau_resid": np.array([abs(sv.tau) for sv in states]),
        "gamma_resid": np.abs(gamma - expected),
    }
    # gamma = gamma0 e^{i phase} e^{-i theta t}
    slope = np.polyfit(t, np.unwrap(np.angle(gamma)), 1)[0]
    report = {
        "background": "fixed-point",
        "theta": mc.theta,
        "theta_fitted": -float(slope),
        "theta_error": abs(-float(slope) - mc.theta),
        "sigma": mc.sigma,
        "gamma0": mc.gamma0,
        "s_plus": mc.s_plus,
        "s_minus": mc.s_minus,
        "nu_plus": mc.nu_plus,
        "nu_minus": mc.nu_minus,
        "delta0": solution.fixed.delta0,
        "c": solution.fixed.c,
    }
    return states, residuals, report


def general_background(run, entry, vp, window):
    kind = entry["background"]
    if kind == "fixed-point":
        return fixed_point_background(vp, window, fixed_point(vp).kappa0)
    dp = derive(vp)
    c = require_c(entry)
    if kind == "pneg1":
        return pneg1_background(vp, c, window)
    pot = PotentialSpec(c=c, p=dp.p, n_norm=vp.n_norm)
    if kind == "integrated":
        grid = np.linspace(window[0], window[1], BACKGROUND_SAMPLES)
        init = starting_state(entry, vp, pot)
        return integrated_background(vp, c, init, grid, substep=run.substep, order=run.order)
    model = small_osc(vp, pot, float(entry.get("amplitude", 1e-2)))
    return harmonic_background(vp, model, window)


def general_report(run, entry, vp, basis, t):
    window = (float(t[0]), float(t[-1]))
    path = general_background(run, entry, vp, window)
    theta0 = 0.0
    if path.source == "fixed-point":
        theta0 = theta0_for_simple(vp, fixed_point(vp).kappa0)
    solution = solve_general(vp, basis, path, window, seed=run.seed, theta0=theta0)
    states = [solution.state(ti) for ti in t]
    residuals = solution.residuals(t)
    report = {
        "background": entry["background"],
        "source": path.source,
        "theta0": theta0,
        "t0": solution.t0,
        "wronskian_drift": solution.fs.wronskian_drift,
        "path_consistency": path.consistency_residual(vp, t),
        "max_norm_sum_resid": float(np.max(residuals["norm_sum_resid"])),
        "max_tau_resid": float(np.max(residuals["tau_resid"])),
        "max_gamma_resid": float(np.max(residuals["gamma_resid"])),
    }
    return states, residuals, report


def state_entry(run, entry, index):
    vp = validate(model_params(entry))
    energies = _energies(entry)
    t = _time_grid(entry)
    background = entry.get("background", "fixed-point")
    entry = {**entry, "background": background}
    # The fixed point has an exact solution; "general" forces the F-equation route on it.
    if background == "fixed-point" and not entry.get("general"):
        solution = solve_simple(vp, energies, seed=run.seed)
        states, residuals, report = simple_report(vp, solution, t)
    else:
        states, residuals, report = general_report(run, entry, vp, EnergyBasis(energies), t)
    report.update({"params": vp.to_mapping(), "seed": run.seed})
    current_app.logger.info("state run on %s background: max norm-sum residual %.2e", background, np.max(residuals["norm_sum_resid"]))

    def path(name):
        return output_path(run.out_dir, name, run.label, index)

    return [
        write_json(path("states.json"), [sv.to_json() for sv in states]),
        write_csv(path("residuals.csv"), residuals),
        write_json(path("state-report.json"), report),
    ]


@state.cli.command("state")
@run_options
def state_command(run):
    """State-vector evolution: JSON dumps plus constraint residual series."""
    run.load(default_preset="fixed-point")
    for paths in run_entries(run, run.entries(), lambda entry, index: state_entry(run, entry, index)):
        echo_paths(paths)
