import math

import numpy as np
from flask import Blueprint, current_app

from ..config import model_params
from ..errors import ConfigError, EnergyBelowBarrierError
from ..output import line_plot, output_path, write_csv, write_json
from ..params import derive, validate
from ..taudelta import (
    PotentialSpec,
    TauDeltaState,
    closed_pneg1,
    integrate,
    orbit_period,
    pneg1_period,
    potential_min,
)
from . import echo_paths, run_entries, run_options

reduced = Blueprint("reduced", __name__, cli_group=None)


def is_pneg1(p):
    return math.isclose(p, -1.0, rel_tol=1e-12)


def require_c(entry):
    if "c" not in entry:
        raise ConfigError("this run needs the first-integral constant 'c'")
    return float(entry["c"])


def starting_state(entry, vp, pot):
    """``init`` from the config, else the closed form at s=0 (p=-1), else the potential minimum with tau > 0."""
    if "init" in entry:
        init = entry["init"]
        return TauDeltaState(float(init["kappa"]), float(init["tau"]), float(init.get("s", 0.0)))
    if is_pneg1(pot.p):
        return closed_pneg1(vp.n_norm, pot.c, 0.0)
    if pot.p >= 0:
        raise ConfigError(f"p = {pot.p} has no potential minimum; give an explicit 'init'")
    kappa0, v0 = potential_min(pot)
    if pot.n_squared <= v0:
        raise EnergyBelowBarrierError(f"N^2 = {pot.n_squared} does not exceed the potential minimum {v0}")
    return TauDeltaState(kappa0, math.sqrt(pot.n_squared - v0), 0.0)


def taudelta_entry(run, entry, index):
    vp = validate(model_params(entry))
    dp = derive(vp)
    c = require_c(entry)
    pot = PotentialSpec(c=c, p=dp.p, n_norm=vp.n_norm)
    solver = entry.get("solver", "both" if is_pneg1(dp.p) else "integrate")
    if solver != "integrate" and not is_pneg1(dp.p):
        raise ConfigError(f"solver '{solver}' needs the closed form, which exists only for p = -1 (p = {dp.p})")

    lo, hi = entry.get("s_range", [-2.0, 2.0])
    s = np.linspace(lo, hi, int(entry.get("points", 401)))
    runs = {}
    if solver in ("closed", "both"):
        runs["closed"] = closed_pneg1(vp.n_norm, c, s)
    if solver in ("integrate", "both"):
        runs["integrated"] = integrate(starting_state(entry, vp, pot), pot, s, substep=run.substep, order=run.order)

    def path(name):
        return output_path(run.out_dir, name, run.label, index)

    written = []
    summary = {"params": vp.to_mapping(), "c": c, "p": dp.p, "solver": solver}
    for name, series in runs.items():
        series.t = dp.t_of_s(series.s)
        written.append(write_csv(path(f"taudelta-{name}.csv"), series.columns()))
        summary[f"energy_drift_{name}"] = series.energy_drift
    if len(runs) == 2:
        closed, integrated = runs["closed"], runs["integrated"]
        gaps = {
            "kappa_gap": np.abs(closed.kappa - integrated.kappa),
            "tau_gap": np.abs(closed.tau - integrated.tau),
            "delta_gap": np.abs(closed.delta - integrated.delta),
        }
        gaps["max_gap"] = np.maximum.reduce(list(gaps.values()))
        written.append(write_csv(path("taudelta-gap.csv"), {"s": s, **gaps}))
        summary["max_gap"] = float(gaps["max_gap"].max())
        current_app.logger.info("closed vs integrated: max gap %.3e", summary["max_gap"])
    if dp.p < 0:
        summary["period_s"] = pneg1_period(vp.n_norm, c) if is_pneg1(dp.p) else orbit_period(pot)

    for column, label in (("kappa", "kappa"), ("tau", "tau"), ("delta", "delta")):
        written.append(
            line_plot(
                path(f"{column}.svg"),
                s,
                {name: getattr(series, column) for name, series in runs.items()},
                xlabel="s",
                ylabel=label,
                title=f"{label}(s) for N^2={vp.n_squared:g}, c={c:g}",
            )
        )
    written.append(write_json(path("taudelta.json"), summary))
    return written


def run_taudelta(run):
    results = run_entries(run, run.entries(), lambda entry, index: taudelta_entry(run, entry, index))
    for paths in results:
        echo_paths(paths)


@reduced.cli.command("taudelta")
@run_options
def taudelta(run):
    """Reduced tau-delta dynamics: closed form and/or integrator, CSV and SVG."""
    run.load(default_preset="figure")
    run_taudelta(run)
