import math
import warnings

import numpy as np
from flask import Blueprint, current_app

from ..config import model_params
from ..errors import ConfigError, DegenerateOrbitWarning
from ..output import orbit_plot, output_path, write_csv, write_json
from ..params import validate
from ..statevec_simple import solve_simple
from ..trajectory import PositionModel, ellipse_fit, seeded_diagonal_operators, trajectory_simple
from . import echo_paths, run_entries, run_options

orbit = Blueprint("orbit", __name__, cli_group=None)


def trajectory_entry(run, entry, index):
    if "energies" not in entry:
        raise ConfigError("trajectory runs need basis 'energies'")
    vp = validate(model_params(entry))
    solution = solve_simple(vp, entry["energies"], seed=run.seed)
    mc = solution.modes
    period = math.pi / mc.sigma
    lo, hi = entry.get("t_range", [0.0, 2.0 * period])
    t = np.linspace(lo, hi, int(entry.get("t_points", 400)))

    operators = seeded_diagonal_operators(solution.basis.dim, entry.get("operator_seed", run.seed))
    pm = PositionModel.from_operators(operators, solution.A, solution.B)
    samples = trajectory_simple(pm, mc, vp, t)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", DegenerateOrbitWarning)
        fit = ellipse_fit(samples)
    notes = [str(w.message) for w in caught if issubclass(w.category, DegenerateOrbitWarning)]
    for note in notes:
        current_app.logger.warning(note)

    meta = fit.to_json()
    meta.update(
        {
            "sigma": mc.sigma,
            "period_analytic": period,
            "period_error": abs(fit.period - period),
            "warnings": notes,
            "params": vp.to_mapping(),
            "seed": run.seed,
        }
    )

    def path(name):
        return output_path(run.out_dir, name, run.label, index)

    rel = samples.x - fit.center[None, :]
    columns = {"t": t, "x1": samples.x[:, 0], "x2": samples.x[:, 1], "x3": samples.x[:, 2]}
    return [
        write_csv(path("trajectory.csv"), columns),
        write_json(path("ellipse.json"), meta),
        orbit_plot(path("orbit.svg"), rel @ fit.e1, rel @ fit.e2, fit, title=f"<X(t)>, period pi/sigma = {period:.6g}"),
    ]


@orbit.cli.command("trajectory")
@run_options
def trajectory(run):
    """Orbit of <X(t)> for the simple solution: samples, ellipse fit and plot."""
    run.load(default_preset="orbit")
    for paths in run_entries(run, run.entries(), lambda entry, index: trajectory_entry(run, entry, index)):
        echo_paths(paths)
