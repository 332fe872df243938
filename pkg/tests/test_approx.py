import math

import numpy as np
import pytest

from nlqm import approx
from nlqm.approx import (
    PiecewisePotential,
    amplitude_response,
    approx_error_report,
    continuity_point,
    curvature_by_differences,
    gap_scan,
    harmonic_background,
    piecewise_period,
    piecewise_solve,
    small_osc,
)
from nlqm.errors import (
    AmbiguousRegionError,
    EnergyBelowBarrierError,
    InvalidInputError,
    NoInteriorMinimumError,
    OffShellError,
)
from nlqm.params import ModelParams
from nlqm.taudelta import (
    PotentialSpec,
    TauDeltaState,
    estimate_period,
    integrate,
    pneg1_period,
    potential,
    potential_min,
)

FIGURE = PotentialSpec(c=4.0, p=-1.0, n_norm=5.0)


def on_shell_start(pp, N, s=0.0):
    return TauDeltaState(pp.kappa1, math.sqrt(N * N - pp.v1), s)


def test_small_oscillation_constants():
    model = small_osc(None, FIGURE, 1e-3)
    assert model.kappa0 == pytest.approx(0.0, abs=1e-15)
    assert model.omega_s == pytest.approx(4.0)
    assert model.period == pytest.approx(math.pi / 2.0)
    state = model.initial_state()
    assert state.kappa == pytest.approx(1e-3)
    assert state.tau == 0.0


def test_small_oscillation_period_matches_integrator():
    model = small_osc(None, FIGURE, 1e-3)
    init = model.initial_state()
    pot = PotentialSpec(FIGURE.c, FIGURE.p, math.sqrt(init.energy(FIGURE)))
    series = integrate(init, pot, np.linspace(0.0, 5.0 * model.period, 2001))
    assert estimate_period(series, model.kappa0) == pytest.approx(model.period, rel=1e-4)


def test_small_oscillation_energy_above_minimum():
    model = small_osc(None, FIGURE, 1e-3)
    _, v0 = potential_min(FIGURE)
    assert potential(model.kappa(0.0), FIGURE) - v0 == pytest.approx(model.energy_above_min, rel=1e-2)


def test_large_amplitude_warns(caplog):
    small_osc(None, FIGURE, 0.5)
    assert "exceeds" in caplog.text


def test_small_oscillation_needs_minimum():
    with pytest.raises(NoInteriorMinimumError):
        small_osc(None, PotentialSpec(c=1.0, p=0.5, n_norm=2.0), 1e-3)


def test_harmonic_background_is_consistent():
    params = ModelParams(b=1.0, mu=-0.5, n_norm=5.0)
    model = small_osc(params, FIGURE, 1e-2)
    path = harmonic_background(params, model, (0.0, 3.0))
    t = np.linspace(0.0, 3.0, 31)
    assert path.consistency_residual(params, t) <= 1e-14
    assert path.kappa(0.0) == pytest.approx(1e-2)
    assert path.source == "harmonic"


def test_continuity_point():
    assert continuity_point(4.0, -1.0) == 0.0
    assert continuity_point(8.0, -1.0) == pytest.approx(0.5 * math.log(2.0))
    with pytest.raises(InvalidInputError):
        continuity_point(0.0, -1.0)


def test_kappa1_equals_kappa0_at_pneg1():
    pot = PotentialSpec(c=625.0 / 16.0, p=-1.0, n_norm=5.0)
    assert PiecewisePotential.from_potential(pot).kappa1 == pytest.approx(potential_min(pot)[0], abs=1e-15)


def test_piecewise_potential_is_continuous():
    pp = PiecewisePotential.from_potential(PotentialSpec(c=2.0, p=-0.5, n_norm=4.0))
    below, above = pp.value(pp.kappa1 - 1e-12), pp.value(pp.kappa1 + 1e-12)
    assert below == pytest.approx(above, rel=1e-9)
    # the dropped exponential at kappa1 is V1 itself
    assert pp.omitted(pp.kappa1) == pytest.approx(pp.v1)
    assert potential(pp.kappa1, PotentialSpec(2.0, -0.5, 4.0)) == pytest.approx(2.0 * pp.v1)


def test_region_selection():
    pp = PiecewisePotential.from_potential(FIGURE)
    assert pp.region(pp.kappa1 + 0.1, -1.0) == "upper"
    assert pp.region(pp.kappa1, 1.0) == "upper"
    assert pp.region(pp.kappa1, -1.0) == "lower"
    with pytest.raises(AmbiguousRegionError):
        pp.region(pp.kappa1, 0.0)


def test_piecewise_orbit_is_continuous_at_crossings():
    pp = PiecewisePotential.from_potential(FIGURE)
    orbit = piecewise_solve(pp, 5.0, on_shell_start(pp, 5.0), np.linspace(0.0, 10.0, 1001))
    assert len(orbit.crossings) >= 4
    assert max(orbit.tau_jumps) <= 1e-10
    assert max(orbit.kappa_jumps) <= 1e-10
    np.testing.assert_allclose(orbit.series.h, 25.0, rtol=1e-12)


def test_piecewise_period_matches_segments():
    pp = PiecewisePotential.from_potential(PotentialSpec(c=2.0, p=-0.5, n_norm=4.0))
    orbit = piecewise_solve(pp, 4.0, on_shell_start(pp, 4.0), np.linspace(0.0, 20.0, 2001))
    regions = [seg.region for seg in orbit.segments]
    assert all(a != b for a, b in zip(regions, regions[1:]))
    period = orbit.segments[2].s_star - orbit.segments[0].s_star
    assert period == pytest.approx(piecewise_period(pp, 4.0), rel=1e-12)


def test_piecewise_rejects_off_shell_and_low_energy():
    pp = PiecewisePotential.from_potential(FIGURE)
    with pytest.raises(OffShellError):
        piecewise_solve(pp, 5.0, TauDeltaState(0.0, 1.0), np.linspace(0.0, 1.0, 11))
    with pytest.raises(EnergyBelowBarrierError):
        piecewise_period(pp, 1.5)
    with pytest.raises(InvalidInputError):
        piecewise_solve(pp, 5.0, on_shell_start(pp, 5.0, s=0.5), np.linspace(0.0, 1.0, 11))


def test_error_report():
    pp = PiecewisePotential.from_potential(FIGURE)
    report = approx_error_report(pp, FIGURE, 5.0, (0.0, 2.0), num=401)
    assert report["kappa1"] == pytest.approx(0.0, abs=1e-15)
    assert report["max_potential_gap"] == pytest.approx(4.0, rel=1e-2)
    assert report["max_potential_gap"] <= 4.0 + 1e-12
    assert report["period_approx"] > 0
    assert report["period_true"] > 0
    assert report["max_kappa_error"] >= 0
    assert report["period_rel_error"] == pytest.approx(
        abs(report["period_approx"] - report["period_true"]) / report["period_true"]
    )


@pytest.mark.parametrize("pot", [FIGURE, PotentialSpec(c=2.0, p=-0.5, n_norm=3.0)])
def test_omega_matches_second_differences(pot):
    model = small_osc(None, pot, 1e-3)
    assert model.omega_s**2 == pytest.approx(2.0 * curvature_by_differences(pot), rel=1e-8)


def test_deviation_scales_linearly_with_amplitude():
    amplitudes = [1e-2, 1e-3, 1e-4]
    np.testing.assert_allclose(amplitude_response(FIGURE, amplitudes), 1.0, atol=1e-5)

    # asymmetric well: the far turning point overshoots by about A^2 (1+p)/6
    lopsided = PotentialSpec(c=2.0, p=-0.5, n_norm=3.0)
    for amplitude, ratio in zip(amplitudes, amplitude_response(lopsided, amplitudes)):
        assert 1.0 - 1e-9 <= ratio <= 1.0 + 0.5 * amplitude


def test_piecewise_period_within_fifteen_percent():
    pp = PiecewisePotential.from_potential(FIGURE)
    report = approx_error_report(pp, FIGURE, 5.0, (0.0, 2.0), num=401)
    assert report["period_rel_error"] <= approx.PERIOD_REPORT_LIMIT
    assert report["period_true"] == pytest.approx(pneg1_period(5.0, 4.0), rel=1e-9)


def test_period_report_warns_past_limit(monkeypatch, caplog):
    monkeypatch.setattr(approx, "PERIOD_REPORT_LIMIT", 0.01)
    pp = PiecewisePotential.from_potential(FIGURE)
    approx_error_report(pp, FIGURE, 5.0, (0.0, 2.0), num=401)
    assert "piecewise period is off" in caplog.text


def test_potential_gap_grows_with_amplitude(caplog):
    pp = PiecewisePotential.from_potential(FIGURE)
    reports = gap_scan(pp, FIGURE, [6.0, 3.5, 5.0, 4.0], (0.0, 2.0), num=801)
    gaps = [r["max_potential_gap"] for r in reports]
    assert gaps == sorted(gaps)
    assert gaps[0] < gaps[-1]
    assert "not monotone" not in caplog.text
