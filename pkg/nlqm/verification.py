"""Registry of invariant checks run by ``verify``.

Each check returns a non-negative residual; it passes when the residual is
finite and no larger than its tolerance (or the global override).
"""
import logging
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate as sp_integrate

from . import density as rho_mod
from . import elliptic, taudelta, trajectory
from .approx import (
    PERIOD_REPORT_LIMIT,
    PiecewisePotential,
    amplitude_response,
    approx_error_report,
    curvature_by_differences,
    gap_scan,
    piecewise_solve,
    small_osc,
)
from .params import ModelParams, derive, equations_of_motion, tau_delta_rhs, validate
from .statevec_general import (
    fixed_point_background,
    integrate_F,
    modal_decomposition,
    pneg1_background,
    reconstruct,
    simple_solution_vectors,
    solve_general,
    theta0_for_simple,
)
from .statevec_simple import EnergyBasis, fixed_point, modal_constants, solve_simple

logger = logging.getLogger(__name__)

FIGURE_N, FIGURE_C = 5.0, 4.0
FIXED_POINT = ModelParams(a=1.0, b=1.0, mu=-0.5, lam=0.3, n_norm=2.0)
FIXED_POINT_ENERGIES = [0.0, 0.7, 1.3, 2.1]


@dataclass(frozen=True)
class Check:
    id: str
    description: str
    tolerance: float
    func: Callable


CHECKS = []


def check(check_id, description, tolerance):
    def decorator(func):
        CHECKS.append(Check(check_id, description, tolerance, func))
        return func

    return decorator


def bounded_draw(rng, lam_nonzero=True):
    b = rng.uniform(0.2, 2.0)
    mu = -b * rng.uniform(0.05, 0.95)
    lam = rng.uniform(0.1, 1.5) * rng.choice([-1.0, 1.0]) if lam_nonzero else 0.0
    return ModelParams(
        a=rng.uniform(-2.0, 2.0),
        b=b,
        mu=mu,
        lam=lam,
        alpha1=rng.uniform(-1.0, 1.0),
        alpha2=rng.uniform(-1.0, 1.0),
        beta1=rng.uniform(-1.0, 1.0),
        beta2=rng.uniform(-1.0, 1.0),
        n_norm=rng.uniform(0.5, 4.0),
    )


def _order_ratio(residual, h):
    """|r(h)/r(h/2) - 4| / 4 for a second-order scheme."""
    return abs(residual(h) / residual(0.5 * h) - 4.0) / 4.0


### Parameters ###
@check("PAR-BOUNDED", "bounded flag agrees with p < 0 over 1000 draws with b > 0", 0.0)
def _par_bounded(rng):
    mismatches = 0
    for _ in range(1000):
        b = rng.uniform(0.05, 3.0)
        vp = validate(ModelParams(b=b, mu=b * rng.uniform(-3.0, 1.0)))
        if not vp.case2 and vp.bounded != (derive(vp).p < 0):
            mismatches += 1
    return float(mismatches)


@check("PAR-TIME", "t_of_s(s_of_t(t)) = t for |t| up to 1e6 (relative)", 1e-15)
def _par_time(rng):
    t = np.concatenate([-np.logspace(-6, 6, 61), [0.0], np.logspace(-6, 6, 61)])
    worst = 0.0
    for _ in range(100):
        b = rng.uniform(0.05, 3.0)
        dp = derive(ModelParams(b=b, mu=-b * rng.uniform(0.05, 0.95)))
        worst = max(worst, float(np.max(np.abs(dp.t_of_s(dp.s_of_t(t)) - t) / np.maximum(1.0, np.abs(t)))))
    return worst


@check("PAR-WORKED", "b=1, mu=-1/2 gives p = -1 and s = -t/2", 1e-15)
def _par_worked(rng):
    dp = derive(FIXED_POINT)
    return max(abs(dp.p + 1.0), abs(dp.s_slope + 0.5))


### Elliptic ###
@check("ELL-ROUNDTRIP", "am(F(0.7|-0.9)|-0.9) = 0.7", 1e-12)
def _ell_roundtrip(rng):
    return abs(elliptic.jacobi_am(elliptic.ellip_f(0.7, -0.9), -0.9) - 0.7)


@check("ELL-QUAD", "F(phi|m) against adaptive quadrature for m in {0.5, -0.9, -4}", 1e-11)
def _ell_quad(rng):
    worst = 0.0
    for phi, m in ((math.pi / 2, 0.5), (1.3, -0.9), (2.4, -4.0), (0.4, 3.0)):
        ref, _ = sp_integrate.quad(lambda x: 1.0 / math.sqrt(1.0 - m * math.sin(x) ** 2), 0.0, phi, epsabs=1e-14, epsrel=1e-14)
        worst = max(worst, abs(elliptic.ellip_f(phi, m) - ref))
    return worst


@check("ELL-IDENTITIES", "sn^2+cn^2 = 1 and dn^2+m sn^2 = 1 over m in [-5, 0.99]", 1e-11)
def _ell_identities(rng):
    worst = 0.0
    for m in rng.uniform(-5.0, 0.99, 200):
        u = rng.uniform(-10.0, 10.0, 5)
        sn, cn, dn = elliptic.jacobi_sn_cn_dn(u, m)
        worst = max(worst, np.max(np.abs(sn**2 + cn**2 - 1.0)), np.max(np.abs(dn**2 + m * sn**2 - 1.0)))
    return float(worst)


@check("ELL-DN-FD", "dn = d am/du by central differences", 1e-8)
def _ell_dn(rng):
    worst, h = 0.0, 1e-5
    for m in rng.uniform(-5.0, 0.99, 50):
        u = rng.uniform(-5.0, 5.0)
        fd = (elliptic.jacobi_am(u + h, m) - elliptic.jacobi_am(u - h, m)) / (2.0 * h)
        worst = max(worst, abs(fd - elliptic.jacobi_sn_cn_dn(u, m)[2]))
    return worst


@check("ELL-KERNEL-ODE", "kappa_kernel(0.3, -16/17) against y'' = m sinh y", 1e-10)
def _ell_kernel(rng):
    m = -16.0 / 17.0
    sol = sp_integrate.solve_ivp(
        lambda u, y: [y[1], m * math.sinh(y[0])], (0.0, 0.3), [0.0, 2.0], method="DOP853", rtol=1e-13, atol=1e-14
    )
    return abs(sol.y[0, -1] - elliptic.kappa_kernel(0.3, m))


@check("ELL-KERNEL-ODD", "kappa_kernel(-u) = -kappa_kernel(u)", 0.0)
def _ell_odd(rng):
    u = rng.uniform(-20.0, 20.0, 100)
    return float(np.max(np.abs(elliptic.kappa_kernel(-u, -0.5) + elliptic.kappa_kernel(u, -0.5))))


### Reduced dynamics ###
def _figure_series(substep=1e-3):
    s_grid = np.linspace(-2.0, 2.0, 401)
    closed = taudelta.closed_pneg1(FIGURE_N, FIGURE_C, s_grid)
    pot = taudelta.PotentialSpec(FIGURE_C, -1.0, FIGURE_N)
    integrated = taudelta.integrate(taudelta.closed_pneg1(FIGURE_N, FIGURE_C, 0.0), pot, s_grid, substep=substep)
    return closed, integrated


@check("TD-FIGURE-GAP", "closed form vs integrator on the N^2=25, c=4 preset", 1e-6)
def _td_gap(rng):
    closed, integrated = _figure_series()
    return float(max(np.max(np.abs(closed.kappa - integrated.kappa)), np.max(np.abs(closed.tau - integrated.tau))))


@check("TD-FIGURE-ORIGIN", "(kappa, tau, delta) at s=0 equals (0, sqrt 17, 1)", 1e-12)
def _td_origin(rng):
    state = taudelta.closed_pneg1(FIGURE_N, FIGURE_C, 0.0)
    return max(abs(state.kappa), abs(state.tau - math.sqrt(17.0)), abs(state.delta - 1.0))


@check("TD-FIGURE-ENERGY", "h = N^2 along closed form and integrator", 1e-10)
def _td_energy(rng):
    closed, integrated = _figure_series()
    return float(max(np.max(np.abs(closed.h - 25.0)), np.max(np.abs(integrated.h - 25.0))))


@check("TD-CLOSED-RESIDUAL", "closed forms satisfy the tau-delta equations", 1e-12)
def _td_closed(rng):
    worst = 0.0
    for _ in range(100):
        b, mu, n = rng.uniform(0.2, 2.0), rng.uniform(-1.5, -0.1), rng.uniform(0.5, 3.0)
        t = rng.uniform(-2.0, 2.0, 100)
        omega0 = rng.uniform(0.1, 0.5) * n
        cases = (
            (ModelParams(b=b, mu=0.0, n_norm=n), taudelta.closed_case1(omega0, b, t, derivatives=True)),
            (ModelParams(b=b, mu=-b, n_norm=n), taudelta.closed_case2(omega0, b, n, t, derivatives=True)),
            (ModelParams(b=0.0, mu=mu, n_norm=n), taudelta.closed_case3(rng.uniform(0.1, 2.0), mu, n, t, derivatives=True)),
            (ModelParams(b=b, mu=mu, n_norm=n), taudelta.tanh_ansatz(n, b, mu, t, derivatives=True)),
        )
        for params, form in cases:
            dtau, ddelta = tau_delta_rhs(params, form.tau, form.delta)
            scale = max(1.0, n**3 * (b + abs(mu)))
            worst = max(worst, np.max(np.abs(form.dtau - dtau)) / scale, np.max(np.abs(form.ddelta - ddelta)) / scale)
    return float(worst)


def _bounded_orbit(rng):
    p = -rng.uniform(0.3, 3.0)
    c = rng.uniform(0.5, 5.0)
    pot0 = taudelta.PotentialSpec(c, p, 1.0)
    kappa0, v0 = taudelta.potential_min(pot0)
    n = math.sqrt(v0 * rng.uniform(1.1, 2.0))
    pot = taudelta.PotentialSpec(c, p, n)
    init = taudelta.TauDeltaState(kappa0, math.sqrt(n * n - v0), 0.0)
    return pot, taudelta.integrate(init, pot, np.linspace(-10.0, 10.0, 201))


@check("TD-FIRST-INTEGRAL", "first integral c constant along integrated orbits", 1e-8)
def _td_first_integral(rng):
    worst = 0.0
    for _ in range(3):
        pot, series = _bounded_orbit(rng)
        worst = max(worst, float(np.max(np.abs(series.c_recovered - pot.c))))
    return worst


@check("TD-ENERGY-DRIFT", "energy drift of the integrator at substep 1e-3", 1e-8)
def _td_drift(rng):
    return max(_bounded_orbit(rng)[1].energy_drift for _ in range(3))


@check("TD-REVERSIBLE", "integrate to s=5 and back returns the start", 1e-9)
def _td_reverse(rng):
    pot = taudelta.PotentialSpec(FIGURE_C, -1.0, FIGURE_N)
    start = taudelta.TauDeltaState(0.3, 2.0, 0.0)
    forward = taudelta.integrate(start, pot, np.array([0.0, 5.0]))
    end = forward.state(1)
    back = taudelta.integrate(end, pot, np.array([0.0, 5.0]))
    return max(abs(back.kappa[0] - start.kappa), abs(back.tau[0] - start.tau))


@check("TD-PERIOD", "quadrature period against the p=-1 elliptic period (relative)", 1e-6)
def _td_period(rng):
    exact = taudelta.pneg1_period(FIGURE_N, FIGURE_C)
    quad = taudelta.orbit_period(taudelta.PotentialSpec(FIGURE_C, -1.0, FIGURE_N))
    return abs(quad - exact) / exact


### Simple solution ###
@check("SIM-ALGEBRA", "consistency identities, positivity and root residuals over 1000 draws", 1e-12)
def _sim_algebra(rng):
    worst = 0.0
    for _ in range(1000):
        params = bounded_draw(rng)
        fp = fixed_point(params)
        mc = modal_constants(params, fp)
        lhs = complex(params.a, params.b) + params.lam
        c_coef = lhs * (complex(params.a, -params.b) - params.lam)
        theta_prime = params.n_norm * complex(params.lam, -params.mu)
        roots = max(abs(nu * nu + 1j * theta_prime * nu + c_coef * fp.delta0) for nu in (mc.nu_plus, mc.nu_minus))
        scale = max(1.0, abs(mc.nu_plus) ** 2)
        worst = max(worst, mc.real_part_residual, mc.imag_part_residual, mc.phi_norm_residual, roots / scale)
        if not abs(mc.s_plus - mc.s_minus) < 0.5 * params.n_norm:
            return float("inf")
    return worst


def _fixed_solution():
    return solve_simple(FIXED_POINT, FIXED_POINT_ENERGIES, seed=0)


@check("SIM-NORMS", "<psi|psi> = <phi|phi> = N/2 and <phi|psi> = gamma0 e^{-i theta t} on t in [0, 10]", 1e-10)
def _sim_norms(rng):
    sol = _fixed_solution()
    half = 0.5 * FIXED_POINT.n_norm
    worst = 0.0
    for t in np.linspace(0.0, 10.0, 101):
        state = sol.state(t)
        worst = max(worst, abs(state.psi_norm - half), abs(state.phi_norm - half), abs(state.gamma - sol.gamma(t)))
    return worst


def _eom_residual(state_at, params, energies, t):
    def residual(h):
        ahead, behind, here = state_at(t + h), state_at(t - h), state_at(t)
        dpsi, dphi = equations_of_motion(params, energies, here.psi, here.phi)
        return max(
            np.max(np.abs((ahead.psi - behind.psi) / (2.0 * h) - dpsi)),
            np.max(np.abs((ahead.phi - behind.phi) / (2.0 * h) - dphi)),
        )

    return residual


@check("SIM-EOM-ORDER", "finite-difference equation-of-motion residual is second order", 0.1)
def _sim_eom(rng):
    sol = _fixed_solution()
    return _order_ratio(_eom_residual(sol.state, FIXED_POINT, FIXED_POINT_ENERGIES, 1.7), 1e-2)


### Density matrix ###
@check("RHO-TRACE", "Tr rho = 1", 1e-12)
def _rho_trace(rng):
    sol = _fixed_solution()
    return max(abs(rho_mod.density(sol.state(t), FIXED_POINT.n_norm).trace - 1.0) for t in np.linspace(0.0, 10.0, 21))


@check("RHO-PURITY", "matrix purity against 1 - (c/2N^2) delta^p", 1e-9)
def _rho_purity(rng):
    sol = _fixed_solution()
    predicted = rho_mod.purity_predicted(sol.fixed.delta0, sol.fixed.c, -1.0, FIXED_POINT.n_norm)
    return max(abs(rho_mod.purity(rho_mod.density(sol.state(t), 2.0)) - predicted) for t in np.linspace(0.0, 10.0, 21))


@check("RHO-PURITY-FIXED", "Tr rho^2 = 3/4 at b=1, mu=-1/2, N^2=4", 1e-12)
def _rho_fixed(rng):
    fp = fixed_point(ModelParams(b=1.0, mu=-0.5, n_norm=2.0))
    return abs(rho_mod.purity_predicted(fp.delta0, fp.c, -1.0, 2.0) - 0.75)


@check("RHO-DOT-ORDER", "rho equation residual is second order in the sample spacing", 0.1)
def _rho_dot(rng):
    sol = _fixed_solution()

    def residual(h):
        series = [sol.state(1.3 + k * h) for k in range(-1, 2)]
        return float(rho_mod.rho_dot_residual(series, FIXED_POINT, FIXED_POINT_ENERGIES)[0])

    return _order_ratio(residual, 1e-2)


### Orbit ###
def _orbit():
    sol = _fixed_solution()
    ops = trajectory.seeded_diagonal_operators(len(FIXED_POINT_ENERGIES), seed=1)
    pm = trajectory.PositionModel.from_operators(ops, sol.A, sol.B)
    period = math.pi / sol.modes.sigma
    samples = trajectory.trajectory_simple(pm, sol.modes, FIXED_POINT, np.linspace(0.0, 2.0 * period, 200))
    return sol, ops, pm, samples


@check("ORB-PLANAR", "orbit samples are coplanar", 1e-10)
def _orb_planar(rng):
    return trajectory.ellipse_fit(_orbit()[3]).planarity_residual


@check("ORB-CONIC", "samples satisfy the fitted ellipse equation", 1e-9)
def _orb_conic(rng):
    return trajectory.ellipse_fit(_orbit()[3]).conic_residual


@check("ORB-PERIOD", "<X(t + pi/sigma)> = <X(t)>", 1e-10)
def _orb_period(rng):
    sol, _, pm, samples = _orbit()
    shifted = trajectory.trajectory_simple(pm, sol.modes, FIXED_POINT, samples.t + math.pi / sol.modes.sigma)
    return float(np.max(np.abs(shifted.x - samples.x)))


@check("ORB-PIPELINE", "Tr(rho X) from evolved states matches the analytic orbit", 1e-9)
def _orb_pipeline(rng):
    sol, ops, _, samples = _orbit()
    worst = 0.0
    for i in range(0, len(samples.t), 10):
        dm = rho_mod.density(sol.state(samples.t[i]), FIXED_POINT.n_norm)
        for k, X in enumerate(ops):
            worst = max(worst, abs(rho_mod.expectation(dm, X) - samples.x[i, k]))
    return worst


### General formalism ###
def _oscillating_background():
    c = 0.5
    dp_slope = -(FIXED_POINT.b + FIXED_POINT.mu)
    period_t = taudelta.pneg1_period(FIXED_POINT.n_norm, c) / abs(dp_slope)
    return pneg1_background(FIXED_POINT, c, (0.0, period_t)), period_t


@check("GEN-WRONSKIAN", "Wronskian e^{-f} constant on the p=-1 oscillating background", 1e-8)
def _gen_wronskian(rng):
    path, period_t = _oscillating_background()
    return integrate_F(path, FIXED_POINT, (0.0, period_t)).wronskian_drift


@check("GEN-CONSTRAINTS", "constraints imposed at t0 hold over one background period", 1e-7)
def _gen_constraints(rng):
    path, period_t = _oscillating_background()
    sol = solve_general(FIXED_POINT, EnergyBasis(FIXED_POINT_ENERGIES), path, (0.0, period_t), seed=3)
    res = sol.residuals(np.linspace(0.0, period_t, 41))
    return float(max(np.max(res["norm_sum_resid"]), np.max(res["tau_resid"]), np.max(res["gamma_resid"])))


@check("GEN-FIXED-POINT", "general formalism reproduces the simple solution on the fixed point", 1e-8)
def _gen_fixed(rng):
    simple = _fixed_solution()
    path = fixed_point_background(FIXED_POINT, (0.0, 10.0), simple.fixed.kappa0)
    theta0 = theta0_for_simple(FIXED_POINT, simple.fixed.kappa0, simple.phase)
    fs = integrate_F(path, FIXED_POINT, (0.0, 10.0), theta0=theta0)
    psi1, psi2 = simple_solution_vectors(fs, simple, 0.0)
    worst = 0.0
    for t in np.linspace(0.0, 10.0, 11):
        a, b = reconstruct(fs, psi1, psi2, FIXED_POINT, simple.basis, path, t), simple.state(t)
        worst = max(worst, float(np.max(np.abs(a.psi - b.psi))), float(np.max(np.abs(a.phi - b.phi))))
    A, B = modal_decomposition(fs, psi1, psi2, simple.modes)
    return max(worst, abs(np.vdot(A, A).real - simple.modes.s_plus), abs(np.vdot(B, B).real - simple.modes.s_minus))


@check("GEN-EOM-ORDER", "general states on the oscillating background solve the equations of motion", 0.05)
def _gen_eom(rng):
    path, period_t = _oscillating_background()
    sol = solve_general(FIXED_POINT, EnergyBasis(FIXED_POINT_ENERGIES), path, (0.0, period_t), seed=3)
    return _order_ratio(_eom_residual(sol.state, FIXED_POINT, FIXED_POINT_ENERGIES, 0.37 * period_t), 2e-2)


### Approximations ###
@check("APX-OMEGA", "small-oscillation frequency against the integrator period (relative)", 1e-4)
def _apx_omega(rng):
    pot = taudelta.PotentialSpec(FIGURE_C, -1.0, FIGURE_N)
    model = small_osc(None, pot, 1e-3)
    init = model.initial_state()
    pot = taudelta.PotentialSpec(pot.c, pot.p, math.sqrt(init.energy(pot)))
    series = taudelta.integrate(init, pot, np.linspace(0.0, 5.0 * model.period, 2001))
    return abs(taudelta.estimate_period(series, model.kappa0) - model.period) / model.period


@check("APX-CROSSING", "piecewise orbit is continuous in kappa and tau at every crossing", 1e-10)
def _apx_crossing(rng):
    pp = PiecewisePotential.from_potential(taudelta.PotentialSpec(FIGURE_C, -1.0, FIGURE_N))
    start = taudelta.TauDeltaState(pp.kappa1, math.sqrt(FIGURE_N**2 - pp.v1), 0.0)
    orbit = piecewise_solve(pp, FIGURE_N, start, np.linspace(0.0, 10.0, 1001))
    return max(orbit.tau_jumps + orbit.kappa_jumps + [0.0])


@check("APX-KAPPA1", "kappa1 = kappa0 when p = -1", 1e-15)
def _apx_kappa1(rng):
    pot = taudelta.PotentialSpec(FIGURE_C, -1.0, FIGURE_N)
    return abs(PiecewisePotential.from_potential(pot).kappa1 - taudelta.potential_min(pot)[0])


@check("APX-OMEGA-FD", "omega_s^2 = 2 V''(kappa0) by second differences (relative)", 1e-8)
def _apx_omega_fd(rng):
    worst = 0.0
    for c, p in ((FIGURE_C, -1.0), (2.0, -0.5), (1.0, -3.0)):
        pot = taudelta.PotentialSpec(c, p, FIGURE_N)
        omega_sq = small_osc(None, pot, 1e-3).omega_s ** 2
        worst = max(worst, abs(omega_sq - 2.0 * curvature_by_differences(pot)) / omega_sq)
    return worst


@check("APX-LINEAR", "max|kappa - kappa0| / A of released orbits for A in {1e-2, 1e-3, 1e-4}", 1e-5)
def _apx_linear(rng):
    ratios = amplitude_response(taudelta.PotentialSpec(FIGURE_C, -1.0, FIGURE_N), [1e-2, 1e-3, 1e-4])
    return max(abs(r - 1.0) for r in ratios)


@check("APX-PERIOD-REPORT", "piecewise period within the report limit at N^2=25, c=4", PERIOD_REPORT_LIMIT)
def _apx_period_report(rng):
    pot = taudelta.PotentialSpec(FIGURE_C, -1.0, FIGURE_N)
    return approx_error_report(PiecewisePotential.from_potential(pot), pot, FIGURE_N, (0.0, 2.0), num=401)[
        "period_rel_error"
    ]


@check("APX-GAP-MONOTONE", "potential gap never shrinks as N grows", 0.0)
def _apx_gap_monotone(rng):
    pot = taudelta.PotentialSpec(FIGURE_C, -1.0, FIGURE_N)
    reports = gap_scan(PiecewisePotential.from_potential(pot), pot, [3.5, 4.0, 5.0, 6.0], (0.0, 2.0), num=801)
    gaps = [r["max_potential_gap"] for r in reports]
    return max([earlier - later for earlier, later in zip(gaps, gaps[1:])] + [0.0])


@dataclass(frozen=True)
class CheckResult:
    id: str
    description: str
    value: float
    tolerance: float
    passed: bool
    error: str | None = None

    def to_json(self):
        out = {"id": self.id, "description": self.description, "value": self.value, "tolerance": self.tolerance, "passed": self.passed}
        if self.error is not None:
            out["error"] = self.error
        return out


def run_suite(tolerance=None, seed=0, ids=None):
    results = []
    for item in CHECKS:
        if ids and item.id not in ids:
            continue
        tol = item.tolerance if tolerance is None else tolerance
        rng = np.random.default_rng(seed)
        try:
            value = float(item.func(rng))
            error = None
        except Exception as exc:  # a raising check is a failed check
            value, error = float("nan"), f"{type(exc).__name__}: {exc}"
        passed = error is None and math.isfinite(value) and value <= tol
        logger.debug("%s: %.3e (tol %.1e) %s", item.id, value, tol, "ok" if passed else "FAILED")
        results.append(CheckResult(item.id, item.description, value, tol, passed, error))
    logger.info("%d/%d checks passed", sum(r.passed for r in results), len(results))
    return results
