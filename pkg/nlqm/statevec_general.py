"""State vectors over an arbitrary (kappa(t), tau(t)) background.

Once the reduced problem is solved, gamma = <phi|psi> is known exactly and the
pair (psi, phi) decouples into one scalar second-order equation

    F'' - f' F' + (g+lambda)(g*-lambda) e^kappa F = 0

shared by every energy mode.  With fundamental solutions F1, F2

    psi_n(t) = e^{-i E_n t} E_psi(t) (F1 psi1_n + F2 psi2_n)
    phi_n(t) = e^{-i E_n t} E_phi(t) e^{-f} e^{i theta0} i/(g+lambda) (F1' psi1_n + F2' psi2_n)

where E_psi, E_phi carry the diagonal couplings.
"""
import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy import optimize
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicSpline

from .errors import AccuracyError, InvalidInputError, NoSolutionFoundError, PathDomainError
from .params import derive, validate
from .statevec_simple import StateVectorPair
from .taudelta import closed_pneg1_t, integrate_t

logger = logging.getLogger(__name__)

WRONSKIAN_LIMIT = 1e-6
CONSTRAINT_TOL = 1e-10


@dataclass
class BackgroundPath:
    kappa_fn: Callable
    tau_fn: Callable
    dkappa_fn: Callable
    t_min: float
    t_max: float
    source: str

    def _checked(self, t):
        t = np.asarray(t, dtype=float)
        slack = 1e-12 * max(1.0, self.t_max - self.t_min)
        if np.any(t < self.t_min - slack) or np.any(t > self.t_max + slack):
            raise PathDomainError(f"t outside the background window [{self.t_min}, {self.t_max}]")
        return t

    def kappa(self, t):
        return self.kappa_fn(self._checked(t))

    def tau(self, t):
        return self.tau_fn(self._checked(t))

    def dkappa(self, t):
        return self.dkappa_fn(self._checked(t))

    def consistency_residual(self, params, t):
        t = self._checked(t)
        return float(np.max(np.abs(self.dkappa(t) + 2.0 * (params.b + params.mu) * self.tau(t))))


def _const(value):
    return lambda t: np.full(np.shape(t), value, dtype=float) if np.ndim(t) else float(value)


def fixed_point_background(params, t_span, kappa0):
    return BackgroundPath(_const(kappa0), _const(0.0), _const(0.0), t_span[0], t_span[1], "fixed-point")


def pneg1_background(params, c, t_span):
    """Exact p = -1 background, evaluated from the closed form at every call."""
    vp = validate(params)
    slope = derive(vp).s_slope

    def kappa(t):
        values = closed_pneg1_t(vp, c, t).kappa
        return values if np.ndim(t) else float(values[0])

    def tau(t):
        values = closed_pneg1_t(vp, c, t).tau
        return values if np.ndim(t) else float(values[0])

    def dkappa(t):
        return 2.0 * slope * np.asarray(tau(t))

    return BackgroundPath(kappa, tau, dkappa, t_span[0], t_span[1], "closed-form")


def integrated_background(params, c, init, t_grid, substep=1e-3, order=6):
    series = integrate_t(params, c, init, t_grid, substep=substep, order=order)
    order_idx = np.argsort(series.t)
    t = series.t[order_idx]
    kappa = CubicSpline(t, series.kappa[order_idx])
    tau = CubicSpline(t, series.tau[order_idx])
    return BackgroundPath(kappa, tau, kappa.derivative(), float(t[0]), float(t[-1]), "integrated")


class PhaseData:
    """Lambda, f and the phase functions theta_psi, theta_phi, theta_f on a background.

    All phases use the e^{-i theta} convention, so that
    theta_phi - theta_psi - theta_f + Lambda = 0.
    """

    def __init__(self, params, path, theta0=0.0):
        self.params = validate(params)
        self.path = path
        self.theta0 = theta0
        vp = self.params
        self._bmu = vp.b + vp.mu
        self._alpha = vp.alpha1 + vp.alpha2
        self._beta = vp.beta1 + vp.beta2
        self._alpha_p = vp.alpha1 - vp.alpha2
        self._beta_p = vp.beta1 - vp.beta2
        self.g_lam = complex(vp.a, vp.b) + vp.lam
        self.coupling = self.g_lam * (complex(vp.a, -vp.b) - vp.lam)

    def Lambda(self, t):
        vp, n = self.params, self.params.n_norm
        return n * (vp.lam + 0.5 * (self._alpha - self._beta)) * t + self.path.kappa(t) * (
            vp.a - 0.5 * (self._alpha_p - self._beta_p)
        ) / (2.0 * self._bmu)

    def f(self, t):
        n, mu = self.params.n_norm, self.params.mu
        kappa = self.path.kappa(t)
        return (
            0.5 * kappa
            - 1j * self.Lambda(t)
            - 0.5j * n * (self._beta - self._alpha) * t
            - mu * n * t
            + 1j * kappa * (self._beta_p - self._alpha_p) / (4.0 * self._bmu)
        )

    def fdot(self, t):
        vp, n = self.params, self.params.n_norm
        tau = self.path.tau(t)
        return -self._bmu * tau - vp.mu * n - 1j * (vp.lam * n - vp.a * tau)

    def theta_psi(self, t, energy=0.0):
        n = self.params.n_norm
        return energy * t + 0.5 * n * self._alpha * t - self.path.kappa(t) * self._alpha_p / (4.0 * self._bmu)

    def theta_phi(self, t, energy=0.0):
        n = self.params.n_norm
        return energy * t + 0.5 * n * self._beta * t - self.path.kappa(t) * self._beta_p / (4.0 * self._bmu)

    def theta_f(self, t):
        return -np.imag(self.f(t))

    def envelope_psi(self, t):
        n, mu = self.params.n_norm, self.params.mu
        kappa = self.path.kappa(t)
        return np.exp(-0.5j * n * complex(self._alpha, mu) * t + 0.25j * kappa * complex(self._alpha_p, -mu) / self._bmu)

    def envelope_phi(self, t):
        n, mu = self.params.n_norm, self.params.mu
        kappa = self.path.kappa(t)
        return np.exp(-0.5j * n * complex(self._beta, -mu) * t + 0.25j * kappa * complex(self._beta_p, -mu) / self._bmu)

    def derivative_factor(self, t):
        return self.envelope_phi(t) * np.exp(-self.f(t)) * np.exp(1j * self.theta0) * 1j / self.g_lam


def gamma_general(path, params, theta0, t):
    phases = PhaseData(params, path, theta0)
    return np.exp(0.5 * path.kappa(t)) * np.exp(-1j * (phases.Lambda(t) + theta0))


@dataclass
class FSolutionPair:
    solution: object
    phases: PhaseData
    t0: float
    t1: float
    wronskian_c0: complex
    wronskian_drift: float

    def __call__(self, t):
        y = self.solution.sol(t)
        return y[0], y[1], y[2], y[3]

    def wronskian(self, t):
        f1, df1, f2, df2 = self(t)
        return df1 * f2 - f1 * df2


def integrate_F(path, params, window, theta0=0.0, rtol=1e-12, atol=1e-12):
    t0, t1 = float(window[0]), float(window[1])
    path._checked([t0, t1])
    phases = PhaseData(params, path, theta0)
    coupling = phases.coupling

    def rhs(t, y):
        f1, df1, f2, df2 = y
        kick = coupling * math.exp(path.kappa(t))
        fd = phases.fdot(t)
        return [df1, fd * df1 - kick * f1, df2, fd * df2 - kick * f2]

    sol = solve_ivp(
        rhs, (t0, t1), np.array([1, 0, 0, 1], dtype=complex), method="DOP853", rtol=rtol, atol=atol, dense_output=True
    )
    if not sol.success:
        raise AccuracyError(f"F integration failed: {sol.message}")

    c0 = -np.exp(-phases.f(t0))
    samples = np.linspace(t0, t1, 201)
    f1, df1, f2, df2 = sol.sol(samples)
    audit = (df1 * f2 - f1 * df2) * np.exp(-phases.f(samples))
    drift = float(np.max(np.abs(audit - c0)) / abs(c0))
    if drift > WRONSKIAN_LIMIT:
        raise AccuracyError(f"Wronskian drift {drift:.3e} exceeds {WRONSKIAN_LIMIT:g}; tighten the tolerances")
    if drift > 0.1 * WRONSKIAN_LIMIT:
        logger.warning("Wronskian drift %.3e is close to its limit", drift)
    logger.debug("F integrated on [%g, %g] with %d evaluations, drift %.3e", t0, t1, sol.nfev, drift)
    return FSolutionPair(sol, phases, t0, t1, complex(c0), drift)


def reconstruct(fs, psi1, psi2, params, basis, path, t):
    phases = fs.phases
    f1, df1, f2, df2 = fs(t)
    modes = basis.phases(t)
    psi = modes * phases.envelope_psi(t) * (f1 * psi1 + f2 * psi2)
    phi = modes * phases.derivative_factor(t) * (df1 * psi1 + df2 * psi2)
    return StateVectorPair(psi=psi, phi=phi, t=float(t))


def vectors_from_state(fs, basis, psi, phi, t):
    phases = fs.phases
    back = np.conj(basis.phases(t))
    x = back * psi / phases.envelope_psi(t)
    y = back * phi / phases.derivative_factor(t)
    f1, df1, f2, df2 = fs(t)
    det = f1 * df2 - f2 * df1
    return (df2 * x - f2 * y) / det, (f1 * y - df1 * x) / det


def _constraint_targets(params, path, theta0, t0):
    n = params.n_norm
    return n, float(path.tau(t0)), complex(gamma_general(path, params, theta0, t0))


def impose_constraints(fs, params, basis, path, t0, seed, max_iterations=200):
    """Pick (psi1, psi2) so the three constraints hold at ``t0``.

    The state at t0 is psi = r1 u1, phi = r2 e^{i vartheta} (cos chi u1 + sin chi u2)
    with seeded orthonormal u1, u2.
    """
    vp = validate(params)
    n, tau0, gamma0 = _constraint_targets(vp, path, fs.phases.theta0, t0)
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((basis.dim, 2)) + 1j * rng.standard_normal((basis.dim, 2))
    u, _ = np.linalg.qr(z)
    u1, u2 = u[:, 0], u[:, 1]

    def residuals(x):
        r1, r2, chi, vartheta = x
        overlap = r1 * r2 * math.cos(chi) * complex(math.cos(vartheta), -math.sin(vartheta))
        return [r1 * r1 + r2 * r2 - n, r1 * r1 - r2 * r2 - tau0, overlap.real - gamma0.real, overlap.imag - gamma0.imag]

    guess = [math.sqrt(0.5 * n), math.sqrt(0.5 * n), math.pi / 4, 0.0]
    result = optimize.root(residuals, guess, method="lm", options={"maxiter": max_iterations, "xtol": 1e-15, "ftol": 1e-15})
    worst = float(np.max(np.abs(residuals(result.x))))
    if worst > CONSTRAINT_TOL * max(1.0, n):
        raise NoSolutionFoundError("constraints at t0 could not be satisfied", worst)
    logger.debug("constraints solved with residual %.2e after %d evaluations", worst, result.nfev)

    r1, r2, chi, vartheta = result.x
    psi = r1 * u1
    phi = r2 * np.exp(1j * vartheta) * (math.cos(chi) * u1 + math.sin(chi) * u2)
    return vectors_from_state(fs, basis, psi, phi, t0)


def constraint_residuals(fs, psi1, psi2, params, basis, path, t_grid):
    vp = validate(params)
    t_grid = np.asarray(t_grid, dtype=float)
    norm_sum, tau_resid, gamma_resid = (np.empty_like(t_grid) for _ in range(3))
    for i, t in enumerate(t_grid):
        state = reconstruct(fs, psi1, psi2, vp, basis, path, t)
        norm_sum[i] = abs(state.psi_norm + state.phi_norm - vp.n_norm)
        tau_resid[i] = abs(state.tau - path.tau(t))
        gamma_resid[i] = abs(state.gamma - gamma_general(path, vp, fs.phases.theta0, t))
    return {"t": t_grid, "norm_sum_resid": norm_sum, "tau_resid": tau_resid, "gamma_resid": gamma_resid}


def theta0_for_simple(params, kappa0, phase=0.0):
    """theta0 that makes gamma_general match gamma0 e^{i phase} e^{-i theta t} on the fixed point."""
    vp = validate(params)
    alpha_p, beta_p = vp.alpha1 - vp.alpha2, vp.beta1 - vp.beta2
    return -phase - kappa0 * (vp.a - 0.5 * (alpha_p - beta_p)) / (2.0 * (vp.b + vp.mu))


def simple_solution_vectors(fs, solution, t0):
    """(psi1, psi2) reproducing a simple solution; ``fs`` must use theta0_for_simple."""
    state = solution.state(t0)
    return vectors_from_state(fs, solution.basis, state.psi, state.phi, t0)


def modal_decomposition(fs, psi1, psi2, modes):
    """Split a fixed-point-background solution into its e^{nu+ t} and e^{nu- t} parts.

    Returns (A, B) in the normalization of the simple solution, so that
    <A|A> = S+ and <B|B> = S- when the constraints hold.
    """
    t0 = fs.t0
    nu_p, nu_m = modes.nu_plus, modes.nu_minus
    plus = (nu_m * psi1 - psi2) / (nu_m - nu_p)
    minus = (psi2 - nu_p * psi1) / (nu_m - nu_p)
    phases = fs.phases
    vp = phases.params
    n, mu = vp.n_norm, vp.mu
    # E_psi(t) e^{nu(t - t0)} = e^{-i(N/2)(alpha + lambda)t} e^{+-i sigma t} times this constant
    shift = phases.envelope_psi(t0) * np.exp(0.5j * n * complex(phases._alpha, mu) * t0)
    return shift * np.exp(-nu_p * t0) * plus, shift * np.exp(-nu_m * t0) * minus


@dataclass
class GeneralSolution:
    params: object
    basis: object
    path: BackgroundPath
    fs: FSolutionPair
    psi1: np.ndarray
    psi2: np.ndarray
    t0: float

    def state(self, t):
        return reconstruct(self.fs, self.psi1, self.psi2, self.params, self.basis, self.path, t)

    def residuals(self, t_grid):
        return constraint_residuals(self.fs, self.psi1, self.psi2, self.params, self.basis, self.path, t_grid)


def solve_general(params, basis, path, window, seed=0, theta0=0.0, t0: Optional[float] = None):
    vp = validate(params)
    if basis.dim < 2:
        raise InvalidInputError("basis needs at least two states")
    fs = integrate_F(path, vp, window, theta0=theta0)
    t0 = fs.t0 if t0 is None else t0
    psi1, psi2 = impose_constraints(fs, vp, basis, path, t0, seed)
    return GeneralSolution(vp, basis, path, fs, psi1, psi2, t0)


def phase_identity_residual(phases, t):
    return float(np.max(np.abs(phases.theta_phi(t) - phases.theta_psi(t) - phases.theta_f(t) + phases.Lambda(t))))
