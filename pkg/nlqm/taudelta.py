"""Reduced tau-delta dynamics.

With kappa = ln(delta) and s = -(b+mu)t the pair (kappa, tau) is a
one-dimensional Hamiltonian system

    h = tau^2 + V(kappa),   V(kappa) = 4 e^kappa + c e^(p kappa)

with dkappa/ds = 2 tau and dtau/ds = -V'(kappa).  On-shell states have h = N^2.
"""
import logging
import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np
from scipy import integrate as sp_integrate
from scipy import optimize
from scipy.interpolate import CubicSpline

from . import elliptic
from .errors import (
    DivergenceError,
    EnergyBelowBarrierError,
    InsufficientDataError,
    InvalidInputError,
    NegativeDeltaError,
    NoInteriorMinimumError,
    OffManifoldError,
    RegimeError,
)
from .params import derive, validate

logger = logging.getLogger(__name__)

KAPPA_LIMIT = 700.0
DEFAULT_SUBSTEP = 1e-3
DEFAULT_ORDER = 6


@dataclass(frozen=True)
class TauDeltaState:
    kappa: float
    tau: float
    s: float = 0.0

    @property
    def delta(self):
        return math.exp(self.kappa)

    @property
    def omega(self):
        return self.tau * self.tau

    def energy(self, pot):
        return self.tau * self.tau + float(potential(self.kappa, pot))


@dataclass(frozen=True)
class PotentialSpec:
    c: float
    p: float
    n_norm: float

    @property
    def n_squared(self):
        return self.n_norm * self.n_norm


@dataclass
class TauDeltaSeries:
    s: np.ndarray
    kappa: np.ndarray
    tau: np.ndarray
    h: np.ndarray
    n_norm: float
    p: float
    t: Optional[np.ndarray] = None

    @property
    def delta(self):
        return np.exp(self.kappa)

    @property
    def energy_drift(self):
        return float(np.max(np.abs(self.h - self.h[0]))) if len(self.h) else 0.0

    @property
    def c_recovered(self):
        delta = self.delta
        return (self.n_norm**2 - self.tau**2 - 4.0 * delta) * delta ** (-self.p)

    def state(self, i):
        return TauDeltaState(float(self.kappa[i]), float(self.tau[i]), float(self.s[i]))

    def __len__(self):
        return len(self.s)

    def columns(self):
        t = self.t if self.t is not None else np.full_like(self.s, np.nan)
        return {
            "s": self.s,
            "t": t,
            "kappa": self.kappa,
            "tau": self.tau,
            "delta": self.delta,
            "h": self.h,
            "c_recovered": self.c_recovered,
        }


class ClosedForm(NamedTuple):
    tau: np.ndarray
    delta: np.ndarray
    dtau: np.ndarray
    ddelta: np.ndarray


def _closed(tau, delta, dtau, ddelta, derivatives):
    if derivatives:
        return ClosedForm(tau, delta, dtau, ddelta)
    return tau, delta


### Closed forms in t ###
def closed_case1(omega0, b, t, derivatives=False):
    """Original model (mu = 0)."""
    x = 2.0 * omega0 * b * np.asarray(t, dtype=float)
    th, sech2 = np.tanh(x), 1.0 / np.cosh(x) ** 2
    return _closed(
        2.0 * omega0 * th,
        omega0**2 * sech2,
        4.0 * omega0**2 * b * sech2,
        -4.0 * omega0**3 * b * sech2 * th,
        derivatives,
    )


def closed_case2(omega0, b, N, t, derivatives=False):
    """b + mu = 0; delta does not move."""
    delta0 = N * N / 4.0 - omega0**2
    if delta0 < 0:
        raise NegativeDeltaError(f"omega0^2 = {omega0**2} exceeds N^2/4 = {N * N / 4.0}")
    x = 2.0 * omega0 * b * np.asarray(t, dtype=float)
    sech2 = 1.0 / np.cosh(x) ** 2
    return _closed(
        -2.0 * omega0 * np.tanh(x),
        np.full_like(x, delta0),
        -4.0 * omega0**2 * b * sech2,
        np.zeros_like(x),
        derivatives,
    )


def closed_case3(delta0, mu, N, t, derivatives=False):
    """b = 0."""
    y = mu * N * np.asarray(t, dtype=float)
    th, sech2 = np.tanh(y), 1.0 / np.cosh(y) ** 2
    return _closed(
        N * th,
        delta0 * sech2,
        mu * N * N * sech2,
        -2.0 * mu * N * delta0 * sech2 * th,
        derivatives,
    )


def tanh_ansatz(N, b, mu, t, derivatives=False):
    y = (b + mu) * N * np.asarray(t, dtype=float)
    th, sech2 = np.tanh(y), 1.0 / np.cosh(y) ** 2
    return _closed(
        N * th,
        N * N / 4.0 * sech2,
        (b + mu) * N * N * sech2,
        -0.5 * (b + mu) * N**3 * sech2 * th,
        derivatives,
    )


### First integral ###
def first_integral_c(tau, delta, N, p, tol=1e-12):
    """c = (N^2 - tau^2 - 4 delta) delta^(-p).

    Values within ``tol * N^2`` below zero are rounding noise on a
    Schwarz-saturated orbit and come back as 0.
    """
    delta = np.asarray(delta, dtype=float)
    if np.any(delta <= 0):
        raise InvalidInputError("delta must be positive")
    c = (N * N - np.asarray(tau) ** 2 - 4.0 * delta) * delta ** (-p)
    if np.any(c < -tol * N * N):
        raise OffManifoldError(f"negative first integral c = {np.min(c):.6g} violates Schwarz positivity")
    return _scalar(np.maximum(c, 0.0))


def schwarz(delta, c, p):
    return _scalar(0.25 * c * np.asarray(delta, dtype=float) ** p)


def _scalar(x):
    x = np.asarray(x)
    return float(x) if x.ndim == 0 else x


### Potential ###
def potential(kappa, pot):
    kappa = np.asarray(kappa, dtype=float)
    return _scalar(4.0 * np.exp(kappa) + pot.c * np.exp(pot.p * kappa))


def potential_derivative(kappa, pot):
    kappa = np.asarray(kappa, dtype=float)
    return _scalar(4.0 * np.exp(kappa) + pot.p * pot.c * np.exp(pot.p * kappa))


def potential_min(pot):
    if pot.p >= 0 or pot.c <= 0:
        raise NoInteriorMinimumError(f"V has no interior minimum for p={pot.p}, c={pot.c}")
    kappa0 = math.log(-pot.p * pot.c / 4.0) / (1.0 - pot.p)
    return kappa0, potential(kappa0, pot)


def potential_curvature_at_min(pot):
    kappa0, _ = potential_min(pot)
    return 4.0 * math.exp(kappa0) * (1.0 - pot.p)


def eta_shift(c):
    if c <= 0:
        raise InvalidInputError(f"c must be positive, got {c}")
    return 0.5 * math.log(c / 4.0)


### Symplectic integrator ###
def composition_weights(order):
    """Substep fractions of the symmetric triple-jump composition of position Verlet."""
    if order < 2 or order % 2:
        raise InvalidInputError(f"integrator order must be an even number >= 2, got {order}")
    weights = [1.0]
    for k in range(4, order + 1, 2):
        r = 2.0 ** (1.0 / (k - 1))
        w1, w0 = 1.0 / (2.0 - r), -r / (2.0 - r)
        weights = [w * x for x in (w1, w0, w1) for w in weights]
    return weights


def _advance(kappa, tau, ds, steps, weights, c, p):
    exp = math.exp
    for _ in range(steps):
        for w in weights:
            h = w * ds
            # half drift of dkappa/ds = 2 tau, kick, half drift
            kappa += h * tau
            tau -= h * (4.0 * exp(kappa) + p * c * exp(p * kappa))
            kappa += h * tau
        if abs(kappa) > KAPPA_LIMIT:
            raise DivergenceError(f"|kappa| exceeded {KAPPA_LIMIT} (kappa={kappa:.6g})")
    return kappa, tau


def integrate(init, pot, s_grid, substep=DEFAULT_SUBSTEP, order=DEFAULT_ORDER):
    """Integrate Hamilton's equations from ``init`` onto ``s_grid``.

    Grid points below ``init.s`` are reached by integrating backwards.
    """
    s_grid = np.asarray(s_grid, dtype=float)
    if s_grid.ndim != 1 or len(s_grid) == 0:
        raise InvalidInputError("s_grid must be a non-empty 1-d array")
    if np.any(np.diff(s_grid) <= 0):
        raise InvalidInputError("s_grid must be strictly increasing")
    if pot.c < 0:
        raise InvalidInputError(f"c must be non-negative, got {pot.c}")
    if substep <= 0:
        raise InvalidInputError(f"substep must be positive, got {substep}")

    weights = composition_weights(order)
    kappa_out = np.empty_like(s_grid)
    tau_out = np.empty_like(s_grid)

    split = int(np.searchsorted(s_grid, init.s))
    for indices in (range(split, len(s_grid)), range(split - 1, -1, -1)):
        s, kappa, tau = init.s, init.kappa, init.tau
        for i in indices:
            span = s_grid[i] - s
            steps = max(1, math.ceil(abs(span) / substep - 1e-9)) if span else 0
            if steps:
                kappa, tau = _advance(kappa, tau, span / steps, steps, weights, pot.c, pot.p)
            s = s_grid[i]
            kappa_out[i], tau_out[i] = kappa, tau

    h = tau_out**2 + 4.0 * np.exp(kappa_out) + pot.c * np.exp(pot.p * kappa_out)
    series = TauDeltaSeries(s_grid.copy(), kappa_out, tau_out, h, pot.n_norm, pot.p)
    logger.debug("integrated %d points, order %d, energy drift %.3e", len(s_grid), order, series.energy_drift)
    return series


### Exact p = -1 solution ###
def _pneg1_constants(N, c):
    if c <= 0:
        raise InvalidInputError(f"c must be positive, got {c}")
    root_c = math.sqrt(c)
    if N * N <= 4.0 * root_c:
        raise EnergyBelowBarrierError(f"N^2 = {N * N} does not exceed the barrier 4 sqrt(c) = {4.0 * root_c}")
    amplitude = math.sqrt(N * N - 4.0 * root_c)
    m = 8.0 * root_c / (4.0 * root_c - N * N)
    return amplitude, m


def closed_pneg1(N, c, s):
    """Energy-fixed exact solution for p = -1, branch with tau(0) > 0.

    Returns a TauDeltaState for scalar ``s`` and a TauDeltaSeries otherwise.
    """
    amplitude, m = _pneg1_constants(N, c)
    s_arr = np.asarray(s, dtype=float)
    u = amplitude * s_arr
    kappa = eta_shift(c) + elliptic.kappa_kernel(u, m)
    tau = 0.5 * amplitude * elliptic.kappa_kernel_derivative(u, m)
    if s_arr.ndim == 0:
        return TauDeltaState(float(kappa), float(tau), float(s_arr))
    kappa, tau = np.asarray(kappa), np.asarray(tau)
    h = tau**2 + 4.0 * np.exp(kappa) + c * np.exp(-kappa)
    return TauDeltaSeries(s_arr.copy(), kappa, tau, h, N, -1.0)


def pneg1_period(N, c):
    """Period in s of the p = -1 solution: 4K(k)/sqrt(N^2 + 4 sqrt(c))."""
    amplitude, m = _pneg1_constants(N, c)
    return elliptic.kernel_period(m) / amplitude


### Periods for general p < 0 ###
def _turning_point(f, start, direction):
    step = 0.5
    edge = start + direction * step
    while f(edge) < 0:
        step *= 2.0
        edge = start + direction * step
        if step > 2.0 * KAPPA_LIMIT:
            raise DivergenceError("no turning point found")
    lo, hi = sorted((start, edge))
    return optimize.brentq(f, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)


def turning_points(pot, h=None):
    h = pot.n_squared if h is None else h
    kappa0, v0 = potential_min(pot)
    if h <= v0:
        raise EnergyBelowBarrierError(f"energy {h} does not exceed the potential minimum {v0}")

    def gap(k):
        return potential(k, pot) - h

    return _turning_point(gap, kappa0, -1.0), _turning_point(gap, kappa0, +1.0)


def orbit_period(pot, h=None):
    h = pot.n_squared if h is None else h
    k_lo, k_hi = turning_points(pot, h)
    mid, half = 0.5 * (k_hi + k_lo), 0.5 * (k_hi - k_lo)

    def integrand(theta):
        k = mid + half * math.sin(theta)
        gap = h - potential(k, pot)
        if gap <= 0:
            return 0.0
        return half * math.cos(theta) / math.sqrt(gap)

    value, err = sp_integrate.quad(integrand, -math.pi / 2, math.pi / 2, limit=200, epsabs=1e-13, epsrel=1e-12)
    logger.debug("orbit period %.15g (quad error %.1e)", value, err)
    return value


def estimate_period(series, kappa_ref=None):
    kappa = np.asarray(series.kappa)
    if kappa_ref is None:
        kappa_ref = 0.5 * (kappa.max() + kappa.min())
    spline = CubicSpline(series.s, kappa - kappa_ref)
    roots = spline.roots(extrapolate=False)
    upward = roots[spline(roots, 1) > 0]
    if len(upward) < 2:
        raise InsufficientDataError("series spans less than one full oscillation")
    return float(np.mean(np.diff(upward)))


### Physical time ###
def _reduced_setup(params, c):
    vp = validate(params)
    dp = derive(vp)
    return vp, dp, PotentialSpec(c=c, p=dp.p, n_norm=vp.n_norm)


def integrate_t(params, c, init, t_grid, substep=DEFAULT_SUBSTEP, order=DEFAULT_ORDER):
    _, dp, pot = _reduced_setup(params, c)
    t_grid = np.asarray(t_grid, dtype=float)
    s_grid = dp.s_of_t(t_grid)
    order_idx = np.argsort(s_grid)
    series = integrate(init, pot, s_grid[order_idx], substep=substep, order=order)
    back = np.argsort(order_idx)
    return TauDeltaSeries(
        series.s[back], series.kappa[back], series.tau[back], series.h[back], pot.n_norm, pot.p, t=t_grid.copy()
    )


def closed_pneg1_t(params, c, t):
    vp, dp, _ = _reduced_setup(params, c)
    if not math.isclose(dp.p, -1.0, rel_tol=1e-12):
        raise RegimeError(f"closed_pneg1 needs p = -1, got p = {dp.p}")
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    series = closed_pneg1(vp.n_norm, c, dp.s_of_t(t_arr))
    series.t = t_arr.copy()
    return series
