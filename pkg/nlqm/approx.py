"""Approximate reduced dynamics: small oscillations and the piecewise single-exponential potential."""
import logging
import math
from dataclasses import dataclass, field
from typing import List

import numpy as np

from .errors import AmbiguousRegionError, EnergyBelowBarrierError, InvalidInputError, NoInteriorMinimumError, OffShellError
from .params import derive, validate
from .statevec_general import BackgroundPath
from .taudelta import (
    PotentialSpec,
    TauDeltaSeries,
    TauDeltaState,
    integrate,
    orbit_period,
    potential,
    potential_curvature_at_min,
    potential_min,
)

logger = logging.getLogger(__name__)

ON_SHELL_TOL = 1e-9
PERIOD_REPORT_LIMIT = 0.15


### Small oscillations ###
@dataclass(frozen=True)
class HarmonicModel:
    kappa0: float
    omega_s: float
    amplitude: float
    phase0: float = 0.0

    @property
    def period(self):
        return 2.0 * math.pi / self.omega_s

    @property
    def energy_above_min(self):
        return 0.25 * self.amplitude**2 * self.omega_s**2

    def kappa(self, s):
        return self.kappa0 + self.amplitude * np.cos(self.omega_s * np.asarray(s, dtype=float) + self.phase0)

    def tau(self, s):
        return -0.5 * self.amplitude * self.omega_s * np.sin(self.omega_s * np.asarray(s, dtype=float) + self.phase0)

    def initial_state(self):
        return TauDeltaState(float(self.kappa(0.0)), float(self.tau(0.0)), 0.0)


def continuity_point(c, p):
    if c <= 0:
        raise InvalidInputError(f"c must be positive, got {c}")
    return math.log(c / 4.0) / (1.0 - p)


def small_osc(params, pot, amplitude, phase0=0.0):
    """Harmonic approximation kappa = kappa0 + A cos(omega_s s + phase0)."""
    if params is not None:
        validate(params)
    if pot.p >= 0:
        raise NoInteriorMinimumError(f"no minimum to oscillate about for p = {pot.p}")
    kappa0, _ = potential_min(pot)
    omega_s = math.sqrt(2.0 * potential_curvature_at_min(pot))

    kappa1 = continuity_point(pot.c, pot.p)
    limit = 0.1 * abs(kappa0 - kappa1) if kappa0 != kappa1 else 0.1
    if abs(amplitude) > limit:
        logger.warning("small-oscillation amplitude %g exceeds %g; expect anharmonic error", amplitude, limit)
    return HarmonicModel(kappa0=kappa0, omega_s=omega_s, amplitude=amplitude, phase0=phase0)


def curvature_by_differences(pot, step=1e-3):
    """V''(kappa0) from Richardson-extrapolated central second differences."""
    kappa0, v0 = potential_min(pot)

    def second(h):
        return (potential(kappa0 + h, pot) - 2.0 * v0 + potential(kappa0 - h, pot)) / (h * h)

    return (4.0 * second(step) - second(2.0 * step)) / 3.0


def amplitude_response(pot, amplitudes, periods=3.0, num=3001, substep=1e-3):
    """max|kappa - kappa0| / A of true orbits released at rest from kappa0 + A, one ratio per amplitude."""
    ratios = []
    for amplitude in amplitudes:
        model = small_osc(None, pot, amplitude)
        init = model.initial_state()
        on_shell = PotentialSpec(pot.c, pot.p, math.sqrt(init.energy(pot)))
        series = integrate(init, on_shell, np.linspace(0.0, periods * model.period, num), substep=substep)
        ratios.append(float(np.max(np.abs(series.kappa - model.kappa0))) / abs(amplitude))
    return ratios


def harmonic_background(params, model, t_span):
    slope = derive(validate(params)).s_slope

    def kappa(t):
        value = model.kappa(slope * np.asarray(t))
        return value if np.ndim(t) else float(value)

    def tau(t):
        value = model.tau(slope * np.asarray(t))
        return value if np.ndim(t) else float(value)

    def dkappa(t):
        return 2.0 * slope * np.asarray(tau(t))

    return BackgroundPath(kappa, tau, dkappa, t_span[0], t_span[1], "harmonic")


### Piecewise potential ###
@dataclass(frozen=True)
class PiecewisePotential:
    kappa1: float
    c: float
    p: float

    @classmethod
    def from_potential(cls, pot):
        return cls(kappa1=continuity_point(pot.c, pot.p), c=pot.c, p=pot.p)

    @property
    def v1(self):
        return 4.0 * math.exp(self.kappa1)

    def value(self, kappa):
        kappa = np.asarray(kappa, dtype=float)
        out = np.where(kappa > self.kappa1, 4.0 * np.exp(kappa), self.c * np.exp(self.p * kappa))
        return float(out) if out.ndim == 0 else out

    def omitted(self, kappa):
        """V - V~: the exponential dropped on each side of kappa1."""
        kappa = np.asarray(kappa, dtype=float)
        out = np.where(kappa > self.kappa1, self.c * np.exp(self.p * kappa), 4.0 * np.exp(kappa))
        return float(out) if out.ndim == 0 else out

    def region(self, kappa, tau):
        if kappa > self.kappa1 or (kappa == self.kappa1 and tau > 0):
            return "upper"
        if kappa < self.kappa1 or tau < 0:
            return "lower"
        raise AmbiguousRegionError("state sits on kappa1 with tau = 0; perturb it into one region")


def _exponent(pp, region):
    return (1.0, 4.0) if region == "upper" else (pp.p, pp.c)


def _region_kappa(pp, region, N, s, s_star):
    q, coef = _exponent(pp, region)
    x = q * N * (s - s_star)
    # ln cosh(x) without overflow
    log_cosh = np.abs(x) + np.log1p(np.exp(-2.0 * np.abs(x))) - math.log(2.0)
    return (math.log(N * N / coef) - 2.0 * log_cosh) / q


def _region_tau(pp, region, N, s, s_star):
    q, _ = _exponent(pp, region)
    return -N * np.tanh(q * N * (s - s_star))


@dataclass(frozen=True)
class Segment:
    region: str
    s_start: float
    s_end: float
    s_star: float


@dataclass
class PiecewiseTrajectory:
    series: TauDeltaSeries
    segments: List[Segment] = field(default_factory=list)
    crossings: List[float] = field(default_factory=list)
    tau_jumps: List[float] = field(default_factory=list)
    kappa_jumps: List[float] = field(default_factory=list)


def _half_width(pp, region, N):
    q, _ = _exponent(pp, region)
    return math.acosh(N / math.sqrt(pp.v1)) / (abs(q) * N)


def piecewise_period(pp, N):
    if N * N <= pp.v1:
        raise EnergyBelowBarrierError(f"N^2 = {N * N} does not exceed V(kappa1) = {pp.v1}")
    return 2.0 * math.acosh(N / math.sqrt(pp.v1)) * (1.0 + 1.0 / abs(pp.p)) / N


def piecewise_solve(pp, N, init, s_grid):
    """Evolve under V~ with the exact single-exponential solution in each region.

    ``s_grid`` is increasing and starts at or after ``init.s``.
    """
    if pp.p >= 0 or pp.c <= 0:
        raise InvalidInputError(f"piecewise potential needs p < 0 and c > 0 (p={pp.p}, c={pp.c})")
    s_grid = np.asarray(s_grid, dtype=float)
    if np.any(np.diff(s_grid) <= 0) or s_grid[0] < init.s:
        raise InvalidInputError("s_grid must be increasing and start at or after init.s")
    energy = init.tau**2 + pp.value(init.kappa)
    if abs(energy - N * N) > ON_SHELL_TOL * N * N:
        raise OffShellError(f"initial state has energy {energy}, expected N^2 = {N * N}")
    if N * N <= pp.v1:
        raise EnergyBelowBarrierError(f"N^2 = {N * N} does not exceed V(kappa1) = {pp.v1}")

    region = pp.region(init.kappa, init.tau)
    q, _ = _exponent(pp, region)
    s_star = init.s + math.atanh(max(-1.0, min(1.0, init.tau / N))) / (q * N)
    segments = []
    crossings, tau_jumps, kappa_jumps = [], [], []
    start = init.s
    while True:
        end = s_star + _half_width(pp, region, N)
        segments.append(Segment(region, start, end, s_star))
        if end >= s_grid[-1]:
            break
        nxt = "lower" if region == "upper" else "upper"
        nxt_star = end + _half_width(pp, nxt, N)
        crossings.append(end)
        tau_jumps.append(abs(_region_tau(pp, nxt, N, end, nxt_star) - _region_tau(pp, region, N, end, s_star)))
        kappa_jumps.append(abs(_region_kappa(pp, nxt, N, end, nxt_star) - _region_kappa(pp, region, N, end, s_star)))
        region, s_star, start = nxt, nxt_star, end

    kappa = np.empty_like(s_grid)
    tau = np.empty_like(s_grid)
    for seg in segments:
        mask = (s_grid >= seg.s_start) & (s_grid <= seg.s_end)
        kappa[mask] = _region_kappa(pp, seg.region, N, s_grid[mask], seg.s_star)
        tau[mask] = _region_tau(pp, seg.region, N, s_grid[mask], seg.s_star)
    h = tau**2 + pp.value(kappa)
    logger.debug("piecewise orbit: %d segments, %d crossings", len(segments), len(crossings))
    return PiecewiseTrajectory(
        series=TauDeltaSeries(s_grid.copy(), kappa, tau, np.asarray(h), N, pp.p),
        segments=segments,
        crossings=crossings,
        tau_jumps=tau_jumps,
        kappa_jumps=kappa_jumps,
    )


def approx_error_report(pp, pot, N, s_span, num=2001, substep=1e-3):
    """Compare the piecewise orbit with the true orbit, both launched from kappa0 with tau > 0."""
    kappa0, v0 = potential_min(pot)
    if N * N <= v0:
        raise EnergyBelowBarrierError(f"N^2 = {N * N} does not exceed the potential minimum {v0}")
    s_grid = np.linspace(s_span[0], s_span[1], num)

    true = integrate(TauDeltaState(kappa0, math.sqrt(N * N - v0), s_span[0]), pot, s_grid, substep=substep)
    start = TauDeltaState(kappa0, math.sqrt(N * N - pp.value(kappa0)), s_span[0])
    approx = piecewise_solve(pp, N, start, s_grid).series

    lo = min(true.kappa.min(), approx.kappa.min())
    hi = max(true.kappa.max(), approx.kappa.max())
    visited = np.linspace(lo, hi, 4001)
    gap = np.abs(potential(visited, pot) - pp.value(visited))
    period_true = orbit_period(PotentialSpec(pot.c, pot.p, N))
    period_approx = piecewise_period(pp, N)
    period_rel_error = abs(period_approx - period_true) / period_true
    if period_rel_error > PERIOD_REPORT_LIMIT:
        logger.warning("piecewise period is off by %.1f%% at N = %g", 100.0 * period_rel_error, N)
    return {
        "kappa1": pp.kappa1,
        "max_potential_gap": float(gap.max()),
        "max_kappa_error": float(np.max(np.abs(true.kappa - approx.kappa))),
        "period_true": period_true,
        "period_approx": period_approx,
        "period_rel_error": period_rel_error,
    }


def gap_scan(pp, pot, n_values, s_span, num=2001):
    reports = [approx_error_report(pp, pot, n, s_span, num=num) for n in sorted(n_values)]
    gaps = [r["max_potential_gap"] for r in reports]
    if any(later < earlier for earlier, later in zip(gaps, gaps[1:])):
        logger.warning("potential gap is not monotone in N: %s", gaps)
    return reports
