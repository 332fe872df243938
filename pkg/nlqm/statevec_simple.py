"""Exact state vectors at the fixed point of the reduced dynamics (tau = 0, delta = delta0)."""
import logging
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    BasisTooSmallError,
    DegenerateFrequencyError,
    InconsistencyError,
    InvalidInputError,
    RegimeError,
)
from .params import derive, validate

logger = logging.getLogger(__name__)

IDENTITY_TOL = 1e-12


@dataclass(frozen=True)
class EnergyBasis:
    energies: np.ndarray

    def __post_init__(self):
        energies = np.asarray(self.energies, dtype=float)
        if energies.ndim != 1:
            raise InvalidInputError("energies must be a flat list")
        if not np.all(np.isfinite(energies)):
            raise InvalidInputError("energies must be finite")
        if len(energies) < 2:
            raise BasisTooSmallError(f"need at least 2 basis states, got {len(energies)}")
        object.__setattr__(self, "energies", energies)

    @property
    def dim(self):
        return len(self.energies)

    def phases(self, t):
        return np.exp(-1j * self.energies * t)


@dataclass(frozen=True)
class FixedPointData:
    kappa0: float
    delta0: float
    c: float
    gamma0: float


@dataclass(frozen=True)
class ModalConstants:
    nu_plus: complex
    nu_minus: complex
    sigma: float
    chi_plus: float
    chi_minus: float
    s_plus: float
    s_minus: float
    theta: float
    theta_prime: complex
    gamma0: float
    coupling: complex
    real_part_residual: float
    imag_part_residual: float
    phi_norm_residual: float
    s_diff_alt_residual: float | None
    positivity_margin: float


@dataclass
class StateVectorPair:
    psi: np.ndarray
    phi: np.ndarray
    t: float = 0.0

    @property
    def psi_norm(self):
        return float(np.vdot(self.psi, self.psi).real)

    @property
    def phi_norm(self):
        return float(np.vdot(self.phi, self.phi).real)

    @property
    def gamma(self):
        return complex(np.vdot(self.phi, self.psi))

    @property
    def tau(self):
        return self.psi_norm - self.phi_norm

    @property
    def delta(self):
        return abs(self.gamma) ** 2

    @property
    def schwarz(self):
        return self.psi_norm * self.phi_norm - self.delta

    def to_json(self):
        return {
            "t": float(self.t),
            "psi": [[float(z.real), float(z.imag)] for z in self.psi],
            "phi": [[float(z.real), float(z.imag)] for z in self.phi],
        }


def fixed_point(params):
    vp = validate(params)
    if not vp.bounded:
        raise RegimeError(f"fixed point needs b > 0 and -b < mu < 0 (b={vp.b}, mu={vp.mu})")
    p = derive(vp).p
    delta0 = -vp.mu * vp.n_squared / (4.0 * vp.b)
    c = -(4.0 / p) * delta0 ** (1.0 - p)
    return FixedPointData(kappa0=math.log(delta0), delta0=delta0, c=c, gamma0=math.sqrt(delta0))


def sigma_squared(params):
    a, b, mu, lam = params.a, params.b, params.mu, params.lam
    return params.n_squared / 4.0 * (-(mu / b) * a * a - mu * (mu + b) + lam * lam * (1.0 + mu / b))


def modal_constants(params, fp):
    vp = validate(params)
    if not vp.bounded:
        raise RegimeError(f"modal constants need b > 0 and -b < mu < 0 (b={vp.b}, mu={vp.mu})")
    a, b, mu, lam, n = vp.a, vp.b, vp.mu, vp.lam, vp.n_norm
    dp = derive(vp)

    sigma2 = sigma_squared(vp)
    if sigma2 <= 0:
        raise DegenerateFrequencyError(f"sigma^2 = {sigma2:.6g} <= 0; the two modes coincide")
    sigma = math.sqrt(sigma2)

    coupling = (dp.g + lam) * (dp.g.conjugate() - lam)
    disc = -(dp.theta_prime**2) - 4.0 * coupling * fp.delta0
    scale = n * n * (a * a + b * b + lam * lam + mu * mu + abs(mu * b))
    if abs(disc + 4.0 * sigma2) > IDENTITY_TOL * max(1.0, scale):
        raise InconsistencyError(f"quadratic discriminant {disc} disagrees with -4 sigma^2 = {-4.0 * sigma2}")
    nu_plus = 0.5 * (-1j * dp.theta_prime + 2j * sigma)
    nu_minus = 0.5 * (-1j * dp.theta_prime - 2j * sigma)

    half = 0.5 * n
    s_diff = n * n / (4.0 * sigma) * (lam * (1.0 + mu / b) + a * mu / b)
    s_plus, s_minus = 0.5 * (half + s_diff), 0.5 * (half - s_diff)

    # <phi|psi> at t=0 must equal gamma0; <phi|phi> must equal N/2
    overlap = (
        nu_plus.conjugate() * s_plus
        + nu_minus.conjugate() * s_minus
        - 1j * (dp.g.conjugate() + lam) * fp.delta0
    )
    phi_norm = abs(nu_plus) ** 2 * s_plus + abs(nu_minus) ** 2 * s_minus - half * abs(dp.g + lam) ** 2 * fp.delta0
    norm_scale = max(1.0, scale)
    real_part_residual = abs(overlap.real) / norm_scale
    imag_part_residual = abs(overlap.imag) / norm_scale
    phi_norm_residual = abs(phi_norm) / (n * norm_scale)

    s_diff_alt_residual = None
    if lam != 0:
        terms = (
            0.5 * n * n * (mu * mu + lam * lam),
            2.0 * sigma2,
            0.5 * n * n * (mu / b) * (a * a + b * b + 2.0 * lam * a + lam * lam),
        )
        alt = sum(terms) / (4.0 * lam * sigma)
        alt_scale = sum(abs(x) for x in terms) / (4.0 * abs(lam) * sigma)
        s_diff_alt_residual = abs(alt - s_diff)
        if s_diff_alt_residual > IDENTITY_TOL * max(1.0, alt_scale):
            raise InconsistencyError(f"S+ - S- expressions disagree: {s_diff} vs {alt}")

    margin = -(mu / b) * (1.0 + mu / b) * (a + lam) ** 2 - mu * (mu + b)
    if margin <= 0 or s_plus <= 0 or s_minus <= 0:
        raise InconsistencyError(f"S+ = {s_plus}, S- = {s_minus} (positivity margin {margin})")

    logger.debug("sigma=%.17g S+=%.17g S-=%.17g", sigma, s_plus, s_minus)
    return ModalConstants(
        nu_plus=complex(nu_plus),
        nu_minus=complex(nu_minus),
        sigma=sigma,
        chi_plus=-lam * half + sigma,
        chi_minus=-lam * half - sigma,
        s_plus=s_plus,
        s_minus=s_minus,
        theta=dp.theta,
        theta_prime=dp.theta_prime,
        gamma0=fp.gamma0,
        coupling=coupling,
        real_part_residual=real_part_residual,
        imag_part_residual=imag_part_residual,
        phi_norm_residual=phi_norm_residual,
        s_diff_alt_residual=s_diff_alt_residual,
        positivity_margin=margin,
    )


def build_AB(mc, basis, seed):
    """Seeded orthogonal pair with <A|A> = S+ and <B|B> = S-."""
    if basis.dim < 2:
        raise BasisTooSmallError(f"need at least 2 basis states, got {basis.dim}")
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((basis.dim, 2)) + 1j * rng.standard_normal((basis.dim, 2))
    q, _ = np.linalg.qr(z)
    return math.sqrt(mc.s_plus) * q[:, 0], math.sqrt(mc.s_minus) * q[:, 1]


def validate_AB(A, B, mc, tol=1e-10):
    A, B = np.asarray(A, dtype=complex), np.asarray(B, dtype=complex)
    if A.shape != B.shape or A.ndim != 1:
        raise InvalidInputError("A and B must be vectors of equal length")
    if len(A) < 2:
        raise BasisTooSmallError(f"need at least 2 basis states, got {len(A)}")
    overlap = abs(np.vdot(A, B))
    norm_a, norm_b = np.vdot(A, A).real, np.vdot(B, B).real
    if overlap > tol:
        raise InvalidInputError(f"<A|B> = {overlap:.3e} is not zero")
    if abs(norm_a - mc.s_plus) > tol or abs(norm_b - mc.s_minus) > tol:
        raise InvalidInputError(f"norms ({norm_a}, {norm_b}) do not match S+- = ({mc.s_plus}, {mc.s_minus})")
    return A, B


def gamma_simple(mc, t, phase=0.0):
    return mc.gamma0 * np.exp(1j * (phase - mc.theta * np.asarray(t, dtype=float)))


def evolve_simple(A, B, mc, params, basis, t, phase=0.0):
    vp = validate(params)
    n = vp.n_norm
    alpha, beta = vp.alpha1 + vp.alpha2, vp.beta1 + vp.beta2
    a_t = basis.phases(t) * A
    b_t = basis.phases(t) * B
    up, down = np.exp(1j * mc.sigma * t), np.exp(-1j * mc.sigma * t)

    psi = np.exp(-0.5j * n * (alpha + vp.lam) * t) * (up * a_t + down * b_t)
    prefactor = 1j / (complex(vp.a, vp.b) + vp.lam) / (mc.gamma0 * np.exp(1j * phase))
    phi = prefactor * np.exp(-0.5j * n * (beta - vp.lam) * t) * (mc.nu_plus * up * a_t + mc.nu_minus * down * b_t)
    return StateVectorPair(psi=psi, phi=phi, t=float(t))


@dataclass
class SimpleSolution:
    params: object
    basis: EnergyBasis
    fixed: FixedPointData
    modes: ModalConstants
    A: np.ndarray
    B: np.ndarray
    phase: float = 0.0

    def state(self, t):
        return evolve_simple(self.A, self.B, self.modes, self.params, self.basis, t, self.phase)

    def gamma(self, t):
        return gamma_simple(self.modes, t, self.phase)


def solve_simple(params, energies, seed=0, phase=0.0):
    vp = validate(params)
    basis = energies if isinstance(energies, EnergyBasis) else EnergyBasis(np.asarray(energies, dtype=float))
    fp = fixed_point(vp)
    mc = modal_constants(vp, fp)
    A, B = build_AB(mc, basis, seed)
    return SimpleSolution(vp, basis, fp, mc, A, B, phase)
