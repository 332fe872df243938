"""Density matrix rho = (|psi><psi| + |phi><phi|)/N and its equation of motion."""
import logging
from dataclasses import dataclass

import numpy as np

from .errors import InsufficientDataError, InvalidInputError, NonHermitianError
from .params import validate

logger = logging.getLogger(__name__)

HERMITIAN_TOL = 1e-12


@dataclass
class DensityMatrix:
    rho: np.ndarray
    t: float = 0.0

    @property
    def trace(self):
        return complex(np.trace(self.rho))

    @property
    def hermiticity_residual(self):
        return float(np.max(np.abs(self.rho - self.rho.conj().T)))

    def rank(self, threshold=1e-10):
        return int(np.sum(np.linalg.eigvalsh(self.rho) > threshold))


def density(sv, N):
    psi, phi = np.asarray(sv.psi), np.asarray(sv.phi)
    rho = (np.outer(psi, psi.conj()) + np.outer(phi, phi.conj())) / N
    return DensityMatrix(rho=rho, t=sv.t)


def purity(dm):
    # Tr rho^2 for Hermitian rho
    return float(np.sum(np.abs(dm.rho) ** 2))


def purity_predicted(delta, c, p, N):
    """Tr rho^2 = 1 - 2S/N^2 with 4S = c delta^p."""
    return 1.0 - c / (2.0 * N * N) * delta**p


def expectation(dm, X):
    value = np.trace(dm.rho @ np.asarray(X))
    if abs(value.imag) > HERMITIAN_TOL * max(1.0, abs(value.real)):
        raise NonHermitianError(f"Tr(rho X) has imaginary part {value.imag:.3e}; X is not Hermitian")
    return float(value.real)


def rho_rhs(psi, phi, params, energies, tau_zero=False):
    """Right-hand side of i drho/dt.

    With ``tau_zero`` the form valid for <psi|psi> = <phi|phi> = N/2 is used.
    """
    vp = validate(params)
    n = vp.n_norm
    energies = np.asarray(energies, dtype=float)
    psi, phi = np.asarray(psi), np.asarray(phi)
    pp, ff = np.outer(psi, psi.conj()), np.outer(phi, phi.conj())
    fp, pf = np.outer(phi, psi.conj()), np.outer(psi, phi.conj())
    gamma = np.vdot(phi, psi)

    rho = (pp + ff) / n
    commutator = (energies[:, None] - energies[None, :]) * rho
    cross = 2.0 * vp.lam * (gamma * fp - gamma.conjugate() * pf) / n
    if tau_zero:
        return commutator + 1j * vp.mu * (pp - ff) + cross
    p_norm, q_norm = np.vdot(psi, psi).real, np.vdot(phi, phi).real
    return commutator + 2j * vp.mu * (q_norm * pp - p_norm * ff) / n + cross


def rho_dot_residual(sv_series, params, H_diag, tau_zero=False):
    """Central-difference audit of the rho equation; one max-abs residual per interior time."""
    if len(sv_series) < 3:
        raise InsufficientDataError(f"need at least 3 samples, got {len(sv_series)}")
    vp = validate(params)
    times = np.array([sv.t for sv in sv_series], dtype=float)
    steps = np.diff(times)
    h = steps[0]
    if h <= 0 or np.max(np.abs(steps - h)) > 1e-9 * abs(h):
        raise InvalidInputError("state series must be uniformly spaced in t")

    rhos = [density(sv, vp.n_norm).rho for sv in sv_series]
    residuals = np.empty(len(sv_series) - 2)
    for i in range(1, len(sv_series) - 1):
        i_rho_dot = 1j * (rhos[i + 1] - rhos[i - 1]) / (2.0 * h)
        rhs = rho_rhs(sv_series[i].psi, sv_series[i].phi, vp, H_diag, tau_zero=tau_zero)
        residuals[i - 1] = np.max(np.abs(i_rho_dot - rhs))
    logger.debug("rho audit over %d samples, max residual %.3e", len(sv_series), residuals.max())
    return residuals
