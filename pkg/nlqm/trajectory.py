"""Expectation-value trajectory <X(t)> of the simple solution and its orbit geometry."""
import logging
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateOrbitWarning, InsufficientDataError, InvalidInputError
from .params import validate

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PositionModel:
    """Constant matrix elements <A|X_i|A>, <B|X_i|B>, <A|X_i|B> for i = 1..3."""

    XAA: np.ndarray
    XBB: np.ndarray
    XAB: np.ndarray
    drift: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        for name, dtype in (("XAA", float), ("XBB", float), ("XAB", complex), ("drift", float)):
            value = np.asarray(getattr(self, name), dtype=dtype)
            if value.shape != (3,):
                raise InvalidInputError(f"{name} must have 3 components")
            object.__setattr__(self, name, value)

    @property
    def XBA(self):
        return self.XAB.conj()

    @classmethod
    def from_operators(cls, operators, A, B):
        A, B = np.asarray(A), np.asarray(B)
        return cls(
            XAA=[np.vdot(A, X @ A).real for X in operators],
            XBB=[np.vdot(B, X @ B).real for X in operators],
            XAB=[np.vdot(A, X @ B) for X in operators],
        )


def seeded_diagonal_operators(dim, seed, scale=1.0):
    """Three real diagonal operators; they commute with H, so their A/B elements are constant."""
    rng = np.random.default_rng(seed)
    return [np.diag(scale * rng.standard_normal(dim)) for _ in range(3)]


@dataclass
class TrajectorySamples:
    t: np.ndarray
    x: np.ndarray
    omega: float
    center: np.ndarray | None = None
    V: np.ndarray | None = None
    W: np.ndarray | None = None

    @property
    def period(self):
        return 2.0 * math.pi / self.omega


def orbit_vectors(pm, mc, params):
    """(X0, V, W) with <X(t)> = X0 + V cos(2 sigma t) + W sin(2 sigma t)."""
    vp = validate(params)
    n = vp.n_norm
    k = abs(complex(vp.a, vp.b) + vp.lam) ** 2 * mc.gamma0**2
    center = (pm.XAA * (1.0 + abs(mc.nu_plus) ** 2 / k) + pm.XBB * (1.0 + abs(mc.nu_minus) ** 2 / k)) / n
    z = pm.XAB * (1.0 + mc.nu_plus.conjugate() * mc.nu_minus / k)
    return center, 2.0 * z.real / n, 2.0 * z.imag / n


def trajectory_simple(pm, mc, params, t_grid):
    center, V, W = orbit_vectors(pm, mc, params)
    t = np.asarray(t_grid, dtype=float)
    omega = 2.0 * mc.sigma
    x = (
        center[None, :]
        + np.cos(omega * t)[:, None] * V[None, :]
        + np.sin(omega * t)[:, None] * W[None, :]
        + t[:, None] * pm.drift[None, :]
    )
    return TrajectorySamples(t=t, x=x, omega=omega, center=center, V=V, W=W)


@dataclass
class EllipseFit:
    center: np.ndarray
    e1: np.ndarray
    e2: np.ndarray
    R1: float
    R2: float
    omega: float
    V: np.ndarray
    W: np.ndarray
    planarity_residual: float
    fit_residual: float
    conic_residual: float
    areal_variation_center: float
    areal_variation_focus: float
    degenerate: bool = False

    @property
    def normal(self):
        return np.cross(self.e1, self.e2)

    @property
    def period(self):
        return 2.0 * math.pi / self.omega

    def to_json(self):
        return {
            "center": self.center.tolist(),
            "e1": self.e1.tolist(),
            "e2": self.e2.tolist(),
            "R1": self.R1,
            "R2": self.R2,
            "omega": self.omega,
            "period": self.period,
            "planarity_residual": self.planarity_residual,
            "fit_residual": self.fit_residual,
            "conic_residual": self.conic_residual,
            "areal_variation_center": self.areal_variation_center,
            "areal_variation_focus": self.areal_variation_focus,
            "degenerate": self.degenerate,
        }


def _relative_spread(values):
    mean = float(np.mean(values))
    return float((np.max(values) - np.min(values)) / mean) if mean > 0 else 0.0


def ellipse_fit(samples, degenerate_tol=1e-9):
    t, x, omega = np.asarray(samples.t), np.asarray(samples.x), samples.omega
    if len(t) < 8:
        raise InsufficientDataError(f"ellipse fit needs at least 8 samples, got {len(t)}")
    if t.max() - t.min() < 0.5 * samples.period:
        raise InsufficientDataError("samples must span at least half a period")

    design = np.column_stack([np.ones_like(t), np.cos(omega * t), np.sin(omega * t)])
    coef, *_ = np.linalg.lstsq(design, x, rcond=None)
    center, V, W = coef
    fit_residual = float(np.max(np.abs(design @ coef - x)))

    # second moments of harmonic motion: (V V^T + W W^T)/2, semi-axis R = sqrt(2 * eigenvalue)
    moments = 0.5 * (np.outer(V, V) + np.outer(W, W))
    evals, evecs = np.linalg.eigh(moments)
    order = np.argsort(evals)[::-1]
    evals, evecs = np.clip(evals[order], 0.0, None), evecs[:, order]
    R1, R2 = math.sqrt(2.0 * evals[0]), math.sqrt(2.0 * evals[1])
    e1, e2 = evecs[:, 0], evecs[:, 1]

    scale = max(R1, 1e-300)
    degenerate = R2 <= degenerate_tol * scale
    if degenerate:
        warnings.warn(
            f"orbit degenerates to a line segment (R2/R1 = {R2 / scale:.3e})", DegenerateOrbitWarning, stacklevel=2
        )

    rel = x - center[None, :]
    normal = np.cross(e1, e2)
    planarity = float(np.max(np.abs(rel @ normal)))
    u, v = rel @ e1, rel @ e2

    du = omega * (-np.sin(omega * t) * (V @ e1) + np.cos(omega * t) * (W @ e1))
    dv = omega * (-np.sin(omega * t) * (V @ e2) + np.cos(omega * t) * (W @ e2))
    areal_center = 0.5 * np.abs(u * dv - v * du)
    if degenerate:
        conic = float("nan")
        areal_focus = areal_center
    else:
        conic = float(np.max(np.abs(u**2 / R1**2 + v**2 / R2**2 - 1.0)))
        focus = math.sqrt(max(R1 * R1 - R2 * R2, 0.0))
        areal_focus = 0.5 * np.abs((u - focus) * dv - v * du)

    fit = EllipseFit(
        center=center,
        e1=e1,
        e2=e2,
        R1=R1,
        R2=R2,
        omega=omega,
        V=V,
        W=W,
        planarity_residual=planarity,
        fit_residual=fit_residual,
        conic_residual=conic,
        areal_variation_center=_relative_spread(areal_center),
        areal_variation_focus=_relative_spread(areal_focus),
        degenerate=degenerate,
    )
    logger.debug("ellipse R1=%.6g R2=%.6g conic residual %.2e", R1, R2, conic)
    return fit


### Free particle ###
@dataclass(frozen=True)
class FreeParticleGrid:
    """Periodic grid with spectral momentum; H = P^2 / 2m."""

    n_points: int = 512
    length: float = 80.0
    mass: float = 1.0

    @property
    def x(self):
        return (np.arange(self.n_points) - self.n_points // 2) * self.dx

    @property
    def dx(self):
        return self.length / self.n_points

    @property
    def momenta(self):
        return 2.0 * math.pi * np.fft.fftfreq(self.n_points, d=self.dx)

    def evolve(self, psi, t):
        phase = np.exp(-0.5j * self.momenta**2 * t / self.mass)
        return np.fft.ifft(phase * np.fft.fft(psi))

    def wavepacket(self, x0, p0, width):
        psi = np.exp(-((self.x - x0) ** 2) / (4.0 * width**2) + 1j * p0 * self.x)
        return psi / math.sqrt(np.sum(np.abs(psi) ** 2) * self.dx)


def free_particle_matrix_element(grid, psi1, psi2, t):
    a, b = grid.evolve(psi1, t), grid.evolve(psi2, t)
    return complex(np.sum(b.conj() * grid.x * a) * grid.dx)
