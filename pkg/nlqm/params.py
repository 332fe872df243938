"""Model parameters, regime flags, derived constants and the model's equations of motion.

The state is the pair (|psi>, |phi>) on a finite energy basis.  It evolves under

    i d|Psi>/dt = (H + M) |Psi>,   M = M0 + M'

where every entry of M is linear in the inner products <psi|psi>, <phi|psi>,
<psi|phi> and <phi|phi>.  The couplings are g = a + ib, mu, lambda and
alpha1, alpha2, beta1, beta2; N = <psi|psi> + <phi|phi> is conserved.
"""
import logging
import math
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from .errors import InvalidInputError, InvalidNormError, UnsupportedReparameterizationError

logger = logging.getLogger(__name__)

# JSON key -> attribute name
_JSON_KEYS = {
    "a": "a",
    "b": "b",
    "mu": "mu",
    "lambda": "lam",
    "alpha1": "alpha1",
    "alpha2": "alpha2",
    "beta1": "beta1",
    "beta2": "beta2",
    "N": "n_norm",
}


@dataclass(frozen=True)
class ModelParams:
    a: float = 0.0
    b: float = 0.0
    mu: float = 0.0
    lam: float = 0.0
    alpha1: float = 0.0
    alpha2: float = 0.0
    beta1: float = 0.0
    beta2: float = 0.0
    n_norm: float = 1.0

    @classmethod
    def from_mapping(cls, data):
        unknown = set(data) - set(_JSON_KEYS)
        if unknown:
            raise InvalidInputError(f"unknown parameter keys: {sorted(unknown)}")
        return cls(**{_JSON_KEYS[key]: float(value) for key, value in data.items()})

    def to_mapping(self):
        return {key: getattr(self, attr) for key, attr in _JSON_KEYS.items()}

    def replace(self, **changes):
        values = {f.name: getattr(self, f.name) for f in fields(ModelParams)}
        values.update(changes)
        return ModelParams(**values)

    @property
    def n_squared(self):
        return self.n_norm * self.n_norm


@dataclass(frozen=True)
class ValidatedParams(ModelParams):
    bounded: bool = False
    original_model: bool = False
    case2: bool = False

    @property
    def raw(self):
        return ModelParams(**{f.name: getattr(self, f.name) for f in fields(ModelParams)})


def _is_case2(b, mu):
    return math.isclose(b + mu, 0.0, abs_tol=1e-15 * max(1.0, abs(b), abs(mu)))


def validate(raw):
    """Check a parameter set and annotate it with its regime flags."""
    values = asdict(raw) if isinstance(raw, ModelParams) else dict(raw)
    for name in (f.name for f in fields(ModelParams)):
        value = values.get(name)
        if value is None or not math.isfinite(value):
            raise InvalidInputError(f"parameter {name!r} must be a finite real, got {value!r}")
    if values["n_norm"] <= 0:
        raise InvalidNormError(f"N must be positive, got {values['n_norm']}")

    b, mu = values["b"], values["mu"]
    if b <= 0:
        logger.warning("b = %g <= 0 lies outside the analyzed range (b > 0); flags only", b)
    base = {f.name: values[f.name] for f in fields(ModelParams)}
    return ValidatedParams(
        **base,
        bounded=bool(b > 0 and -b < mu < 0),
        original_model=(mu == 0.0),
        case2=_is_case2(b, mu),
    )


@dataclass(frozen=True)
class DerivedParams:
    g: complex
    p: float
    s_slope: float
    alpha: float
    beta: float
    alpha_p: float
    beta_p: float
    theta: float
    theta_prime: complex
    q: complex
    q_prime: complex
    n_norm: float = field(default=1.0)

    def s_of_t(self, t):
        return self.s_slope * t

    def t_of_s(self, s):
        return s / self.s_slope


def derive(params):
    vp = params if isinstance(params, ValidatedParams) else validate(params)
    if vp.case2:
        raise UnsupportedReparameterizationError(
            "b + mu = 0: the s-parameterization s = -(b+mu)t is undefined (use closed_case2)"
        )
    n = vp.n_norm
    alpha = vp.alpha1 + vp.alpha2
    beta = vp.beta1 + vp.beta2
    return DerivedParams(
        g=complex(vp.a, vp.b),
        p=vp.mu / (vp.b + vp.mu),
        s_slope=-(vp.b + vp.mu),
        alpha=alpha,
        beta=beta,
        alpha_p=vp.alpha1 - vp.alpha2,
        beta_p=vp.beta1 - vp.beta2,
        theta=0.5 * n * (2.0 * vp.lam + alpha - beta),
        theta_prime=n * complex(vp.lam, -vp.mu),
        q=0.5 * n * complex(alpha, vp.mu),
        q_prime=0.5 * n * complex(beta, -vp.mu),
        n_norm=n,
    )


def coupling_matrix(params, psi, phi):
    """The 2x2 matrix M = M0 + M' evaluated on the current inner products."""
    pp = np.vdot(psi, psi).real
    ff = np.vdot(phi, phi).real
    gamma = np.vdot(phi, psi)
    g = complex(params.a, params.b)
    return np.array(
        [
            [params.alpha1 * pp + params.alpha2 * ff + 1j * params.mu * ff, (g + params.lam) * gamma],
            [(g.conjugate() - params.lam) * gamma.conjugate(), params.beta1 * pp + params.beta2 * ff - 1j * params.mu * pp],
        ]
    )


def equations_of_motion(params, energies, psi, phi):
    """Return (d psi/dt, d phi/dt) for coefficient vectors in the energy eigenbasis."""
    energies = np.asarray(energies, dtype=float)
    m = coupling_matrix(params, psi, phi)
    dpsi = -1j * (energies * psi + m[0, 0] * psi + m[0, 1] * phi)
    dphi = -1j * (energies * phi + m[1, 0] * psi + m[1, 1] * phi)
    return dpsi, dphi


def tau_delta_rhs(params, tau, delta):
    """Right-hand side of the closed tau-delta system (d tau/dt, d delta/dt)."""
    dtau = params.mu * (params.n_squared - tau * tau) + 4.0 * params.b * delta
    ddelta = -2.0 * (params.b + params.mu) * tau * delta
    return dtau, ddelta
