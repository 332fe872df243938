"""Real-argument Jacobi elliptic functions for any real parameter m.

scipy.special covers 0 <= m <= 1.  Outside that range the values are mapped
back onto it:

  m < 0   negative-parameter transform, mu = -m/(1-m), v = u*sqrt(1-m)
  m > 1   reciprocal-parameter transform, k = 1/m, v = u*sqrt(m)

Only real arithmetic is used, including for the imaginary-argument amplitude
behind :func:`kappa_kernel`.
"""
import logging
import math

import numpy as np
from scipy import special

from .errors import EllipticConsistencyError, EllipticDomainError, InvalidInputError

logger = logging.getLogger(__name__)

CONSISTENCY_TOL = 1e-10


def _check_finite(*values):
    for value in values:
        if not np.all(np.isfinite(value)):
            raise InvalidInputError(f"non-finite argument: {value!r}")


def _out(x):
    x = np.asarray(x)
    return float(x) if x.ndim == 0 else x


def route(m):
    if m < 0:
        return "negative"
    if m > 1:
        return "reciprocal"
    return "direct"


def ellip_k(m):
    _check_finite(m)
    if m >= 1:
        raise EllipticDomainError(f"K(m) diverges for m >= 1 (m={m})")
    return float(special.ellipk(m))


def ellip_f(phi, m):
    _check_finite(phi, m)
    phi = np.asarray(phi, dtype=float)

    if m < 1:
        # F(phi + j*pi) = F(phi) + 2jK
        j = np.floor(phi / math.pi + 0.5)
        r = phi - j * math.pi
        return _out(2.0 * j * special.ellipk(m) + special.ellipkinc(r, m))

    limit = math.pi / 2 if m == 1 else math.asin(1.0 / math.sqrt(m))
    if np.any(np.abs(phi) >= limit):
        raise EllipticDomainError(
            f"m*sin(phi)^2 reaches 1 on [0, phi] for m={m}; |phi| must stay below {limit:.17g}"
        )
    if m == 1:
        return _out(np.arctanh(np.sin(phi)))
    root = math.sqrt(m)
    return _out(special.ellipkinc(np.arcsin(root * np.sin(phi)), 1.0 / m) / root)


def _sncndn_am(u, m):
    u = np.asarray(u, dtype=float)
    if 0 <= m <= 1:
        return special.ellipj(u, m)

    logger.debug("ellipj through the %s route, m=%.17g", route(m), m)
    if m < 0:
        mu = -m / (1.0 - m)
        scale = math.sqrt(1.0 - m)
        sn_v, cn_v, dn_v, ph_v = special.ellipj(u * scale, mu)
        n = np.floor(ph_v / math.pi + 0.5)
        r = ph_v - n * math.pi
        am = n * math.pi + np.arctan2(np.sin(r), scale * np.cos(r))
        return sn_v / (scale * dn_v), cn_v / dn_v, 1.0 / dn_v, am

    root = math.sqrt(m)
    sn_v, cn_v, dn_v, _ = special.ellipj(u * root, 1.0 / m)
    sn = sn_v / root
    # amplitude stays inside (-pi/2, pi/2) here, cn = dn_v > 0
    return sn, dn_v, cn_v, np.arctan2(sn, dn_v)


def jacobi_am(u, m):
    _check_finite(u, m)
    return _out(_sncndn_am(u, m)[3])


def jacobi_sn_cn_dn(u, m):
    """Return (sn, cn, dn) at (u|m).

    dn is d am/du.  For m > 1 this is cn(u*sqrt(m)|1/m) and changes sign over
    a period; for m <= 1 it equals sqrt(1 - m*sn^2).
    """
    _check_finite(u, m)
    sn, cn, dn, _ = _sncndn_am(u, m)
    return _out(sn), _out(cn), _out(dn)


def _kernel_parts(u, m):
    if not m < 0:
        raise EllipticDomainError(f"kappa_kernel needs m < 0, got m={m}")
    m_c = 1.0 - m
    sn_v, cn_v, dn_v, _ = special.ellipj(np.abs(u) * math.sqrt(m_c), 1.0 / m_c)
    return m_c, sn_v, cn_v, dn_v


def kappa_kernel(u, m):
    """Real value of -2i am(iu|m) for m < 0.

    By the imaginary transformation am(iu|m) = i asinh(sc(u|1-m)); sc at the
    parameter 1 - m > 1 goes through the reciprocal route.  The result is odd
    and periodic in u.
    """
    _check_finite(u, m)
    u = np.asarray(u, dtype=float)
    m_c, sn_v, cn_v, dn_v = _kernel_parts(u, m)
    sc = sn_v / (math.sqrt(m_c) * dn_v)
    nc = 1.0 / dn_v

    residual = np.abs(nc * nc - sc * sc - 1.0) / np.maximum(1.0, nc * nc)
    worst = float(np.max(residual))
    if worst > CONSISTENCY_TOL:
        raise EllipticConsistencyError(
            f"imaginary-argument transform left a residual of {worst:.3e} at m={m}"
        )
    return _out(np.sign(u) * 2.0 * np.arcsinh(sc))


def kappa_kernel_derivative(u, m):
    """d/du kappa_kernel(u, m) = 2 cd(u*sqrt(1-m) | 1/(1-m))."""
    _check_finite(u, m)
    u = np.asarray(u, dtype=float)
    _, _, cn_v, dn_v = _kernel_parts(u, m)
    return _out(2.0 * cn_v / dn_v)


def kernel_period(m):
    m_c = 1.0 - m
    if not m < 0:
        raise EllipticDomainError(f"kappa_kernel needs m < 0, got m={m}")
    return 4.0 * ellip_k(1.0 / m_c) / math.sqrt(m_c)
