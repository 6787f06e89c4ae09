"""Pseudo-hyperbolic geometry of the open unit disk.

Provides the Mobius involution sigma_lam, the pseudo-hyperbolic distance
rho, the two-point ratio tau whose modulus is 1 - rho**2, and the
principal-branch power tau**alpha.  Every function accepts complex
scalars, ``DiskPoint`` wrappers, or numpy arrays of points and is pure,
so all of them are safe to call from parallel grid sweeps.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInputError, DiskDomainError

# Points must stay strictly inside the disk by at least this margin.
DISK_MARGIN = 1e-12

# Below this pseudo-hyperbolic separation, ratios with a rho denominator
# are refused rather than extrapolated.
RHO_DEGENERATE = 1e-14


@dataclass(frozen=True)
class DiskPoint:
    """A point of the open unit disk, validated on construction."""

    value: complex

    def __post_init__(self):
        v = complex(self.value)
        if abs(v) > 1.0 - DISK_MARGIN:
            raise DiskDomainError(f"|z| = {abs(v)!r} is not inside the unit disk")
        object.__setattr__(self, "value", v)

    def __complex__(self) -> complex:
        return self.value


def unwrap(z):
    """Return the raw complex value(s) behind ``z`` without validation."""
    if isinstance(z, DiskPoint):
        return z.value
    if isinstance(z, np.ndarray):
        return z
    return complex(z)


def ensure_in_disk(z, name: str = "z"):
    """Unwrap ``z`` and raise :class:`DiskDomainError` unless |z| < 1 - margin."""
    v = unwrap(z)
    m = np.max(np.abs(v)) if isinstance(v, np.ndarray) else abs(v)
    if m > 1.0 - DISK_MARGIN:
        raise DiskDomainError(f"|{name}| = {m!r} is not inside the unit disk")
    return v


def mobius_sigma(lam, z):
    """Disk automorphism sigma_lam(z) = (lam - z) / (1 - conj(lam) z).

    Swaps 0 and lam; an involution of the disk.
    """
    lv = ensure_in_disk(lam, "lambda")
    zv = ensure_in_disk(z, "z")
    return (lv - zv) / (1.0 - np.conj(lv) * zv)


def pseudo_hyperbolic(z, w):
    """Pseudo-hyperbolic distance rho(z, w) = |(w - z) / (1 - conj(w) z)|.

    Computed as |sigma_w(z)| and checked against |sigma_z(w)|; the two
    agree in exact arithmetic, so any gap flags an arithmetic regression.
    """
    zv = ensure_in_disk(z, "z")
    wv = ensure_in_disk(w, "w")
    fwd = np.abs((wv - zv) / (1.0 - np.conj(wv) * zv))
    bwd = np.abs((zv - wv) / (1.0 - np.conj(zv) * wv))
    gap = np.max(np.abs(fwd - bwd))
    if gap > 1e-12:
        raise ArithmeticError(f"pseudo-hyperbolic symmetry violated by {gap!r}")
    return fwd


def tau(p, q):
    """Two-point ratio (1-|p|^2)(1-|q|^2) / (1 - conj(p) q)^2.

    Its modulus equals 1 - rho(p, q)**2.
    """
    pv = ensure_in_disk(p, "p")
    qv = ensure_in_disk(q, "q")
    den = 1.0 - np.conj(pv) * qv
    return (1.0 - np.abs(pv) ** 2) * (1.0 - np.abs(qv) ** 2) / (den * den)


def tau_pow(p, q, alpha: float):
    """Principal-branch power tau(p, q)**alpha for alpha > 0.

    Evaluates exp(alpha*(log(1-|p|^2) + log(1-|q|^2)) - 2*alpha*Log(1 - conj(p) q)),
    well defined because Re(1 - conj(p) q) > 0 keeps the complex Log on its
    principal sheet.
    """
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    pv = ensure_in_disk(p, "p")
    qv = ensure_in_disk(q, "q")
    log_re = np.log1p(-np.abs(pv) ** 2) + np.log1p(-np.abs(qv) ** 2)
    return np.exp(alpha * log_re - 2.0 * alpha * np.log(1.0 - np.conj(pv) * qv))


def remark21_ratio(p, q, alpha: float):
    """Ratio |1 - tau(p, q)**alpha| / rho(p, q).

    Bounded over the disk for each fixed alpha; the constant is recorded
    empirically, not asserted.  Refuses nearly coincident points.
    """
    rho = pseudo_hyperbolic(p, q)
    if np.min(rho) < RHO_DEGENERATE:
        raise DegenerateInputError(
            f"rho(p, q) = {np.min(rho)!r} too small for a stable ratio"
        )
    return np.abs(1.0 - tau_pow(p, q, alpha)) / rho
