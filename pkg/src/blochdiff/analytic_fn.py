"""Closed expression trees for analytic functions on the unit disk.

Every node knows its exact analytic derivative, so weighted-derivative
suprema never rely on numerical differentiation.  Trees are immutable
after construction and evaluate elementwise on numpy arrays as well as
on complex scalars.  The module also hosts the generalized binomial
coefficient series for (1 - conj(a) u)**(-2*alpha), with a certified
tail bound, and the sampled self-map validator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .errors import DiskDomainError, SelfMapValidationError, TruncationInsufficient

ComplexLike = Union[complex, np.ndarray]

# Golden-ratio fraction used to stagger angular samples between rings.
_GOLDEN = 0.6180339887498949


class SymbolExpr:
    """Base class for expression-tree nodes.

    Subclasses implement ``eval`` and ``deriv``; both accept a complex
    scalar or ndarray with |z| < 1 and return the same shape.
    """

    def eval(self, z: ComplexLike) -> ComplexLike:
        raise NotImplementedError

    def deriv(self, z: ComplexLike) -> ComplexLike:
        raise NotImplementedError


@dataclass(frozen=True)
class Constant(SymbolExpr):
    c: complex

    def eval(self, z):
        return self.c * np.ones_like(np.asarray(z)) if isinstance(z, np.ndarray) else self.c

    def deriv(self, z):
        return np.zeros_like(np.asarray(z)) if isinstance(z, np.ndarray) else 0.0


@dataclass(frozen=True)
class Identity(SymbolExpr):
    def eval(self, z):
        return z

    def deriv(self, z):
        return np.ones_like(np.asarray(z)) if isinstance(z, np.ndarray) else 1.0


@dataclass(frozen=True)
class Monomial(SymbolExpr):
    """z**n for integer n >= 1."""

    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("monomial exponent must be >= 1")

    def eval(self, z):
        return pow_int(z, self.n)

    def deriv(self, z):
        return self.n * pow_int(z, self.n - 1)


@dataclass(frozen=True)
class Scale(SymbolExpr):
    """c * inner(z) with a complex coefficient."""

    c: complex
    inner: SymbolExpr

    def eval(self, z):
        return self.c * self.inner.eval(z)

    def deriv(self, z):
        return self.c * self.inner.deriv(z)


@dataclass(frozen=True)
class Sum(SymbolExpr):
    terms: tuple

    def __post_init__(self):
        if not self.terms:
            raise ValueError("sum needs at least one term")
        object.__setattr__(self, "terms", tuple(self.terms))

    def eval(self, z):
        acc = self.terms[0].eval(z)
        for t in self.terms[1:]:
            acc = acc + t.eval(z)
        return acc

    def deriv(self, z):
        acc = self.terms[0].deriv(z)
        for t in self.terms[1:]:
            acc = acc + t.deriv(z)
        return acc


@dataclass(frozen=True)
class Product(SymbolExpr):
    factors: tuple

    def __post_init__(self):
        if not self.factors:
            raise ValueError("product needs at least one factor")
        object.__setattr__(self, "factors", tuple(self.factors))

    def eval(self, z):
        acc = self.factors[0].eval(z)
        for f in self.factors[1:]:
            acc = acc * f.eval(z)
        return acc

    def deriv(self, z):
        vals = [f.eval(z) for f in self.factors]
        ders = [f.deriv(z) for f in self.factors]
        total = None
        for i in range(len(self.factors)):
            term = ders[i]
            for j, v in enumerate(vals):
                if j != i:
                    term = term * v
            total = term if total is None else total + term
        return total


@dataclass(frozen=True)
class Power(SymbolExpr):
    """base(z)**n for integer n >= 1."""

    base: SymbolExpr
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("power exponent must be >= 1")

    def eval(self, z):
        return pow_int(self.base.eval(z), self.n)

    def deriv(self, z):
        return self.n * pow_int(self.base.eval(z), self.n - 1) * self.base.deriv(z)


@dataclass(frozen=True)
class Compose(SymbolExpr):
    """outer(inner(z)); inner must map the disk into the outer's domain."""

    outer: SymbolExpr
    inner: SymbolExpr

    def eval(self, z):
        return self.outer.eval(self.inner.eval(z))

    def deriv(self, z):
        w = self.inner.eval(z)
        return self.outer.deriv(w) * self.inner.deriv(z)


@dataclass(frozen=True)
class Mobius(SymbolExpr):
    """sigma_lam(z) = (lam - z) / (1 - conj(lam) z), |lam| < 1."""

    lam: complex

    def __post_init__(self):
        if abs(self.lam) >= 1.0:
            raise DiskDomainError("mobius parameter must lie inside the disk")

    def eval(self, z):
        return (self.lam - z) / (1.0 - np.conj(self.lam) * z)

    def deriv(self, z):
        den = 1.0 - np.conj(self.lam) * z
        return (abs(self.lam) ** 2 - 1.0) / (den * den)


@dataclass(frozen=True)
class Blaschke(SymbolExpr):
    """Finite Blaschke product of Mobius factors at the given zeros."""

    zeros: tuple

    def __post_init__(self):
        zs = tuple(complex(a) for a in self.zeros)
        if not zs:
            raise ValueError("blaschke product needs at least one zero")
        if any(abs(a) >= 1.0 for a in zs):
            raise DiskDomainError("blaschke zeros must lie inside the disk")
        object.__setattr__(self, "zeros", zs)
        object.__setattr__(self, "_factors", tuple(Mobius(a) for a in zs))

    def eval(self, z):
        acc = self._factors[0].eval(z)
        for f in self._factors[1:]:
            acc = acc * f.eval(z)
        return acc

    def deriv(self, z):
        vals = [f.eval(z) for f in self._factors]
        ders = [f.deriv(z) for f in self._factors]
        total = None
        for i in range(len(vals)):
            term = ders[i]
            for j, v in enumerate(vals):
                if j != i:
                    term = term * v
            total = term if total is None else total + term
        return total


def pow_int(w, n: int):
    """w**n for integer n >= 0 by binary exponentiation (elementwise)."""
    if n < 0:
        raise ValueError("negative exponents are not supported")
    if n == 0:
        return np.ones_like(np.asarray(w)) if isinstance(w, np.ndarray) else 1.0 + 0.0j
    result = None
    base = w
    while n:
        if n & 1:
            result = base if result is None else result * base
        n >>= 1
        if n:
            base = base * base
    return result


# ---------------------------------------------------------------------------
# serialization (tagged nested records, complex numbers as [re, im])
# ---------------------------------------------------------------------------


def _pair(c: complex) -> list:
    c = complex(c)
    return [c.real, c.imag]


def _from_pair(p) -> complex:
    if isinstance(p, (int, float)):
        return complex(p)
    if len(p) != 2:
        raise ValueError(f"expected [re, im] pair, got {p!r}")
    return complex(float(p[0]), float(p[1]))


def expr_to_dict(f: SymbolExpr) -> dict:
    if isinstance(f, Constant):
        return {"type": "constant", "c": _pair(f.c)}
    if isinstance(f, Identity):
        return {"type": "identity"}
    if isinstance(f, Monomial):
        return {"type": "monomial", "n": f.n}
    if isinstance(f, Scale):
        return {"type": "scale", "c": _pair(f.c), "inner": expr_to_dict(f.inner)}
    if isinstance(f, Sum):
        return {"type": "sum", "terms": [expr_to_dict(t) for t in f.terms]}
    if isinstance(f, Product):
        return {"type": "product", "factors": [expr_to_dict(t) for t in f.factors]}
    if isinstance(f, Power):
        return {"type": "power", "base": expr_to_dict(f.base), "n": f.n}
    if isinstance(f, Compose):
        return {"type": "compose", "outer": expr_to_dict(f.outer), "inner": expr_to_dict(f.inner)}
    if isinstance(f, Mobius):
        return {"type": "mobius", "lambda": _pair(f.lam)}
    if isinstance(f, Blaschke):
        return {"type": "blaschke", "zeros": [_pair(a) for a in f.zeros]}
    raise TypeError(f"unknown expression node {type(f).__name__}")


def expr_from_dict(d: dict) -> SymbolExpr:
    if not isinstance(d, dict) or "type" not in d:
        raise ValueError(f"expression record must be a dict with a 'type' tag: {d!r}")
    t = d["type"]
    if t == "constant":
        return Constant(_from_pair(d["c"]))
    if t == "identity":
        return Identity()
    if t == "monomial":
        return Monomial(int(d["n"]))
    if t == "scale":
        return Scale(_from_pair(d["c"]), expr_from_dict(d["inner"]))
    if t == "sum":
        return Sum(tuple(expr_from_dict(x) for x in d["terms"]))
    if t == "product":
        return Product(tuple(expr_from_dict(x) for x in d["factors"]))
    if t == "power":
        return Power(expr_from_dict(d["base"]), int(d["n"]))
    if t == "compose":
        return Compose(expr_from_dict(d["outer"]), expr_from_dict(d["inner"]))
    if t == "mobius":
        return Mobius(_from_pair(d["lambda"]))
    if t == "blaschke":
        return Blaschke(tuple(_from_pair(a) for a in d["zeros"]))
    raise ValueError(f"unknown expression type tag {t!r}")


# ---------------------------------------------------------------------------
# self-map validation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SelfMapVerdict:
    """Outcome of sampled self-map validation."""

    is_self_map: bool
    sup_estimate: float
    witness: complex | None = None

    def __bool__(self) -> bool:
        return self.is_self_map


def validate_self_map(phi: SymbolExpr, margin: float = 0.4,
                      boundary_samples: int = 256) -> SelfMapVerdict:
    """Estimate sup |phi| by sampling circles |z| = 1 - margin * 2**-j, j = 0..8.

    Sound in the sampling limit by the maximum-modulus principle: the sup
    of |phi| over the disk is approached along circles shrinking to the
    boundary.  Returns a verdict rather than raising; the estimate is a
    lower bound of the true sup.
    """
    if not 0.0 < margin < 1.0:
        raise ValueError("margin must lie in (0, 1)")
    if boundary_samples < 64:
        raise ValueError("boundary_samples must be at least 64")
    sup = 0.0
    witness = None
    for j in range(9):
        r = 1.0 - margin * 2.0 ** (-j)
        theta = 2.0 * np.pi * (np.arange(boundary_samples) + (j * _GOLDEN) % 1.0) / boundary_samples
        pts = r * np.exp(1j * theta)
        mags = np.abs(np.asarray(phi.eval(pts)))
        k = int(np.argmax(mags))
        if mags[k] > sup:
            sup = float(mags[k])
            if sup > 1.0 - 1e-9:
                witness = complex(pts[k])
                return SelfMapVerdict(False, sup, witness)
    return SelfMapVerdict(True, sup, None)


def require_self_map(phi: SymbolExpr, name: str = "phi", **kwargs) -> None:
    verdict = validate_self_map(phi, **kwargs)
    if not verdict:
        raise SelfMapValidationError(
            f"{name} is not a self-map: |{name}({verdict.witness!r})| "
            f">= {verdict.sup_estimate!r}"
        )


# ---------------------------------------------------------------------------
# generalized binomial series for (1 - conj(a) u)**(-2*alpha)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SeriesCoeffs:
    """Truncated coefficient series of (1 - conj(a) u)**(-2*alpha).

    coeffs[k] = gamma(k + 2*alpha) / (k! * gamma(2*alpha)) * conj(a)**k,
    built by the ratio recurrence c_{k+1} = c_k * (k + 2*alpha) / (k + 1)
    * conj(a) so no gamma value ever overflows.  ``tail_bound`` dominates
    the truncation error of the series for every |u| <= eval_radius.
    """

    a: complex
    alpha: float
    order: int
    eval_radius: float
    coeffs: np.ndarray = field(repr=False)
    tail_bound: float

    def partial_sum(self, u: ComplexLike) -> ComplexLike:
        """Evaluate the truncated series at u (|u| <= eval_radius)."""
        acc = np.zeros_like(np.asarray(u, dtype=complex))
        for c in self.coeffs[::-1]:
            acc = acc * u + c
        return acc if isinstance(u, np.ndarray) else complex(acc)


def binom_series(a, alpha: float, order: int, eval_radius: float) -> SeriesCoeffs:
    """Coefficients c_0..c_order of (1 - conj(a) u)**(-2*alpha) with tail bound.

    The geometric tail argument needs the term ratio cap
    q = |a| * eval_radius * max(1, (order + 1 + 2*alpha) / (order + 2)) < 1;
    otherwise the order is insufficient and :class:`TruncationInsufficient`
    is raised.  (The max with 1 keeps the cap valid for alpha < 1/2, where
    the raw ratio factor dips below 1 but climbs back toward it.)
    """
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    if order < 1:
        raise ValueError("order must be >= 1")
    if not 0.0 <= eval_radius < 1.0:
        raise ValueError("eval_radius must lie in [0, 1)")
    a = complex(a)
    abar = np.conj(a)
    k = np.arange(order)
    ratios = (k + 2.0 * alpha) / (k + 1.0) * abar
    coeffs = np.empty(order + 1, dtype=complex)
    coeffs[0] = 1.0
    coeffs[1:] = np.cumprod(ratios)
    q = abs(a) * eval_radius * max(1.0, (order + 1.0 + 2.0 * alpha) / (order + 2.0))
    if q >= 1.0:
        raise TruncationInsufficient(
            f"order {order} cannot bound the tail: ratio cap q = {q!r} >= 1"
        )
    first_tail_term = abs(coeffs[-1] * (order + 2.0 * alpha) / (order + 1.0) * abar)
    tail = first_tail_term * eval_radius ** (order + 1) / (1.0 - q)
    return SeriesCoeffs(a=a, alpha=float(alpha), order=order,
                        eval_radius=float(eval_radius), coeffs=coeffs,
                        tail_bound=float(tail))


def stirling_ratio_check(alpha: float, a_values) -> list:
    """Ratios (sum_k G_k (k+1)**-alpha |a|**k) * (1-|a|^2)**alpha per |a|.

    G_k is the gamma-ratio coefficient gamma(k+2*alpha)/(k! gamma(2*alpha)).
    The sum is truncated once a whole block of terms falls below 1e-16 of
    the running total.  The output stays inside a fixed band [1/C, C] over
    |a| <= 0.999; C is an empirical constant frozen by the test suite.
    """
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    out = []
    block = 1024
    for a in a_values:
        r = abs(a)
        if r > 0.999:
            raise ValueError("|a| must be at most 0.999")
        total = 1.0  # k = 0 term
        g_next = 2.0 * alpha  # G_1
        k0 = 1
        while True:
            k = np.arange(k0, k0 + block, dtype=float)
            growth = np.cumprod((k[:-1] + 2.0 * alpha) / (k[:-1] + 1.0))
            g = g_next * np.concatenate(([1.0], growth))
            terms = g * (k + 1.0) ** (-alpha) * r ** k
            total += float(terms.sum())
            if terms.max() < 1e-16 * total:
                break
            g_next = g[-1] * (k[-1] + 2.0 * alpha) / (k[-1] + 1.0)
            k0 += block
        out.append(total * (1.0 - r * r) ** alpha)
    return out
