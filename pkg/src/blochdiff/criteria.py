"""Boundedness, essential-norm, and compactness criteria for differences of
integral-type composition operators between weighted-derivative spaces.

A symbol quadruple (phi, psi, g, h) with exponents (alpha, beta) fixes the
difference operator f -> integral of f'(phi) g - f'(psi) h.  The module
computes the four equivalent boundedness quantities (two weight-based
forms, the extremal-test-function form, the monomial-power form), the
boundary-restricted essential-norm quantities with their traces, and the
monomial lower bound, then derives tri-state verdicts.  Infinite suprema
surface as divergence flags on refinement traces, never as asserted
constants.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .analytic_fn import Monomial, SymbolExpr, pow_int, require_self_map
from .bloch import (SamplingGrid, SeminormEstimate,
                    monomial_seminorm_exact, sup_search)
from .complex_disk import ensure_in_disk, unwrap
from .errors import HypothesisUnmet, QuadratureNonConvergence
from .test_functions import TestFunction, fa_deriv, ga_deriv
from .version import __version__

DEFAULT_R_SCHEDULE = (0.9, 0.99, 0.999, 0.9999)


def default_n_schedule(n_max: int = 4096) -> list:
    """Geometric power schedule 0, 1, 2, 4, ..., n_max."""
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    out = [0]
    n = 1
    while n <= n_max:
        out.append(n)
        n *= 2
    return out


@dataclass(frozen=True)
class DetectionThresholds:
    """Numeric proxies for finite/infinite and compact/non-compact calls.

    A trace is flagged diverging when it grows by more than
    ``divergence_factor`` across the last ``divergence_window`` increments.
    Essential quantities below ``compact_eps`` with settled tails read as
    compact.
    """

    divergence_factor: float = 10.0
    divergence_window: int = 4
    compact_eps: float = 1e-3
    ess_tail_n0: int = 64

    def to_dict(self) -> dict:
        return {
            "divergence_factor": self.divergence_factor,
            "divergence_window": self.divergence_window,
            "compact_eps": self.compact_eps,
            "ess_tail_n0": self.ess_tail_n0,
        }


def is_diverging(trace: Sequence[float], thresholds: DetectionThresholds) -> bool:
    """Growth test on a refinement or schedule trace.

    With a zero base the window must be strictly increasing throughout,
    so mass that merely appears at outer rings and then settles does not
    trip the flag.
    """
    w = thresholds.divergence_window
    if len(trace) < w + 1:
        return False
    tail = list(trace[-(w + 1):])
    tip, base = tail[-1], tail[0]
    if base <= 0.0:
        return tip > 0.0 and all(b > a for a, b in zip(tail, tail[1:]))
    return tip > thresholds.divergence_factor * base


@dataclass(frozen=True)
class SymbolQuadruple:
    """The full input of every criterion: symbols, weights, exponents.

    phi and psi must map the disk into itself; construction runs the
    sampled validator unless ``declare_self_maps`` attests them (exact
    Blaschke products, for instance).  g and h are arbitrary analytic
    functions on the disk.
    """

    phi: SymbolExpr
    psi: SymbolExpr
    g: SymbolExpr
    h: SymbolExpr
    alpha: float
    beta: float
    declare_self_maps: bool = False

    def __post_init__(self):
        if self.alpha <= 0 or self.beta <= 0:
            raise ValueError("alpha and beta must be positive")
        if not self.declare_self_maps:
            require_self_map(self.phi, "phi")
            require_self_map(self.psi, "psi")

    def swapped(self) -> "SymbolQuadruple":
        return SymbolQuadruple(self.psi, self.phi, self.h, self.g,
                               self.alpha, self.beta, declare_self_maps=True)


@dataclass
class QuantityResult:
    """One criterion quantity: a finite estimate or a divergence flag.

    ``trace`` is the refinement history backing the flag (grid levels,
    sample rings, or power-schedule entries, per ``trace_kind``).
    """

    label: str
    value: float | None
    diverging: bool
    trace: list
    trace_kind: str
    trace_index: list | None = None
    witness: complex | None = None
    terms: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "diverging": self.diverging,
            "trace": [float(t) for t in self.trace],
            "trace_kind": self.trace_kind,
            "trace_index": None if self.trace_index is None else list(self.trace_index),
            "witness": None if self.witness is None else
                       [self.witness.real, self.witness.imag],
            "terms": {k: float(v) for k, v in self.terms.items()},
        }

    @classmethod
    def from_dict(cls, label: str, d: dict) -> "QuantityResult":
        w = d.get("witness")
        return cls(label=label, value=d.get("value"), diverging=bool(d["diverging"]),
                   trace=list(d.get("trace", [])), trace_kind=d.get("trace_kind", ""),
                   trace_index=d.get("trace_index"),
                   witness=None if w is None else complex(w[0], w[1]),
                   terms=dict(d.get("terms", {})))


# ---------------------------------------------------------------------------
# shared grid evaluations
# ---------------------------------------------------------------------------


class QuadrupleGridCache:
    """Per-ring arrays of symbol values and derived weights, computed once
    and shared by every quantity on the same (quadruple, grid) pair."""

    def __init__(self, quad: SymbolQuadruple, grid: SamplingGrid):
        self.quad = quad
        self.grid = grid
        a, b = quad.alpha, quad.beta
        self.w_beta = [(1.0 - r * r) ** b for r in grid.radii]
        self.phi = [np.asarray(quad.phi.eval(ring)) for ring in grid.rings]
        self.psi = [np.asarray(quad.psi.eval(ring)) for ring in grid.rings]
        self.gv = [np.asarray(quad.g.eval(ring)) for ring in grid.rings]
        self.hv = [np.asarray(quad.h.eval(ring)) for ring in grid.rings]
        self.abs_phi = [np.abs(p) for p in self.phi]
        self.abs_psi = [np.abs(q) for q in self.psi]
        self.d_phi_g = [self.w_beta[j] * self.gv[j] /
                        (1.0 - self.abs_phi[j] ** 2) ** a
                        for j in range(len(self.phi))]
        self.d_psi_h = [self.w_beta[j] * self.hv[j] /
                        (1.0 - self.abs_psi[j] ** 2) ** a
                        for j in range(len(self.psi))]
        self.rho = [np.abs((self.psi[j] - self.phi[j]) /
                           (1.0 - np.conj(self.phi[j]) * self.psi[j]))
                    for j in range(len(self.phi))]

    # pointwise evaluators used by refinement patches -----------------------

    def point_symbols(self, z):
        q = self.quad
        return (np.asarray(q.phi.eval(z)), np.asarray(q.psi.eval(z)),
                np.asarray(q.g.eval(z)), np.asarray(q.h.eval(z)))

    def point_weights(self, z):
        q = self.quad
        pv, qv, gv, hv = self.point_symbols(z)
        wb = (1.0 - np.abs(z) ** 2) ** q.beta
        dp = wb * gv / (1.0 - np.abs(pv) ** 2) ** q.alpha
        dq = wb * hv / (1.0 - np.abs(qv) ** 2) ** q.alpha
        rho = np.abs((qv - pv) / (1.0 - np.conj(pv) * qv))
        return dp, dq, rho


def apply_operator(f, phi: SymbolExpr, g: SymbolExpr, z, quad_tol: float = 1e-10):
    """Image of f under the integral-type operator at z.

    Adaptive Simpson quadrature of f'(phi(xi)) g(xi) along the straight
    segment [0, z]; raises :class:`QuadratureNonConvergence` past depth 16
    (2**16 panels at the deepest level).
    """
    zv = complex(ensure_in_disk(z, "z"))
    if zv == 0:
        return 0.0 + 0.0j

    def integrand(t: np.ndarray) -> np.ndarray:
        xi = t * zv
        return np.asarray(f.deriv(phi.eval(xi))) * np.asarray(g.eval(xi)) * zv

    def simpson(fa, fm, fb, a, b):
        return (b - a) / 6.0 * (fa + 4.0 * fm + fb)

    def recurse(a, b, fa, fm, fb, whole, tol, depth):
        m = 0.5 * (a + b)
        lm, rm = 0.5 * (a + m), 0.5 * (m + b)
        flm, frm = integrand(np.asarray([lm, rm]))
        left = simpson(fa, flm, fm, a, m)
        right = simpson(fm, frm, fb, m, b)
        err = left + right - whole
        if abs(err) <= 15.0 * tol:
            return left + right + err / 15.0
        if depth >= 16:
            raise QuadratureNonConvergence(
                f"segment quadrature stalled near t in [{a}, {b}] with error {abs(err)!r}")
        return (recurse(a, m, fa, flm, fm, left, tol / 2.0, depth + 1) +
                recurse(m, b, fm, frm, fb, right, tol / 2.0, depth + 1))

    f0, fm, f1 = integrand(np.asarray([0.0, 0.5, 1.0]))
    whole = simpson(f0, fm, f1, 0.0, 1.0)
    return complex(recurse(0.0, 1.0, f0, fm, f1, whole, quad_tol, 0))


def D_weight(which: str, quad: SymbolQuadruple, z):
    """Weight ratio (1 - |z|^2)**beta * g(z) / (1 - |phi(z)|^2)**alpha
    (or the psi/h counterpart)."""
    if which not in ("phi_g", "psi_h"):
        raise ValueError("which must be 'phi_g' or 'psi_h'")
    zv = ensure_in_disk(z, "z")
    wb = (1.0 - np.abs(zv) ** 2) ** quad.beta
    if which == "phi_g":
        sym, wt = quad.phi.eval(zv), quad.g.eval(zv)
    else:
        sym, wt = quad.psi.eval(zv), quad.h.eval(zv)
    return wb * wt / (1.0 - np.abs(np.asarray(sym)) ** 2) ** quad.alpha


def diff_seminorm_on(f, quad: SymbolQuadruple, grid: SamplingGrid,
                     _cache: QuadrupleGridCache | None = None) -> SeminormEstimate:
    """Weighted-derivative sup of the image of f under the difference
    operator: sup (1-|z|^2)**beta |f'(phi(z)) g(z) - f'(psi(z)) h(z)|.

    The image vanishes at the origin, so this seminorm is its full norm.
    ``f`` is anything with an exact ``deriv`` (expression tree, extremal
    test function, monomial).
    """
    cache = _cache if _cache is not None else QuadrupleGridCache(quad, grid)
    gv = [cache.w_beta[j] * np.abs(f.deriv(cache.phi[j]) * cache.gv[j] -
                                   f.deriv(cache.psi[j]) * cache.hv[j])
          for j in range(len(cache.phi))]

    def fn(z):
        pv, qv, g_, h_ = cache.point_symbols(z)
        wb = (1.0 - np.abs(z) ** 2) ** quad.beta
        return wb * np.abs(f.deriv(pv) * g_ - f.deriv(qv) * h_)

    return sup_search(fn, grid, grid_values=gv)


# ---------------------------------------------------------------------------
# the four boundedness quantities
# ---------------------------------------------------------------------------


def _sup_weight_diff(quad, grid, cache) -> SeminormEstimate:
    gv = [np.abs(cache.d_phi_g[j] - cache.d_psi_h[j]) for j in range(len(cache.phi))]

    def fn(z):
        dp, dq, _ = cache.point_weights(z)
        return np.abs(dp - dq)

    return sup_search(fn, grid, grid_values=gv)


def _sup_weight_rho(quad, grid, cache, which: str) -> SeminormEstimate:
    src = cache.d_psi_h if which == "psi_h" else cache.d_phi_g
    gv = [np.abs(src[j]) * cache.rho[j] for j in range(len(cache.phi))]

    def fn(z):
        dp, dq, rho = cache.point_weights(z)
        return (np.abs(dq) if which == "psi_h" else np.abs(dp)) * rho

    return sup_search(fn, grid, grid_values=gv)


def _two_term_quantity(label, quad, grid, thresholds, cache, which) -> QuantityResult:
    s_diff = _sup_weight_diff(quad, grid, cache)
    s_prod = _sup_weight_rho(quad, grid, cache, which)
    n = min(s_diff.grid_levels, s_prod.grid_levels)
    combined = [s_diff.level_trace[j] + s_prod.level_trace[j] for j in range(n)]
    diverging = (is_diverging(s_diff.level_trace[:s_diff.grid_levels], thresholds) or
                 is_diverging(s_prod.level_trace[:s_prod.grid_levels], thresholds))
    dominant = s_diff if s_diff.value >= s_prod.value else s_prod
    return QuantityResult(
        label=label,
        value=None if diverging else s_diff.value + s_prod.value,
        diverging=diverging,
        trace=combined,
        trace_kind="grid_levels",
        witness=dominant.argmax,
        terms={"weight_difference_sup": s_diff.value,
               "weighted_rho_sup": s_prod.value},
    )


def quantity_iia(quad: SymbolQuadruple, grid: SamplingGrid,
                 thresholds: DetectionThresholds = DetectionThresholds(),
                 _cache: QuadrupleGridCache | None = None) -> QuantityResult:
    """sup |D_phi_g - D_psi_h| plus sup |D_psi_h| rho."""
    cache = _cache if _cache is not None else QuadrupleGridCache(quad, grid)
    return _two_term_quantity("Q_iia", quad, grid, thresholds, cache, "psi_h")


def quantity_iib(quad: SymbolQuadruple, grid: SamplingGrid,
                 thresholds: DetectionThresholds = DetectionThresholds(),
                 _cache: QuadrupleGridCache | None = None) -> QuantityResult:
    """Mirror of quantity_iia with the roles of (phi, g) and (psi, h)
    swapped in the second term."""
    cache = _cache if _cache is not None else QuadrupleGridCache(quad, grid)
    return _two_term_quantity("Q_iib", quad, grid, thresholds, cache, "phi_g")


def _a_samples(grid: SamplingGrid, per_ring: int, outer_rings_only: bool) -> list:
    """Deterministic stride sample of grid points per ring, as (ring, a)."""
    rings = list(enumerate(grid.rings))
    if outer_rings_only:
        rings = rings[-2:]
    out = []
    for j, ring in rings:
        m = len(ring)
        k = min(m, per_ring)
        idx = np.unique(np.round(np.linspace(0, m - 1, k)).astype(int))
        out.extend((j, complex(ring[i])) for i in idx)
    return out


def quantity_iii(quad: SymbolQuadruple, grid: SamplingGrid,
                 thresholds: DetectionThresholds = DetectionThresholds(),
                 a_per_ring: int = 4, outer_rings_only: bool = False,
                 _cache: QuadrupleGridCache | None = None) -> QuantityResult:
    """sup over sampled a of the difference-operator norms of the two
    extremal test functions at a (their exact derivatives feed the
    weighted sup directly; no integration happens).

    a runs over stride-sampled grid points; with ``outer_rings_only`` the
    sample restricts to the two outermost rings (the |a| -> 1 variant).
    """
    cache = _cache if _cache is not None else QuadrupleGridCache(quad, grid)
    samples = _a_samples(grid, a_per_ring, outer_rings_only)
    best = -1.0
    best_a = None
    ring_max: dict = {}
    for j, a in samples:
        fa = TestFunction("fa", a, quad.alpha)
        ga = TestFunction("ga", a, quad.alpha)
        total = (diff_seminorm_on(fa, quad, grid, _cache=cache).value +
                 diff_seminorm_on(ga, quad, grid, _cache=cache).value)
        ring_max[j] = max(ring_max.get(j, 0.0), total)
        if total > best:
            best, best_a = total, a
    trace = []
    running = 0.0
    ring_ids = sorted(ring_max)
    for j in ring_ids:
        running = max(running, ring_max[j])
        trace.append(running)
    diverging = is_diverging(trace, thresholds)
    return QuantityResult(
        label="Q_iii",
        value=None if diverging else best,
        diverging=diverging,
        trace=trace,
        trace_kind="a_sample_rings",
        trace_index=[grid.radii[j] for j in ring_ids],
        witness=best_a,
        terms={},
    )


def _per_n_sups(quad: SymbolQuadruple, grid: SamplingGrid, n_schedule: Sequence[int],
                cache: QuadrupleGridCache) -> list:
    """Refined sup of (n+1)**alpha (1-|z|^2)**beta |phi**n g - psi**n h|
    for each n in the schedule."""
    a = quad.alpha
    out = []
    for n in n_schedule:
        scale = (n + 1.0) ** a
        gv = [scale * cache.w_beta[j] *
              np.abs(pow_int(cache.phi[j], n) * cache.gv[j] -
                     pow_int(cache.psi[j], n) * cache.hv[j])
              for j in range(len(cache.phi))]

        def fn(z, n=n, scale=scale):
            pv, qv, g_, h_ = cache.point_symbols(z)
            wb = (1.0 - np.abs(z) ** 2) ** quad.beta
            return scale * wb * np.abs(pow_int(pv, n) * g_ - pow_int(qv, n) * h_)

        out.append((n, sup_search(fn, grid, grid_values=gv)))
    return out


def quantity_iv(quad: SymbolQuadruple, grid: SamplingGrid,
                n_schedule: Sequence[int] | None = None,
                thresholds: DetectionThresholds = DetectionThresholds(),
                _cache: QuadrupleGridCache | None = None,
                _per_n: list | None = None) -> QuantityResult:
    """sup over n of sup_z (n+1)**alpha (1-|z|^2)**beta |phi**n g - psi**n h|.

    Symbol powers are evaluated by repeated squaring of point values, never
    by expanding expression trees.  Divergence is read off the per-n trace.
    """
    if n_schedule is None:
        n_schedule = default_n_schedule()
    cache = _cache if _cache is not None else QuadrupleGridCache(quad, grid)
    per_n = _per_n if _per_n is not None else _per_n_sups(quad, grid, n_schedule, cache)
    trace = [est.value for _, est in per_n]
    diverging = is_diverging(trace, thresholds)
    k = int(np.argmax(trace))
    return QuantityResult(
        label="Q_iv",
        value=None if diverging else trace[k],
        diverging=diverging,
        trace=trace,
        trace_kind="n_schedule",
        trace_index=list(n_schedule),
        witness=per_n[k][1].argmax,
        terms={"argmax_n": per_n[k][0]},
    )


# ---------------------------------------------------------------------------
# essential-norm quantities
# ---------------------------------------------------------------------------


@dataclass
class EssAResult:
    """Boundary-restricted weight suprema along an increasing r schedule.

    Each row holds the three restricted sups (phi region, psi region,
    joint region), their sum, and emptiness flags; ``value`` is the
    final-row sum taken as the limit estimate.  ``unresolved`` marks a
    term whose restriction emptied out at the last r after being
    populated earlier, i.e. the grid stopped resolving the limit.
    """

    rows: list
    value: float
    monotone: bool
    unresolved: bool

    def to_dict(self) -> dict:
        return {"rows": self.rows, "value": self.value,
                "monotone": self.monotone, "unresolved": self.unresolved}

    @classmethod
    def from_dict(cls, d: dict) -> "EssAResult":
        return cls(rows=list(d["rows"]), value=d["value"],
                   monotone=bool(d["monotone"]), unresolved=bool(d["unresolved"]))


def ess_quantity_A(quad: SymbolQuadruple, grid: SamplingGrid,
                   r_schedule: Sequence[float] = DEFAULT_R_SCHEDULE,
                   _cache: QuadrupleGridCache | None = None) -> EssAResult:
    """Per-r sums of sup_{|phi|>r} |D_phi_g| rho, sup_{|psi|>r} |D_psi_h| rho,
    and sup over the joint region of |D_phi_g - D_psi_h|.

    A sup over an empty restriction is 0 exactly, which also settles the
    compact case where boundary regions never populate.
    """
    rs = list(r_schedule)
    if any(b <= a for a, b in zip(rs, rs[1:])) or not rs or rs[-1] >= 1.0:
        raise ValueError("r_schedule must increase strictly inside (0, 1)")
    cache = _cache if _cache is not None else QuadrupleGridCache(quad, grid)
    n_rings = len(cache.phi)
    t_phi = [np.abs(cache.d_phi_g[j]) * cache.rho[j] for j in range(n_rings)]
    t_psi = [np.abs(cache.d_psi_h[j]) * cache.rho[j] for j in range(n_rings)]
    t_joint = [np.abs(cache.d_phi_g[j] - cache.d_psi_h[j]) for j in range(n_rings)]

    def masked_sup(values, masks):
        best, populated = 0.0, False
        for v, m in zip(values, masks):
            if np.any(m):
                populated = True
                best = max(best, float(np.max(v[m])))
        return best, populated

    rows = []
    populated_ever = [False, False, False]
    for r in rs:
        m_phi = [cache.abs_phi[j] > r for j in range(n_rings)]
        m_psi = [cache.abs_psi[j] > r for j in range(n_rings)]
        m_joint = [m_phi[j] & m_psi[j] for j in range(n_rings)]
        v1, p1 = masked_sup(t_phi, m_phi)
        v2, p2 = masked_sup(t_psi, m_psi)
        v3, p3 = masked_sup(t_joint, m_joint)
        for i, p in enumerate((p1, p2, p3)):
            populated_ever[i] = populated_ever[i] or p
        rows.append({"r": r, "term_phi": v1, "term_psi": v2, "term_joint": v3,
                     "total": v1 + v2 + v3,
                     "empty": [not p1, not p2, not p3]})
    totals = [row["total"] for row in rows]
    monotone = all(b <= a + 1e-15 for a, b in zip(totals, totals[1:]))
    last = rows[-1]
    unresolved = any(last["empty"][i] and populated_ever[i] for i in range(3))
    return EssAResult(rows=rows, value=totals[-1], monotone=monotone,
                      unresolved=unresolved)


def ess_quantity_B(quad: SymbolQuadruple, grid: SamplingGrid,
                   n_schedule: Sequence[int] | None = None, n0: int = 64,
                   thresholds: DetectionThresholds = DetectionThresholds(),
                   _cache: QuadrupleGridCache | None = None,
                   _per_n: list | None = None) -> QuantityResult:
    """Tail max (n >= n0) of the per-n weighted power sups, with the tail
    trend reported; diverging tails are flagged like quantity_iv."""
    if n_schedule is None:
        n_schedule = default_n_schedule()
    if n0 >= max(n_schedule):
        raise ValueError("n0 must sit below the top of the schedule")
    cache = _cache if _cache is not None else QuadrupleGridCache(quad, grid)
    per_n = _per_n if _per_n is not None else _per_n_sups(quad, grid, n_schedule, cache)
    tail = [(n, est) for n, est in per_n if n >= n0]
    trace = [est.value for _, est in tail]
    diverging = is_diverging([est.value for _, est in per_n], thresholds)
    k = int(np.argmax(trace))
    # tail trend sign: -1 decreasing, 0 flat, +1 increasing
    trend = float(np.sign(trace[-1] - trace[0]))
    return QuantityResult(
        label="ess_B",
        value=None if diverging else trace[k],
        diverging=diverging,
        trace=trace,
        trace_kind="n_tail",
        trace_index=[n for n, _ in tail],
        witness=tail[k][1].argmax,
        terms={"tail_trend_sign": trend},
    )


def ess_lower_monomials(quad: SymbolQuadruple, grid: SamplingGrid,
                        n_schedule: Sequence[int] | None = None, n0: int = 64,
                        thresholds: DetectionThresholds = DetectionThresholds(),
                        _cache: QuadrupleGridCache | None = None) -> QuantityResult:
    """Monomial lower bound for the essential norm: tail max over n of the
    difference-operator seminorm of z**n divided by its exact norm.

    Normalized monomials tend to zero on compact sets, so no compact
    operator can keep their images large; the surviving mass lower-bounds
    the distance to the compacts.
    """
    if n_schedule is None:
        n_schedule = default_n_schedule()
    cache = _cache if _cache is not None else QuadrupleGridCache(quad, grid)
    entries = []
    for n in n_schedule:
        if n < 1:
            continue
        est = diff_seminorm_on(Monomial(n), quad, grid, _cache=cache)
        entries.append((n, est.value / monomial_seminorm_exact(n, quad.alpha),
                        est.argmax))
    trace = [v for _, v, _ in entries]
    tail = [(n, v, w) for n, v, w in entries if n >= n0]
    if not tail:
        tail = entries[-1:]
    k = int(np.argmax([v for _, v, _ in tail]))
    diverging = is_diverging(trace, thresholds)
    return QuantityResult(
        label="ess_lower",
        value=None if diverging else tail[k][1],
        diverging=diverging,
        trace=trace,
        trace_kind="n_schedule",
        trace_index=[n for n, _, _ in entries],
        witness=tail[k][2],
        terms={"argmax_n": float(tail[k][0])},
    )


# ---------------------------------------------------------------------------
# verdicts and report assembly
# ---------------------------------------------------------------------------

_RATIO_PAIRS = (("iia", "iib"), ("iia", "iii"), ("iia", "iv"),
                ("iib", "iii"), ("iib", "iv"), ("iii", "iv"))


def _cross_ratios(quantities: dict) -> dict:
    out = {}
    for x, y in _RATIO_PAIRS:
        qx, qy = quantities[x], quantities[y]
        if (qx.diverging or qy.diverging or qx.value is None or
                qy.value is None or qy.value == 0.0):
            out[f"{x}/{y}"] = None
        else:
            out[f"{x}/{y}"] = qx.value / qy.value
    return out


def boundedness_verdict(q_iia: QuantityResult, q_iib: QuantityResult,
                        q_iii: QuantityResult, q_iv: QuantityResult) -> tuple:
    """Tri-state verdict plus the pairwise finite-value ratio table.

    The four quantities are equivalent up to constants, so mixed flags are
    a numerical finding, reported as 'inconclusive' and surfaced by the
    coherence audit.
    """
    qs = {"iia": q_iia, "iib": q_iib, "iii": q_iii, "iv": q_iv}
    flags = [q.diverging for q in qs.values()]
    if not any(flags):
        verdict = "yes"
    elif all(flags):
        verdict = "no"
    else:
        verdict = "inconclusive"
    return verdict, _cross_ratios(qs)


def single_operator_bounded(quad: SymbolQuadruple, grid: SamplingGrid, which: str,
                            thresholds: DetectionThresholds = DetectionThresholds(),
                            _cache: QuadrupleGridCache | None = None) -> tuple:
    """Boundedness of one operator alone: sup of its weight ratio stays
    finite (its partner's weight set to zero collapses the four criteria
    to this single sup)."""
    cache = _cache if _cache is not None else QuadrupleGridCache(quad, grid)
    src = cache.d_phi_g if which == "phi_g" else cache.d_psi_h
    gv = [np.abs(arr) for arr in src]

    def fn(z):
        dp, dq, _ = cache.point_weights(z)
        return np.abs(dp if which == "phi_g" else dq)

    est = sup_search(fn, grid, grid_values=gv)
    finite = not is_diverging(est.level_trace[:est.grid_levels], thresholds)
    return finite, est


def _tail_settled(trace: Sequence[float], eps: float) -> bool:
    if len(trace) < 2:
        return True
    return trace[-1] <= eps or trace[-1] <= trace[0] * (1.0 + 1e-9)


def compactness_verdict(quad: SymbolQuadruple,
                        thresholds: DetectionThresholds = DetectionThresholds(),
                        grid: SamplingGrid | None = None,
                        n_schedule: Sequence[int] | None = None,
                        r_schedule: Sequence[float] = DEFAULT_R_SCHEDULE,
                        _pre: dict | None = None) -> str:
    """Tri-state compactness call from the essential-norm quantities.

    Requires both single operators bounded (checked first; raises
    :class:`HypothesisUnmet` otherwise).  'yes' needs every essential
    quantity below ``compact_eps`` with settled tails; a quantity at or
    above the threshold with a non-decreasing tail forces 'no'; anything
    else stays 'inconclusive'.
    """
    grid = grid if grid is not None else SamplingGrid()
    pre = _pre or {}
    cache = pre.get("cache") or QuadrupleGridCache(quad, grid)
    eps = thresholds.compact_eps

    ok_phi, est_phi = single_operator_bounded(quad, grid, "phi_g", thresholds, cache)
    ok_psi, est_psi = single_operator_bounded(quad, grid, "psi_h", thresholds, cache)
    if not ok_phi or not ok_psi:
        bad = "phi/g" if not ok_phi else "psi/h"
        raise HypothesisUnmet(
            f"single operator for {bad} is unbounded "
            f"(weight sup trace reached {max(est_phi.value, est_psi.value)!r})")

    ess_a = pre.get("ess_a") or ess_quantity_A(quad, grid, r_schedule, _cache=cache)
    ess_b = pre.get("ess_b") or ess_quantity_B(quad, grid, n_schedule,
                                               thresholds.ess_tail_n0, thresholds,
                                               _cache=cache)
    ess_low = pre.get("ess_lower") or ess_lower_monomials(
        quad, grid, n_schedule, thresholds.ess_tail_n0, thresholds, _cache=cache)

    if ess_b.diverging or ess_low.diverging:
        return "no"
    if ess_a.unresolved:
        return "inconclusive"
    a_totals = [row["total"] for row in ess_a.rows]
    states = [
        (ess_a.value, a_totals),
        (ess_b.value, ess_b.trace),
        (ess_low.value, [v for v in ess_low.trace]),
    ]
    if all(v < eps and _tail_settled(tr, eps) for v, tr in states):
        return "yes"
    if any(v >= eps and not (tr[-1] < tr[0]) for v, tr in states if len(tr) >= 2):
        return "no"
    return "inconclusive"


def bloch_distance_lb(z, w, alpha: float, dictionary: Sequence) -> float:
    """Lower bound for the weighted-derivative induced distance between two
    points, maximized over a dictionary of unit-ball members.

    Entries are ("fa", a), ("ga", a), or ("monomial", n); the first two
    have norm at most 1 as given, monomials are divided by their exact
    seminorm.  With ("fa", z) present the bound dominates |1 - tau**alpha|.
    """
    if not dictionary:
        raise ValueError("dictionary must be nonempty")
    zv = complex(ensure_in_disk(z, "z"))
    wv = complex(ensure_in_disk(w, "w"))
    wz = (1.0 - abs(zv) ** 2) ** alpha
    ww = (1.0 - abs(wv) ** 2) ** alpha
    best = 0.0
    for kind, param in dictionary:
        if kind == "fa":
            dz, dw = fa_deriv(param, alpha, zv), fa_deriv(param, alpha, wv)
        elif kind == "ga":
            dz, dw = ga_deriv(param, alpha, zv), ga_deriv(param, alpha, wv)
        elif kind == "monomial":
            n = int(param)
            norm = monomial_seminorm_exact(n, alpha)
            dz = n * zv ** (n - 1) / norm
            dw = n * wv ** (n - 1) / norm
        else:
            raise ValueError(f"unknown dictionary entry kind {kind!r}")
        best = max(best, abs(wz * dz - ww * dw))
    return best


def default_distance_dictionary(z, w, n_max: int = 8) -> list:
    zv, wv = complex(unwrap(z)), complex(unwrap(w))
    out = [("fa", zv), ("fa", wv), ("ga", zv), ("ga", wv)]
    out.extend(("monomial", n) for n in range(1, n_max + 1))
    return out


@dataclass
class CriterionReport:
    """Everything the criteria say about one quadruple, serializable."""

    member_id: str
    alpha: float
    beta: float
    q_iia: QuantityResult
    q_iib: QuantityResult
    q_iii: QuantityResult
    q_iv: QuantityResult
    ess_a: EssAResult
    ess_b: QuantityResult
    ess_lower: QuantityResult
    bounded_verdict: str
    compact_verdict: str
    cross_ratios: dict
    witnesses: dict
    provenance: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "member_id": self.member_id,
            "alpha": self.alpha,
            "beta": self.beta,
            "Q_iia": self.q_iia.to_dict(),
            "Q_iib": self.q_iib.to_dict(),
            "Q_iii": self.q_iii.to_dict(),
            "Q_iv": self.q_iv.to_dict(),
            "ess_A": self.ess_a.to_dict(),
            "ess_B": self.ess_b.to_dict(),
            "ess_lower": self.ess_lower.to_dict(),
            "bounded_verdict": self.bounded_verdict,
            "compact_verdict": self.compact_verdict,
            "cross_ratios": self.cross_ratios,
            "witnesses": self.witnesses,
            "provenance": self.provenance,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CriterionReport":
        return cls(
            member_id=d["member_id"], alpha=d["alpha"], beta=d["beta"],
            q_iia=QuantityResult.from_dict("Q_iia", d["Q_iia"]),
            q_iib=QuantityResult.from_dict("Q_iib", d["Q_iib"]),
            q_iii=QuantityResult.from_dict("Q_iii", d["Q_iii"]),
            q_iv=QuantityResult.from_dict("Q_iv", d["Q_iv"]),
            ess_a=EssAResult.from_dict(d["ess_A"]),
            ess_b=QuantityResult.from_dict("ess_B", d["ess_B"]),
            ess_lower=QuantityResult.from_dict("ess_lower", d["ess_lower"]),
            bounded_verdict=d["bounded_verdict"],
            compact_verdict=d["compact_verdict"],
            cross_ratios=dict(d["cross_ratios"]),
            witnesses=dict(d["witnesses"]),
            provenance=dict(d.get("provenance", {})),
        )


def evaluate_quadruple(quad: SymbolQuadruple, grid: SamplingGrid,
                       n_schedule: Sequence[int] | None = None,
                       r_schedule: Sequence[float] = DEFAULT_R_SCHEDULE,
                       thresholds: DetectionThresholds = DetectionThresholds(),
                       a_per_ring: int = 4,
                       member_id: str = "quadruple") -> CriterionReport:
    """Full criterion pipeline on one quadruple, sharing a single grid
    cache across every quantity."""
    if n_schedule is None:
        n_schedule = default_n_schedule()
    cache = QuadrupleGridCache(quad, grid)
    per_n = _per_n_sups(quad, grid, n_schedule, cache)
    q_iia = quantity_iia(quad, grid, thresholds, _cache=cache)
    q_iib = quantity_iib(quad, grid, thresholds, _cache=cache)
    q_iii = quantity_iii(quad, grid, thresholds, a_per_ring, _cache=cache)
    q_iv = quantity_iv(quad, grid, n_schedule, thresholds, _cache=cache, _per_n=per_n)
    bounded, ratios = boundedness_verdict(q_iia, q_iib, q_iii, q_iv)
    ess_a = ess_quantity_A(quad, grid, r_schedule, _cache=cache)
    ess_b = ess_quantity_B(quad, grid, n_schedule, thresholds.ess_tail_n0,
                           thresholds, _cache=cache, _per_n=per_n)
    ess_low = ess_lower_monomials(quad, grid, n_schedule, thresholds.ess_tail_n0,
                                  thresholds, _cache=cache)
    try:
        compact = compactness_verdict(
            quad, thresholds, grid, n_schedule, r_schedule,
            _pre={"cache": cache, "ess_a": ess_a, "ess_b": ess_b,
                  "ess_lower": ess_low})
    except HypothesisUnmet:
        compact = "hypothesis_unmet"
    witnesses = {}
    for q in (q_iia, q_iib, q_iii, q_iv, ess_b, ess_low):
        w = q.witness
        witnesses[q.label] = None if w is None else [w.real, w.imag]
    return CriterionReport(
        member_id=member_id, alpha=quad.alpha, beta=quad.beta,
        q_iia=q_iia, q_iib=q_iib, q_iii=q_iii, q_iv=q_iv,
        ess_a=ess_a, ess_b=ess_b, ess_lower=ess_low,
        bounded_verdict=bounded, compact_verdict=compact,
        cross_ratios=ratios, witnesses=witnesses,
        provenance={
            "grid": {"levels": grid.levels, "c_ang": grid.c_ang,
                     "refinement_depth": grid.refinement_depth},
            "n_schedule": list(n_schedule),
            "r_schedule": list(r_schedule),
            "thresholds": thresholds.to_dict(),
            "a_per_ring": a_per_ring,
            "library_version": __version__,
        },
    )
