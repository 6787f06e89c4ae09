"""Geometry of the disk: examples, identities, and the bounded-ratio sweep."""

import cmath

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from blochdiff import (DegenerateInputError, DiskDomainError, DiskPoint,
                       mobius_sigma, pseudo_hyperbolic, remark21_ratio, tau,
                       tau_pow)

from conftest import random_disk_points

disk_points = st.builds(
    lambda r, t: 0.998 * r * cmath.exp(1j * t),
    st.floats(0.0, 1.0), st.floats(0.0, 2.0 * np.pi),
)


class TestDiskPoint:
    def test_wraps_value(self):
        p = DiskPoint(0.3 + 0.4j)
        assert complex(p) == 0.3 + 0.4j

    def test_rejects_boundary(self):
        with pytest.raises(DiskDomainError):
            DiskPoint(1.0)
        with pytest.raises(DiskDomainError):
            DiskPoint(1.0 - 1e-13)

    def test_ops_accept_wrappers(self):
        assert mobius_sigma(DiskPoint(0.5), DiskPoint(-0.5)) == pytest.approx(0.8)


class TestMobiusSigma:
    def test_lambda_zero_negates(self):
        w = 0.3 - 0.2j
        assert mobius_sigma(0.0, w) == -w

    def test_fixed_point_of_itself(self):
        lam = 0.4 + 0.1j
        assert mobius_sigma(lam, lam) == 0.0

    def test_direct_arithmetic(self):
        assert mobius_sigma(0.5, -0.5) == pytest.approx(0.8)

    def test_rejects_outside_disk(self):
        with pytest.raises(DiskDomainError):
            mobius_sigma(1.5, 0.0)


class TestPseudoHyperbolic:
    def test_coincident_points(self):
        assert pseudo_hyperbolic(0.3 + 0.1j, 0.3 + 0.1j) == 0.0

    def test_from_origin_is_modulus(self):
        w = 0.6 - 0.3j
        assert pseudo_hyperbolic(0.0, w) == pytest.approx(abs(w), abs=1e-15)

    def test_direct_arithmetic(self):
        assert pseudo_hyperbolic(0.5, -0.5) == pytest.approx(0.8)

    @settings(max_examples=200, deadline=None)
    @given(disk_points, disk_points)
    def test_symmetry(self, z, w):
        assert abs(pseudo_hyperbolic(z, w) - pseudo_hyperbolic(w, z)) <= 1e-14

    @settings(max_examples=200, deadline=None)
    @given(disk_points, disk_points, disk_points)
    def test_mobius_invariance(self, lam, z, w):
        direct = pseudo_hyperbolic(z, w)
        moved = pseudo_hyperbolic(mobius_sigma(lam, z), mobius_sigma(lam, w))
        assert abs(direct - moved) <= 1e-12

    @settings(max_examples=200, deadline=None)
    @given(disk_points, disk_points)
    def test_sigma_identity(self, lam, z):
        lhs = 1.0 - abs(mobius_sigma(lam, z)) ** 2
        rhs = (1.0 - abs(lam) ** 2) * (1.0 - abs(z) ** 2) / \
            abs(1.0 - np.conj(lam) * z) ** 2
        assert abs(lhs - rhs) <= 1e-13


class TestTau:
    def test_both_origin(self):
        assert tau(0.0, 0.0) == 1.0

    def test_coincident_points(self):
        p = 0.2 + 0.6j
        assert tau(p, p) == pytest.approx(1.0, abs=1e-14)

    def test_direct_arithmetic(self):
        val = tau(0.5, -0.5)
        assert val == pytest.approx(0.36)
        assert abs(val) == pytest.approx(1.0 - 0.8 ** 2)

    @settings(max_examples=300, deadline=None)
    @given(disk_points, disk_points)
    def test_modulus_identity(self, p, q):
        assert abs(abs(tau(p, q)) - (1.0 - pseudo_hyperbolic(p, q) ** 2)) <= 1e-13


class TestTauPow:
    def test_origin_any_alpha(self):
        assert tau_pow(0.0, 0.0, 0.77) == 1.0

    def test_exponent_one_matches_tau(self):
        p, q = 0.3 + 0.2j, -0.4 + 0.5j
        assert tau_pow(p, q, 1.0) == pytest.approx(tau(p, q), abs=1e-15)

    def test_square_example(self):
        val = tau_pow(0.5, -0.5, 2.0)
        assert val == pytest.approx(0.36 ** 2)

    @settings(max_examples=200, deadline=None)
    @given(disk_points, disk_points, st.sampled_from([2, 3]))
    def test_integer_power_consistency(self, p, q, m):
        assert abs(tau_pow(p, q, float(m)) - tau(p, q) ** m) <= 1e-12

    def test_rejects_nonpositive_alpha(self):
        with pytest.raises(ValueError):
            tau_pow(0.1, 0.2, 0.0)


class TestRemark21Ratio:
    def test_direct_arithmetic(self):
        assert remark21_ratio(0.5, -0.5, 1.0) == pytest.approx(0.8)

    def test_degenerate_pair_refused(self):
        with pytest.raises(DegenerateInputError):
            remark21_ratio(0.3, 0.3, 1.0)

    def test_composes_from_parts(self):
        p, q = 0.9, 0.9j
        expected = abs(1.0 - tau_pow(p, q, 1.0)) / pseudo_hyperbolic(p, q)
        assert remark21_ratio(p, q, 1.0) == pytest.approx(expected, rel=1e-14)


def _remark21_grid_max(alpha: float, n: int) -> float:
    """Dense deterministic pair sweep of |1 - tau**alpha| / rho."""
    u = np.linspace(0.0, 12.0, n)
    radii = 1.0 - 2.0 ** (-u)
    th_z = 2.0 * np.pi * np.arange(n) / n
    th_w = 2.0 * np.pi * (np.arange(n) + 0.381966) / n
    z = (radii[:, None] * np.exp(1j * th_z)[None, :]).ravel()
    w = (radii[:, None] * np.exp(1j * th_w)[None, :]).ravel()
    best = 0.0
    for i in range(0, len(z), 64):
        zi = z[i:i + 64][:, None]
        rho = np.abs((w[None, :] - zi) / (1.0 - np.conj(w)[None, :] * zi))
        lt = np.log1p(-np.abs(zi) ** 2) + np.log1p(-np.abs(w) ** 2)[None, :]
        taup = np.exp(alpha * lt - 2.0 * alpha * np.log(1.0 - np.conj(zi) * w[None, :]))
        mask = rho >= 1e-6
        vals = np.abs(1.0 - taup)[mask] / rho[mask]
        if vals.size:
            best = max(best, float(np.max(vals)))
    return best


@pytest.mark.parametrize("alpha", [0.5, 1.0, 2.0])
def test_remark21_bound_stabilizes(alpha):
    """The ratio sup is finite and moves < 5% when the pair grid densifies
    4x; the constant itself is recorded, not asserted."""
    base = _remark21_grid_max(alpha, 32)
    dense = _remark21_grid_max(alpha, 45)
    assert np.isfinite(base) and base > 0
    assert abs(dense - base) / base < 0.05


def test_batch_symmetry_many_pairs():
    rng = np.random.default_rng(7)
    z = random_disk_points(rng, 10_000)
    w = random_disk_points(rng, 10_000)
    fwd = pseudo_hyperbolic(z, w)
    bwd = pseudo_hyperbolic(w, z)
    assert np.max(np.abs(fwd - bwd)) <= 1e-14
