"""Weighted-sup search: exactness on monomials, trace behavior, decay test."""

import math

import numpy as np
import pytest

from blochdiff import (Constant, Identity, Monomial, SamplingGrid, Scale, Sum,
                       bloch_norm, bloch_seminorm, little_bloch_test,
                       monomial_seminorm_exact, weighted_modulus)

from conftest import MEDIUM_GRID, SMALL_GRID, random_expr


class TestSamplingGrid:
    def test_needs_levels(self):
        with pytest.raises(ValueError):
            SamplingGrid(levels=3)

    def test_counts_strictly_increase(self):
        g = SamplingGrid(levels=8, c_ang=16)
        counts = [g.angular_count(j) for j in range(g.levels + 1)]
        assert all(b > a for a, b in zip(counts, counts[1:]))

    def test_all_points_inside_disk(self):
        g = SamplingGrid(levels=6, c_ang=8)
        assert np.max(np.abs(g.all_points)) < 1.0

    def test_center_is_single_point(self):
        g = SamplingGrid(levels=5, c_ang=32)
        assert len(g.rings[0]) == 1 and g.rings[0][0] == 0.0


class TestWeightedModulus:
    def test_identity_weight_only(self):
        assert weighted_modulus(Identity(), 0.0, 1.0) == 1.0
        z = 0.3 + 0.4j
        assert weighted_modulus(Identity(), z, 1.0) == pytest.approx(1.0 - abs(z) ** 2)

    def test_constant_vanishes(self):
        assert weighted_modulus(Constant(5.0), 0.5, 1.0) == 0.0

    def test_square_at_critical_radius(self):
        r = 1.0 / math.sqrt(3.0)
        assert weighted_modulus(Monomial(2), r, 1.0) == \
            pytest.approx(4.0 / (3.0 * math.sqrt(3.0)))


class TestBlochSeminorm:
    def test_identity_attained_at_origin(self):
        for alpha in (0.5, 1.0, 2.0):
            est = bloch_seminorm(Identity(), alpha, SMALL_GRID)
            assert est.value == pytest.approx(1.0, abs=1e-12)
            assert abs(est.argmax) < 1e-6

    def test_square(self):
        est = bloch_seminorm(Monomial(2), 1.0, SMALL_GRID)
        assert est.value == pytest.approx(4.0 / (3.0 * math.sqrt(3.0)), rel=1e-4)

    def test_cube(self):
        est = bloch_seminorm(Monomial(3), 1.0, SMALL_GRID)
        assert est.value == pytest.approx(0.75, rel=1e-4)

    def test_trace_monotone_and_ends_at_value(self):
        est = bloch_seminorm(Monomial(4), 1.5, SMALL_GRID)
        trace = est.level_trace
        assert all(b >= a for a, b in zip(trace, trace[1:]))
        assert trace[-1] == est.value
        assert est.converged

    def test_value_recomputable_from_argmax(self):
        f = Sum((Monomial(2), Scale(0.3j, Monomial(5))))
        est = bloch_seminorm(f, 1.0, SMALL_GRID)
        assert weighted_modulus(f, est.argmax, 1.0) == pytest.approx(est.value, rel=1e-12)

    def test_homogeneity(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            f = random_expr(rng)
            c = complex(rng.normal(), rng.normal())
            base = bloch_seminorm(f, 1.0, SMALL_GRID).value
            scaled = bloch_seminorm(Scale(c, f), 1.0, SMALL_GRID).value
            assert abs(scaled - abs(c) * base) <= 1e-10 * max(1.0, abs(c) * base)

    def test_triangle_inequality_sampled(self):
        rng = np.random.default_rng(6)
        for _ in range(15):
            f, g = random_expr(rng), random_expr(rng)
            sf = bloch_seminorm(f, 1.0, SMALL_GRID).value
            sg = bloch_seminorm(g, 1.0, SMALL_GRID).value
            sfg = bloch_seminorm(Sum((f, g)), 1.0, SMALL_GRID).value
            assert sfg <= sf + sg + 1e-8


class TestBlochNorm:
    def test_constant(self):
        assert bloch_norm(Constant(2.0 - 1.0j), 1.0, SMALL_GRID) == \
            pytest.approx(abs(2.0 - 1.0j))

    def test_identity(self):
        assert bloch_norm(Identity(), 1.0, SMALL_GRID) == pytest.approx(1.0, abs=1e-12)

    def test_square_plus_one(self):
        val = bloch_norm(Sum((Monomial(2), Constant(1.0))), 1.0, SMALL_GRID)
        assert val == pytest.approx(1.0 + 4.0 / (3.0 * math.sqrt(3.0)), rel=1e-4)


class TestMonomialExact:
    def test_n_one_any_alpha(self):
        for alpha in (0.25, 1.0, 3.0):
            assert monomial_seminorm_exact(1, alpha) == 1.0

    def test_n_two(self):
        assert monomial_seminorm_exact(2, 1.0) == \
            pytest.approx(4.0 / (3.0 * math.sqrt(3.0)))

    def test_scaling_converges(self):
        # exact(n, alpha) * n**(alpha-1) is Cauchy along doubling n
        for alpha in (0.5, 1.0, 2.0):
            vals = [monomial_seminorm_exact(2 ** k, alpha) * (2 ** k) ** (alpha - 1.0)
                    for k in range(4, 15)]
            diffs = [abs(b - a) for a, b in zip(vals, vals[1:])]
            assert all(d2 < d1 for d1, d2 in zip(diffs, diffs[1:]))

    def test_matches_grid_search_sample(self):
        for n in (1, 2, 5, 16, 64):
            for alpha in (0.5, 1.0, 2.0):
                est = bloch_seminorm(Monomial(n), alpha, MEDIUM_GRID)
                exact = monomial_seminorm_exact(n, alpha)
                assert est.value == pytest.approx(exact, rel=1e-4)

    def test_validation(self):
        with pytest.raises(ValueError):
            monomial_seminorm_exact(0, 1.0)
        with pytest.raises(ValueError):
            monomial_seminorm_exact(3, 0.0)


class TestLittleBloch:
    R_SCHEDULE = [1.0 - 2.0 ** (-j) for j in range(2, 15)]

    def test_polynomial_decays(self):
        f = Sum((Monomial(3), Scale(2.0, Identity())))
        rep = little_bloch_test(f, 1.0, self.R_SCHEDULE)
        assert rep.in_little_bloch

    def test_identity_trace_is_weight(self):
        rep = little_bloch_test(Identity(), 1.0, self.R_SCHEDULE)
        assert rep.in_little_bloch
        expected = [1.0 - r * r for r in self.R_SCHEDULE]
        np.testing.assert_allclose(rep.trace, expected, rtol=1e-12)

    def test_boundary_singularity_detected(self):
        class LogDeriv:
            # f'(z) = 1/(1 - z); the weighted trace tends to 2 along z = r
            def deriv(self, z):
                return 1.0 / (1.0 - z)

        rep = little_bloch_test(LogDeriv(), 1.0, self.R_SCHEDULE)
        assert not rep.in_little_bloch
        assert rep.trace[-1] == pytest.approx(2.0, abs=1e-2)

    def test_schedule_validation(self):
        with pytest.raises(ValueError):
            little_bloch_test(Identity(), 1.0, [0.5, 0.4, 0.6])
        with pytest.raises(ValueError):
            little_bloch_test(Identity(), 1.0, [0.5, 0.6])
