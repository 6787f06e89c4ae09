"""Shared fixtures: grids, the regression family, random expression trees."""

import numpy as np
import pytest

from blochdiff import (Blaschke, Compose, Constant, DetectionThresholds,
                       Identity, Mobius, Monomial, Power, Product,
                       SamplingGrid, Scale, Sum, SymbolQuadruple,
                       default_n_schedule, evaluate_quadruple)

# Test-suite grid sizes: small for unit tests, medium for the regression
# family; the CLI default (levels=14, c_ang=64) stays out of the suite for
# runtime's sake.
SMALL_GRID = SamplingGrid(levels=8, c_ang=8, refinement_depth=10)
MEDIUM_GRID = SamplingGrid(levels=10, c_ang=16, refinement_depth=12)

N_SCHEDULE = default_n_schedule(4096)
R_SCHEDULE = [0.9, 0.99, 0.999]
THRESHOLDS = DetectionThresholds()


def family_members():
    """The regression family: ids, symbols, exponents.

    Covers the zero difference, compact pairs at three exponent choices,
    Blaschke and Mobius symbols, weight-only differences, the diverging
    alpha=2/beta=1 pair, and swapped variants of each interesting case.
    """
    half_z = Scale(0.5, Identity())
    third_z = Scale(1.0 / 3.0, Identity())
    neg_half_z = Scale(-0.5, Identity())
    one = Constant(1.0)
    zero = Constant(0.0)
    half_one_plus_z = Scale(0.5, Sum((Constant(1.0), Identity())))
    bl = Blaschke((0.3, -0.5j))
    mob = Mobius(0.3)
    return [
        ("zero_diff", half_z, half_z, one, one, 1.0, 1.0),
        ("compact_pair", half_z, third_z, one, one, 1.0, 1.0),
        ("compact_swap", third_z, half_z, one, one, 1.0, 1.0),
        ("blaschke_vs_half", bl, half_z, one, one, 1.0, 1.0),
        ("blaschke_swap", half_z, bl, one, one, 1.0, 1.0),
        ("unbounded_a2b1", Identity(), zero, one, zero, 2.0, 1.0),
        ("unbounded_swap", zero, Identity(), zero, one, 2.0, 1.0),
        ("rotation_pair", half_z, neg_half_z, one, one, 1.0, 1.0),
        ("weight_diff_small", half_z, half_z, one, half_one_plus_z, 1.0, 1.0),
        ("weight_diff_id", Identity(), Identity(), one, half_one_plus_z, 1.0, 1.0),
        ("compact_a05b1", half_z, third_z, one, one, 0.5, 1.0),
        ("compact_a2b1", half_z, third_z, one, one, 2.0, 1.0),
        ("mobius_vs_half", mob, half_z, one, one, 1.0, 1.0),
    ]


def family_quadruples():
    return [(mid, SymbolQuadruple(phi, psi, g, h, a, b))
            for mid, phi, psi, g, h, a, b in family_members()]


@pytest.fixture(scope="session")
def family_reports():
    """Full criterion reports for the regression family on the medium grid,
    computed once per session."""
    out = {}
    for mid, quad in family_quadruples():
        out[mid] = (quad, evaluate_quadruple(
            quad, MEDIUM_GRID, N_SCHEDULE, R_SCHEDULE, THRESHOLDS,
            a_per_ring=4, member_id=mid))
    return out


def random_disk_points(rng, count, radius=0.999):
    r = radius * np.sqrt(rng.random(count))
    t = 2.0 * np.pi * rng.random(count)
    return r * np.exp(1j * t)


def random_expr(rng, depth=0):
    """Random well-formed expression tree; leaves stay disk-friendly so
    compositions remain evaluable."""
    if depth >= 3 or rng.random() < 0.35:
        kind = rng.integers(0, 4)
        if kind == 0:
            return Constant(complex(rng.normal(), rng.normal()))
        if kind == 1:
            return Identity()
        if kind == 2:
            return Monomial(int(rng.integers(1, 7)))
        lam = 0.8 * np.sqrt(rng.random()) * np.exp(2j * np.pi * rng.random())
        return Mobius(complex(lam))
    kind = rng.integers(0, 5)
    if kind == 0:
        return Scale(complex(rng.normal(), rng.normal()), random_expr(rng, depth + 1))
    if kind == 1:
        return Sum(tuple(random_expr(rng, depth + 1)
                         for _ in range(int(rng.integers(2, 4)))))
    if kind == 2:
        return Product(tuple(random_expr(rng, depth + 1)
                             for _ in range(int(rng.integers(2, 4)))))
    if kind == 3:
        return Power(random_expr(rng, depth + 1), int(rng.integers(1, 4)))
    # composition: inner must map into the disk
    inner_kind = rng.integers(0, 3)
    if inner_kind == 0:
        inner = Scale(complex(0.6 * rng.random()), Identity())
    elif inner_kind == 1:
        lam = 0.7 * np.sqrt(rng.random()) * np.exp(2j * np.pi * rng.random())
        inner = Mobius(complex(lam))
    else:
        inner = Blaschke((complex(0.4 * rng.random()),
                          complex(0.4j * rng.random())))
    return Compose(random_expr(rng, depth + 1), inner)
