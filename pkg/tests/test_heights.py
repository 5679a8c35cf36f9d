import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from heightdist.errors import DegreeTooSmall, NodeOnRoot, NotPrimitive, NotSquarefree
from heightdist.heights import (
    HeightSummary,
    discrepancy_factor,
    log_mahler_measure,
    mahler_jensen,
    mahler_measure,
    mean_height,
    siegel_bound,
)
from heightdist.rootfind import roots
from heightdist.zpoly import X, IntPolynomial, compose_shift_power, cyclotomic, poly_mul, squarefree_part

from conftest import random_int_poly

GOLDEN = (1 + math.sqrt(5)) / 2
LEHMER = IntPolynomial((1, 1, 0, -1, -1, -1, -1, -1, 0, 1, 1))
# Largest real root of Lehmer's polynomial, from the literature.
LEHMER_M = 1.17628081825991750654


@pytest.mark.parametrize("n", [1, 2, 7, 30])
def test_mahler_roots_of_unity(n):
    assert mahler_measure(X**n - 1) == pytest.approx(1.0, abs=1e-12)


def test_mahler_golden():
    assert mahler_measure(X**2 - X - 1) == pytest.approx(GOLDEN, abs=1e-12)


def test_mahler_lehmer():
    assert mahler_measure(LEHMER) == pytest.approx(LEHMER_M, abs=1e-12)


def test_mahler_counts_multiplicity_and_ignores_content():
    assert mahler_measure((X - 3) ** 2 * (X + 1)) == pytest.approx(9.0)
    assert mahler_measure(6 * (X**2 - X - 1)) == pytest.approx(GOLDEN)


def test_jensen_examples():
    assert mahler_jensen(X - 2, 1024) == pytest.approx(2.0, abs=1e-9)
    # roots on the circle: first-order convergence only
    assert mahler_jensen(X**2 + X + 1, 4096) == pytest.approx(1.0, abs=1e-3)
    assert mahler_jensen(X**2 + X + 1, 4096, radius=1.01) == pytest.approx(1.0, abs=1e-12)
    assert mahler_jensen(X**2 - X - 1, 4096) == pytest.approx(GOLDEN, abs=1e-6)


def test_jensen_shifted_radius_handles_circle_roots():
    # Plain trapezoid converges like 1/nodes for Lehmer (roots on |z| = 1).
    assert abs(mahler_jensen(LEHMER, 1 << 12) - LEHMER_M) > 1e-7
    assert mahler_jensen(LEHMER, 1 << 16, radius=1 + 2**-10) == pytest.approx(LEHMER_M, abs=1e-12)


def test_jensen_root_on_contour():
    # root of 100x - 101 sits exactly on |z| = 1.01
    with pytest.raises(NodeOnRoot):
        mahler_jensen(100 * X - 101, 64, radius=1.01)


def test_mean_height_examples():
    for n in (1, 4, 9):
        hs = mean_height(X**n - 1)
        assert hs.m_S == pytest.approx(0, abs=1e-15)
        assert hs.h_S == pytest.approx(24 * (math.log(2 * n) / n) ** (1 / 3))
        assert hs.card_S == n
    assert mean_height(X**5 - 2).m_S == pytest.approx(math.log(2) / 5, abs=1e-12)
    hs = mean_height(X**4 - 3 * X**2 + 3)
    assert hs.m_S == pytest.approx(math.log(3) / 4, abs=1e-12)
    assert mahler_measure(X**4 - 3 * X**2 + 3) == pytest.approx(3.0)


def test_mean_height_warns_near_circle():
    hs = mean_height(X**8 - 1)
    assert hs.warnings
    assert not mean_height(X**5 - 2).warnings


def test_mean_height_preconditions():
    with pytest.raises(NotPrimitive):
        mean_height(2 * X**2 + 4)
    with pytest.raises(NotSquarefree):
        mean_height((X - 1) ** 2)


def test_summary_json():
    d = mean_height(X**5 - 2).to_dict()
    assert set(d) == {"card_S", "m_S", "h_S", "mahler_log", "warnings"}


def test_factorization_free_identity_matches_per_factor():
    f, g = X**2 - 2, X**3 - 3 * X + 5
    hs = mean_height(poly_mul(f, g))
    per_root = [math.log(mahler_measure(q)) / q.degree for q in (f, g) for _ in range(q.degree)]
    assert hs.m_S == pytest.approx(sum(per_root) / 5, rel=1e-12)


@pytest.mark.parametrize("card, m, L, expected", [
    (1, 0.0, 2, 1.25 * math.log(3)),
    (10, 0.1, 20, 10 / 11 * (1.5 * math.log(21) + 2.1) + math.log(21) / 2),
])
def test_siegel_bound_examples(card, m, L, expected):
    assert siegel_bound(card, m, L) == pytest.approx(expected, rel=1e-14)
    assert siegel_bound(card, m, L) == pytest.approx({2: 1.3733, 20: 7.583}[L], abs=1e-3)


def test_siegel_bound_degree_too_small():
    with pytest.raises(DegreeTooSmall):
        siegel_bound(5, 0.1, 5)


def test_h_formula():
    assert discrepancy_factor(1, 0.0) == pytest.approx(24 * math.log(2) ** (1 / 3))
    assert discrepancy_factor(1, 0.0) == pytest.approx(21.2399, abs=1e-4)
    hs = HeightSummary.from_mean(12, 0.3)
    assert hs.h_S == 24 * (0.3 + math.log(24) / 12) ** (1 / 3)


@given(st.integers(1, 10**4), st.floats(0, 10), st.floats(0, 10))
def test_h_monotone_in_m(card, a, b):
    lo, hi = sorted((a, b))
    assert discrepancy_factor(card, lo) <= discrepancy_factor(card, hi)


@given(st.integers(0, 10**6))
def test_mahler_multiplicative(seed):
    rng = np.random.default_rng(seed)
    p = random_int_poly(rng, int(rng.integers(1, 21)))
    q = random_int_poly(rng, int(rng.integers(1, 21)))
    lhs = mahler_measure(poly_mul(p, q))
    assert lhs == pytest.approx(mahler_measure(p) * mahler_measure(q), rel=1e-8)


@given(st.integers(0, 10**6))
def test_mahler_at_least_one(seed):
    rng = np.random.default_rng(seed)
    p = random_int_poly(rng, int(rng.integers(1, 21)))
    if p.coeffs[0] == 0:
        p = p + 1
    assert mahler_measure(p) >= 1 - 1e-12


def test_mahler_vs_jensen_random(rng):
    checked = 0
    for _ in range(60):
        p = random_int_poly(rng, int(rng.integers(1, 51)))
        if np.any(np.abs(np.abs(roots(squarefree_part(p)).points) - 1) < 1e-3):
            continue
        m = mahler_measure(p)
        assert abs(m - mahler_jensen(p, 1 << 14)) / m <= 1e-6
        checked += 1
    assert checked >= 30


@pytest.mark.parametrize("m", [3, 5, 7])
@pytest.mark.parametrize("n", [2, 3, 5])
def test_kummer_height_relation(m, n):
    base = mean_height(compose_shift_power(cyclotomic(m), 1)).m_S
    lifted = mean_height(squarefree_part(compose_shift_power(cyclotomic(m), n))).m_S
    assert lifted == pytest.approx(base / n, abs=1e-8)


@pytest.mark.parametrize("m", [3, 5, 7, 11, 12, 30])
def test_log_mahler_of_phi_composition(m):
    # roots of Phi_m(1 - x) are 1 - zeta for primitive zeta; only |1 - zeta| > 1 counts
    k = np.array([j for j in range(1, m) if math.gcd(j, m) == 1])
    mods = np.abs(1 - np.exp(2j * np.pi * k / m))
    expected = float(np.log(np.maximum(mods, 1)).sum())
    assert log_mahler_measure(compose_shift_power(cyclotomic(m), 1)) == pytest.approx(expected, abs=1e-12)
