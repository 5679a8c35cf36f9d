import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from heightdist.discrepancy import sector_count
from heightdist.ensembles import OrbitEnsemble, galois_stable_ensemble, kummer_ensemble
from heightdist.equidist import (
    CUT_CLEARANCE,
    PartitionSpec,
    TestFunction,
    arc_integral,
    cell_counts,
    choose_offset,
    circle_integral,
    cut_clearance,
    decomposition_terms,
    default_N,
    lemma32_check,
    measure_integral,
    select_embeddings,
    test_function_library as function_library,
    thm31_mean_check,
    verify_constants,
)
from heightdist.errors import BadWindow, NoGap
from heightdist.heights import HeightSummary
from heightdist.zpoly import X

TAU = 2 * math.pi


def fn(evaluator, lip=0.0, sup=0.0, label="f"):
    return TestFunction(evaluator, lip, sup, label)


def _points_ensemble(points, m_S=0.0):
    pts = np.asarray(points, dtype=np.complex128)
    return OrbitEnsemble((pts,), np.ones(1), len(pts), HeightSummary.from_mean(len(pts), m_S), "pts")


def by_label(r, label):
    return next(f for f in function_library(r) if f.label == label)


# ------------------------------------------------------------- integrals

@pytest.mark.parametrize("k", [1, 2, 7, 100])
def test_circle_integral_of_powers(k):
    assert abs(circle_integral(fn(lambda z: z**k), 4096)) < 1e-12


def test_circle_integral_constants_and_log():
    assert circle_integral(fn(lambda z: np.ones_like(z)), 16) == pytest.approx(1, abs=1e-15)
    assert abs(circle_integral(fn(lambda z: np.log(np.abs(z))), 64)) < 1e-12
    with pytest.raises(ValueError):
        circle_integral(fn(lambda z: z), 8)


@given(st.integers(0, 10**6), st.integers(16, 512))
def test_circle_integral_exact_on_trig_polys(seed, nodes):
    rng = np.random.default_rng(seed)
    K = int(rng.integers(0, nodes))
    c = rng.normal(size=2 * K + 1) + 1j * rng.normal(size=2 * K + 1)
    ks = np.arange(-K, K + 1)

    def f(z):
        return np.exp(1j * np.outer(np.angle(z), ks)) @ c

    assert abs(circle_integral(fn(f), nodes) - c[K]) <= 1e-12 * max(1, np.abs(c).sum())


def test_arc_integral_matches_closed_form():
    assert arc_integral(fn(lambda z: z.real), 0, 0.25) == pytest.approx(1 / TAU, abs=1e-14)
    assert arc_integral(fn(lambda z: z), 0.1, 0.35) == pytest.approx(
        (np.exp(TAU * 0.35j) - np.exp(TAU * 0.1j)) / (TAU * 1j), abs=1e-14)


def test_measure_integral_examples():
    assert abs(measure_integral(fn(lambda z: z), np.exp(1j * np.pi * np.arange(4) / 2))) < 1e-15
    pts = galois_stable_ensemble(X**5 - 2).conjugate_sets[0]
    assert measure_integral(fn(np.abs), pts) == pytest.approx(2 ** 0.2, abs=1e-14)
    assert measure_integral(fn(np.ones_like), [1 + 1j, 3, -2j]) == 1
    with pytest.raises(ValueError):
        measure_integral(fn(np.abs), [])
    with pytest.raises(ValueError):
        measure_integral(fn(np.abs), [0j])


# ------------------------------------------------------------- library

@pytest.mark.parametrize("r", [1.05, 1.1, 1.5, 2.0])
def test_declared_constants_dominate_samples(r):
    lib = function_library(r)
    assert len(lib) == 19
    for f in lib:
        sup_seen, lip_seen = verify_constants(f, r, samples=4000, rng=np.random.default_rng(7))
        assert sup_seen <= f.sup_r * (1 + 1e-12) + 1e-15, f.label
        assert lip_seen <= f.lip_r * (1 + 1e-6) + 1e-12, f.label


def test_library_values():
    r = 1.5
    assert by_label(r, "re(z^1)").lip_r == 1 and by_label(r, "re(z^1)").sup_r == r
    assert by_label(r, "log|z|").lip_r == r
    assert by_label(r, "log|z|").sup_r == pytest.approx(math.log(r))
    out = by_label(r, "outside:1/|z|")
    assert list(out(np.array([1.0, 2.0, 0.5]))) == [0.0, 0.5, 2.0]
    with pytest.raises(ValueError):
        function_library(1.0)


# ------------------------------------------------------------- partition

def test_default_N():
    assert default_N(21.0) == 2
    assert default_N(1e-4) == 10
    assert default_N(kummer_ensemble(1009, 8).h_S) == 2


@pytest.mark.parametrize("N", [2, 5, 16])
def test_offset_for_roots_of_unity(N):
    ens = galois_stable_ensemble(X**N - 1)
    part = choose_offset(ens, N)
    assert part.offset_x == pytest.approx(math.pi / N, abs=1e-12)


def test_offset_single_point():
    part = choose_offset(_points_ensemble([1.0]), 4)
    assert part.offset_x == pytest.approx(math.pi / 4)
    with pytest.raises(ValueError):
        choose_offset(_points_ensemble([1.0]), 1)
    with pytest.raises(ValueError):
        PartitionSpec(1, 0.0)


def test_no_gap():
    rng = np.random.default_rng(3)
    ens = _points_ensemble(np.exp(1j * rng.uniform(0, TAU, 100_000)))
    with pytest.raises(NoGap):
        choose_offset(ens, 1_000_000)


@given(st.integers(0, 10**6), st.integers(2, 64))
def test_partition_identity_and_clearance(seed, N):
    rng = np.random.default_rng(seed)
    sets = int(rng.integers(1, 6))
    card = int(rng.integers(1, 40))
    pts = [rng.normal(size=card) + 1j * rng.normal(size=card) for _ in range(sets)]
    w = rng.uniform(0.1, 1, sets)
    ens = OrbitEnsemble(tuple(pts), w / w.sum(), card, HeightSummary.from_mean(card, 0.1), "rand")
    part = choose_offset(ens, N)
    assert cut_clearance(ens.all_points(), part) >= CUT_CLEARANCE
    for s in ens.conjugate_sets:
        counts, _ = cell_counts(s, part)
        assert counts.sum() == card
        # each point belongs to exactly one cell
        hits = sum(sector_count([z], part.cell(j)) for z in s for j in range(N))
        assert hits == card


# ------------------------------------------------------------- cell estimate

def test_lemma32_eighth_roots():
    pts = np.exp(2j * np.pi * np.arange(8) / 8)
    rep = lemma32_check(fn(lambda z: z.real, 1.0, 2.0), pts, 2.0, 0.0, 0.25)
    assert rep.details["in_window"] == 3
    expected = (1 + math.cos(math.pi / 4)) / 8 - 1 / TAU
    assert rep.statistic == pytest.approx(expected, abs=1e-14)
    assert rep.statistic == pytest.approx(0.05424, abs=1e-5)
    assert rep.bound == pytest.approx(4 * math.pi / 16 + 2 * (3 / 8 - 1 / 4))
    assert rep.holds


def test_lemma32_constant_function():
    pts = np.exp(1j * np.array([0.1, 0.2, 3.0, 4.0]))
    rep = lemma32_check(fn(lambda z: 3.0 * np.ones(z.shape), 0.0, 3.0), pts, 1.5, 0.0, 0.1)
    assert rep.statistic == pytest.approx(3 * abs(2 / 4 - 0.1), abs=1e-14)
    assert rep.bound == pytest.approx(rep.statistic, abs=1e-14)


@pytest.mark.parametrize("t0, t1", [(0.0, 0.6), (0.3, 0.3), (0.5, 0.2)])
def test_lemma32_bad_window(t0, t1):
    with pytest.raises(BadWindow):
        lemma32_check(fn(np.real), [1.0], 2.0, t0, t1)


@given(st.integers(0, 10**6), st.floats(1.01, 3.0), st.floats(-2, 2), st.floats(1e-3, 0.5))
def test_lemma32_random_windows(seed, r, t0, theta):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 200))
    pts = np.exp(rng.normal(0, 0.3, n)) * np.exp(1j * rng.uniform(0, TAU, n))
    for f in function_library(r):
        assert lemma32_check(f, pts, r, t0, t0 + theta).holds, f.label


# ------------------------------------------------------------- composite mean bound

@pytest.mark.parametrize("n", [2, 3, 10, 64])
def test_thm31_roots_of_unity(n):
    rep = thm31_mean_check(galois_stable_ensemble(X**n - 1), by_label(1.5, "re(z^1)"), 1.5)
    assert rep.statistic < 1e-14 and rep.holds


def test_thm31_x64_minus_2():
    f = by_label(1.5, "log|z|")
    rep = thm31_mean_check(galois_stable_ensemble(X**64 - 2), f, 1.5, N=4)
    assert rep.statistic == pytest.approx(math.log(2) / 64, abs=1e-12)
    assert rep.bound >= 4 * 1.5 * math.pi * f.lip_r / 4
    assert rep.holds


def test_thm31_outside_only_function():
    r = 1.1
    f = by_label(r, "outside:1/|z|")
    ens = galois_stable_ensemble(X**5 - 2)
    rep = thm31_mean_check(ens, f, r, N=2)
    assert rep.statistic == pytest.approx(2 ** -0.2, abs=1e-14)
    middle = rep.params["sup_outside"] * 2 * ens.m_S / math.log(r)
    assert rep.params["sup_outside"] == pytest.approx(2 ** -0.2)
    assert rep.bound == pytest.approx(middle)
    assert rep.statistic <= middle


@given(st.integers(3, 80), st.integers(1, 8), st.floats(1.01, 2.5), st.integers(2, 12))
def test_thm31_holds_on_kummer(m, n, r, N):
    ens = kummer_ensemble(m, n)
    for f in function_library(r):
        assert thm31_mean_check(ens, f, r, N=N, nodes=256).holds, f.label


@given(st.integers(3, 60), st.integers(1, 6), st.floats(1.01, 2.5), st.integers(2, 8))
def test_decomposition_dominates_deviation(m, n, r, N):
    ens = kummer_ensemble(m, n)
    part = choose_offset(ens, N)
    for f in function_library(r)[::3]:
        for term in decomposition_terms(ens, f, r, part):
            assert term["deviation"] <= term["outside_term"] + term["cell_terms"] + 1e-12


# ------------------------------------------------------------- embedding selection

@pytest.mark.parametrize("n", [1, 2, 9, 40])
@pytest.mark.parametrize("eps", [0.05, 0.5])
def test_select_roots_of_unity(n, eps):
    selected, rep = select_embeddings(galois_stable_ensemble(X**n - 1), 1.3, eps=eps)
    assert selected == [0] and rep.holds and rep.statistic == 0


def test_select_records_small_residues():
    m, n = 101, 2
    ens = kummer_ensemble(m, n)
    r = 3.0  # 1/3 > (2 sin(pi/101))^(1/2) ~ 0.249
    assert 1 / r > (2 * math.sin(math.pi / m)) ** (1 / n)
    _, rep = select_embeddings(ens, r, N=2, eps=0.25)
    assert 1 in rep.details["outside_annulus"]
    thr = rep.details["radial_threshold"]
    assert thr == pytest.approx(4 * n * ens.m_S / (0.25 * math.log(r)))
    # a = 1 fails the radial test exactly when the threshold is below n
    assert (1 in rep.details["failing_radial"]) == (thr < n)


def test_select_eps_near_one():
    ens = kummer_ensemble(31, 4)
    selected, rep = select_embeddings(ens, 1.05, eps=0.999)
    assert len(selected) == len(ens) and rep.holds


def test_select_argument_checks():
    ens = kummer_ensemble(7, 2)
    for kwargs in ({"eps": 0.0}, {"eps": 1.0}, {"degK": 0}):
        with pytest.raises(ValueError):
            select_embeddings(ens, 1.5, **kwargs)
    with pytest.raises(ValueError):
        select_embeddings(ens, 1.5, N=3, part=PartitionSpec(2, 0.1))


@given(st.integers(3, 120), st.integers(1, 8), st.floats(1.01, 3.0), st.floats(0.01, 0.99))
def test_select_fraction_property(m, n, r, eps):
    selected, rep = select_embeddings(kummer_ensemble(m, n), r, eps=eps)
    assert rep.holds
    assert rep.details["selected_fraction"] >= 1 - eps
