"""Test-function integrals, the sector partition, and the composite
equidistribution bound with its embedding-selection variant."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from heightdist.discrepancy import (
    TWO_PI,
    AnnulusSpec,
    DiscrepancyReport,
    SectorSpec,
    annulus_outside_with_warnings,
    sector_count_with_warnings,
)
from heightdist.ensembles import OrbitEnsemble
from heightdist.errors import BadWindow, NoGap

DEFAULT_NODES = 4096
_QUAD_OFFSET = math.sqrt(3.0) - 1.0
# Cuts closer than this to a point argument are not allowed.
CUT_CLEARANCE = 1e-9
# Closed windows: arguments this close (in turns) to an edge count as inside.
WINDOW_TOL = 1e-12
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(64)


@dataclass(frozen=True)
class TestFunction:
    """A function on C* with declared Lipschitz and sup constants on A_r."""

    __test__ = False  # not a pytest class

    evaluator: Callable[[np.ndarray], np.ndarray]
    lip_r: float
    sup_r: float
    label: str
    r: float | None = None

    def __call__(self, z) -> np.ndarray:
        return self.evaluator(np.asarray(z, dtype=np.complex128))


def _power_fn(k: int, part: str) -> Callable:
    if part == "re":
        return lambda z: (z ** k).real
    return lambda z: (z ** k).imag


def _log_abs(z):
    return np.log(np.abs(z))


def _dist_circle(z):
    return np.abs(np.abs(z) - 1.0)


def test_function_library(r: float) -> list[TestFunction]:
    """Bundled test functions with analytic constants on the closed annulus A_r.

    * ``Re z^k``, ``Im z^k`` (k <= 8): ``|z^k - w^k| <= k r^(k-1) |z - w|``
      on the disk of radius r; sup ``r^k``.
    * ``log|z|``: ``|log(a/b)| <= |a - b| / min(a, b) <= r |a - b|``; sup ``log r``.
    * ``||z| - 1|``: 1-Lipschitz; sup ``r - 1``.
    * zero on A_r and ``1/|z|`` outside: both constants vanish on A_r.
    """
    if not r > 1:
        raise ValueError("r must exceed 1")
    lib = []
    for k in range(1, 9):
        for part in ("re", "im"):
            lib.append(TestFunction(_power_fn(k, part), k * r ** (k - 1), r ** k,
                                    f"{part}(z^{k})", r))
    lib.append(TestFunction(_log_abs, r, math.log(r), "log|z|", r))
    lib.append(TestFunction(_dist_circle, 1.0, r - 1.0, "dist(z,circle)", r))

    def outside_only(z, r=r):
        mod = np.abs(z)
        inside = (mod >= 1.0 / r) & (mod <= r)
        with np.errstate(divide="ignore"):
            return np.where(inside, 0.0, 1.0 / mod)

    lib.append(TestFunction(outside_only, 0.0, 0.0, "outside:1/|z|", r))
    return lib


def _into_annulus(z: np.ndarray, r: float) -> np.ndarray:
    """Rescale moduli into A_r, a few ulps inside so rounding cannot leave it."""
    mod = np.abs(z)
    lo, hi = (1.0 / r) * (1 + 8e-16), r * (1 - 8e-16)
    return z * (np.clip(mod, lo, hi) / mod)


def sample_annulus(r: float, n: int, rng: np.random.Generator) -> np.ndarray:
    """Random points of A_r, a quarter of them on the two boundary circles."""
    rho = np.exp(rng.uniform(-math.log(r), math.log(r), n))
    rho[: n // 8] = r
    rho[n // 8: n // 4] = 1.0 / r
    return _into_annulus(rho * np.exp(1j * rng.uniform(0, TWO_PI, n)), r)


def verify_constants(f: TestFunction, r: float, samples: int = 2000,
                     rng: np.random.Generator | None = None) -> tuple[float, float]:
    """Largest sampled ``|f|`` and difference quotient on A_r; a declared
    constant smaller than either is wrong."""
    rng = np.random.default_rng(0) if rng is None else rng
    z = sample_annulus(r, samples, rng)
    v = f(z)
    sup_seen = float(np.max(np.abs(v)))
    w = sample_annulus(r, samples, rng)
    # Half the pairs are near neighbours, which probe the local slope.
    half = samples // 2
    w[:half] = _into_annulus(z[:half] * (1 + 1e-6 * np.exp(1j * rng.uniform(0, TWO_PI, half))), r)
    dz = np.abs(z - w)
    ok = dz > 0
    lip_seen = float(np.max(np.abs(v[ok] - f(w)[ok]) / dz[ok]))
    return sup_seen, lip_seen


def circle_integral(f: TestFunction, nodes: int = DEFAULT_NODES) -> complex:
    """Periodic trapezoid rule for the integral of ``f(e^{2 pi i t})`` over [0, 1]."""
    if nodes < 16:
        raise ValueError("nodes must be at least 16")
    t = (np.arange(nodes) + _QUAD_OFFSET) / nodes
    v = np.asarray(f(np.exp(2j * np.pi * t)), dtype=np.complex128)
    s = complex(math.fsum(v.real), math.fsum(v.imag)) / nodes
    return s


def arc_integral(f: TestFunction, t0: float, t1: float, panels: int = 4) -> complex:
    """Composite Gauss-Legendre integral of ``f(e^{2 pi i t})`` over [t0, t1]."""
    edges = np.linspace(t0, t1, panels + 1)
    total = 0j
    for a, b in zip(edges[:-1], edges[1:]):
        t = 0.5 * (b - a) * _GL_NODES + 0.5 * (a + b)
        v = np.asarray(f(np.exp(2j * np.pi * t)), dtype=np.complex128)
        total += 0.5 * (b - a) * complex(np.dot(_GL_WEIGHTS, v))
    return total


def measure_integral(f: TestFunction, points) -> complex:
    pts = np.asarray(points, dtype=np.complex128).reshape(-1)
    if pts.size == 0:
        raise ValueError("empty point set")
    if np.any(pts == 0):
        raise ValueError("point sets must not contain 0")
    v = np.asarray(f(pts), dtype=np.complex128)
    return complex(math.fsum(v.real), math.fsum(v.imag)) / pts.size


@dataclass(frozen=True)
class PartitionSpec:
    """Cells ``Delta_j`` of angle ``2 pi / N`` starting at ``offset_x + 2 pi j / N``."""

    N: int
    offset_x: float

    def __post_init__(self):
        if self.N < 2:
            raise ValueError("N must be >= 2")

    @property
    def width(self) -> float:
        return TWO_PI / self.N

    def cell(self, j: int) -> SectorSpec:
        return SectorSpec(self.offset_x + j * self.width, self.width)


def default_N(h_S: float) -> int:
    """``max(2, floor(h_S^(-1/4)))``."""
    return max(2, math.floor(h_S ** -0.25))


def choose_offset(ens: OrbitEnsemble, N: int) -> PartitionSpec:
    """Put the cuts in the middle of the widest gap between point arguments
    folded modulo ``2 pi / N``."""
    if N < 2:
        raise ValueError("N must be >= 2")
    width = TWO_PI / N
    folded = np.sort(np.mod(np.angle(ens.all_points()), width))
    gaps = np.diff(np.append(folded, folded[0] + width))
    k = int(np.argmax(gaps))
    if gaps[k] < 2 * CUT_CLEARANCE:
        raise NoGap(f"largest folded gap {gaps[k]:.3g} < {2 * CUT_CLEARANCE:g} for N={N}")
    return PartitionSpec(N, float(np.mod(folded[k] + 0.5 * gaps[k], width)))


def cut_clearance(points, part: PartitionSpec) -> float:
    """Smallest angular distance from a point argument to a cut."""
    folded = np.mod(np.angle(np.asarray(points)) - part.offset_x, part.width)
    return float(np.min(np.minimum(folded, part.width - folded)))


def cell_counts(points, part: PartitionSpec, radii=None) -> tuple[np.ndarray, int]:
    """Sector counts for every cell ``Delta_j`` and the total boundary warnings."""
    counts = np.zeros(part.N, dtype=np.int64)
    warnings = 0
    for j in range(part.N):
        counts[j], w = sector_count_with_warnings(points, part.cell(j), radii)
        warnings += w
    return counts, warnings


def _window_mask(points: np.ndarray, r: float, t0: float, theta: float) -> np.ndarray:
    mod = np.abs(points)
    in_ring = (mod >= 1.0 / r) & (mod <= r)
    s = np.mod(np.angle(points) / TWO_PI - t0, 1.0)
    in_arc = (s <= theta + WINDOW_TOL) | (s >= 1.0 - WINDOW_TOL)
    return in_ring & in_arc


def lemma32_check(f: TestFunction, points, r: float, t0: float, t1: float) -> DiscrepancyReport:
    """One cell of the composite bound.

    ``V`` is the closed region ``{rho e^{2 pi i t}: 1/r <= rho <= r, t0 <= t <= t1}``
    (``t`` taken modulo 1). The statistic is
    ``|sum_{T cap V} f / |T| - int_{t0}^{t1} f(e^{2 pi i t}) dt|`` using ``Re f``.
    """
    theta = t1 - t0
    # t0 + 1/2 - t0 may round past 1/2
    if not 0 < theta <= 0.5 + WINDOW_TOL:
        raise BadWindow(f"window length {theta} not in (0, 1/2]")
    theta = min(theta, 0.5)
    AnnulusSpec(r)
    pts = np.asarray(points, dtype=np.complex128).reshape(-1)
    if pts.size == 0 or np.any(pts == 0):
        raise ValueError("need a non-empty set of non-zero points")
    mask = _window_mask(pts, r, t0, theta)
    vals = np.real(f(pts[mask])) if mask.any() else np.zeros(0)
    mean_part = math.fsum(vals) / pts.size
    integral = arc_integral(f, t0, t1).real
    frac = mask.sum() / pts.size
    stat = abs(mean_part - integral)
    bound = 2 * r * math.pi * theta ** 2 * f.lip_r + f.sup_r * abs(frac - theta)
    params = {"f": f.label, "r": r, "t0": t0, "t1": t1, "lip_r": f.lip_r, "sup_r": f.sup_r}
    return DiscrepancyReport(float(stat), float(bound), 0, params,
                             {"in_window": int(mask.sum()), "card_T": int(pts.size)})


def outside_sup(f: TestFunction, ens: OrbitEnsemble, r: float) -> float:
    """Max ``|f|`` over every ensemble point outside A_r (0 if there are none)."""
    pts = ens.all_points()
    mod = np.abs(pts)
    out = pts[(mod < 1.0 / r) | (mod > r)]
    if out.size == 0:
        return 0.0
    return float(np.max(np.abs(f(out))))


def thm31_bound(lip: float, sup: float, sup_out: float, r: float, N: int,
                m_S: float, h_S: float) -> float:
    return (4 * r * math.pi * lip / N
            + (sup_out + 2 * sup) * 2 * m_S / math.log(r)
            + 2 * N * sup * h_S)


def thm31_mean_check(ens: OrbitEnsemble, f: TestFunction, r: float, N: int | None = None,
                     nodes: int = DEFAULT_NODES) -> DiscrepancyReport:
    """Weighted mean of ``|mean_k f - int f dlambda|`` against the composite bound."""
    AnnulusSpec(r)
    if N is None:
        N = default_N(ens.h_S)
    if N < 2:
        raise ValueError("N must be >= 2")
    haar = circle_integral(f, nodes)
    terms = [w * abs(measure_integral(f, s) - haar)
             for w, s in zip(ens.weights, ens.conjugate_sets)]
    stat = math.fsum(terms)
    sup_out = outside_sup(f, ens, r)
    bound = thm31_bound(f.lip_r, f.sup_r, sup_out, r, N, ens.m_S, ens.h_S)
    params = {"label": ens.label, "f": f.label, "r": r, "N": N, "nodes": nodes,
              "lip_r": f.lip_r, "sup_r": f.sup_r, "sup_outside": sup_out,
              "card_S": ens.card_S, "m_S": ens.m_S, "h_S": ens.h_S, "m_S_mode": ens.m_S_mode}
    return DiscrepancyReport(stat, bound, 0, params)


def decomposition_terms(ens: OrbitEnsemble, f: TestFunction, r: float,
                        part: PartitionSpec) -> list[dict]:
    """Per set: the deviation, the outside-A_r term and the per-cell window
    deviations (real and imaginary parts), whose sum dominates the deviation."""
    haar = circle_integral(f, DEFAULT_NODES)
    sup_out = outside_sup(f, ens, r)
    re_f = TestFunction(lambda z: np.real(f(z)), f.lip_r, f.sup_r, f"re {f.label}")
    im_f = TestFunction(lambda z: np.imag(f(z)), f.lip_r, f.sup_r, f"im {f.label}")
    t_start = part.offset_x / TWO_PI
    out = []
    for s in ens.conjugate_sets:
        n_out, _ = annulus_outside_with_warnings(s, AnnulusSpec(r))
        cells = 0.0
        for j in range(part.N):
            t0 = t_start + j / part.N
            t1 = t0 + 1.0 / part.N
            cells += lemma32_check(re_f, s, r, t0, t1).statistic
            cells += lemma32_check(im_f, s, r, t0, t1).statistic
        out.append({
            "deviation": abs(measure_integral(f, s) - haar),
            "outside_term": n_out / len(s) * sup_out,
            "cell_terms": cells,
        })
    return out


def select_embeddings(ens: OrbitEnsemble, r: float, N: int | None = None, eps: float = 0.25,
                      degK: int = 1, part: PartitionSpec | None = None
                      ) -> tuple[list[int], DiscrepancyReport]:
    """Indices of the sets meeting both the radial and every per-cell angular
    threshold, and a report whose statistic is the rejected fraction."""
    annulus = AnnulusSpec(r)
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    if degK < 1:
        raise ValueError("degK must be positive")
    if N is None:
        N = default_N(ens.h_S)
    if part is None:
        part = choose_offset(ens, N)
    elif part.N != N:
        raise ValueError("partition N does not match N")
    card = ens.card_S
    radial_thr = 4 * degK * card * ens.m_S / (eps * math.log(r))
    angular_thr = 2 * N * degK * card * ens.h_S / eps
    labels = ens.set_labels or tuple(range(len(ens)))
    selected, radial_fail, angular_fail, outside = [], [], [], []
    warnings = 0
    for k, (s, rad) in enumerate(zip(ens.conjugate_sets, ens.radii)):
        n_out, w1 = annulus_outside_with_warnings(s, annulus, rad)
        counts, w2 = cell_counts(s, part, rad)
        warnings += w1 + w2
        ok_r = n_out <= radial_thr
        ok_a = bool(np.all(np.abs(counts - card / N) <= angular_thr))
        if n_out:
            outside.append(labels[k])
        if not ok_r:
            radial_fail.append(labels[k])
        if not ok_a:
            angular_fail.append(labels[k])
        if ok_r and ok_a:
            selected.append(k)
    rejected = 1.0 - len(selected) / len(ens)
    params = {"label": ens.label, "r": r, "N": N, "offset_x": part.offset_x, "eps": eps,
              "degK": degK, "card_S": card, "m_S": ens.m_S, "h_S": ens.h_S,
              "m_S_mode": ens.m_S_mode, "num_sets": len(ens)}
    details = {
        "radial_threshold": radial_thr,
        "angular_threshold": angular_thr,
        "selected_fraction": len(selected) / len(ens),
        "failing_radial": radial_fail,
        "failing_angular": angular_fail,
        "outside_annulus": outside,
    }
    return selected, DiscrepancyReport(rejected, eps, warnings, params, details)
