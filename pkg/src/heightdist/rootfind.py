"""Simultaneous root finding with residual-based error radii.

The workhorse is a vectorised Aberth-Ehrlich iteration in double precision.
Two refinements keep it usable on the integer polynomials that show up in
height computations, whose coefficients can be astronomically large:

* integer inputs are first Taylor-shifted by the small integer (0, 1 or -1)
  that minimises coefficient size, e.g. ``Phi_m(1 - x)`` becomes
  ``Phi_m(-y)``;
* when the estimated forward error of a double-precision root is still too
  large, Newton corrections are recomputed from the exact coefficients with
  gmpy2 at a working precision large enough to absorb the cancellation.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

import gmpy2
import numpy as np

from heightdist.errors import ClusterDetected, ConstantPolynomial, NoConvergence
from heightdist.zpoly import (
    IntPolynomial,
    squarefree_decomposition,
    strip_x_powers,
    taylor_shift,
)

EPS = np.finfo(float).eps
DEFAULT_TOL = 1e-13
DEFAULT_MAX_ITERS = 200
POLISH_STEPS = 3
# Relative forward-error estimate above which exact refinement kicks in.
ESCALATE_REL = 1e-11
# Fixed irrational angular offset for starting points.
_START_OFFSET = 0.5 * (math.sqrt(5.0) - 1.0)
_SCALE_DEGREE = 2**12
_SCALE_BITS = 960


@dataclass(frozen=True)
class ComplexPolynomial:
    """Floating complex coefficients, constant term first."""

    coeffs: np.ndarray
    # p_true = 2**scale_exponent * p_stored when built from huge integers.
    scale_exponent: int = 0

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.coeffs, dtype=np.complex128)).copy()
        nz = np.nonzero(c)[0]
        if nz.size == 0:
            raise ConstantPolynomial("zero polynomial")
        c = c[: nz[-1] + 1]
        if not np.all(np.isfinite(c)):
            raise ValueError("coefficients must be finite")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @classmethod
    def from_int(cls, p: IntPolynomial) -> "ComplexPolynomial":
        """Convert exactly representable coefficients; above degree 2**12 or
        when coefficients overflow doubles, divide by a shared power of two."""
        if p.is_zero():
            raise ConstantPolynomial("zero polynomial")
        bits = max(abs(c).bit_length() for c in p.coeffs)
        if p.degree <= _SCALE_DEGREE and bits <= _SCALE_BITS:
            return cls(np.array([float(c) for c in p.coeffs], dtype=np.complex128))
        e = bits - 1
        vals = [float(Fraction(c, 1 << e)) if e > 0 else float(c) for c in p.coeffs]
        if vals[-1] == 0.0 or vals[0] == 0.0 and p.coeffs[0] != 0:
            raise ValueError("coefficient range exceeds double precision")
        return cls(np.array(vals, dtype=np.complex128), scale_exponent=e)

    def __call__(self, z):
        return eval_with_derivative(self, z)[0]


@dataclass(frozen=True)
class RootSet:
    points: np.ndarray
    radii: np.ndarray
    source_degree: int

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.complex128).copy()
        rad = np.asarray(self.radii, dtype=float).copy()
        if pts.shape != rad.shape:
            raise ValueError("points and radii must have the same length")
        if not np.all(np.isfinite(rad)) or np.any(rad < 0):
            raise ValueError("radii must be finite and non-negative")
        pts.setflags(write=False)
        rad.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "radii", rad)

    def __len__(self) -> int:
        return len(self.points)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["re", "im", "radius"])
            for z, r in zip(self.points, self.radii):
                w.writerow([repr(float(z.real)), repr(float(z.imag)), repr(float(r))])


PolyLike = Union[ComplexPolynomial, IntPolynomial]


def cauchy_bound(p: PolyLike) -> float:
    """``1 + max_{i<D} |p_i| / |p_D|``; every root lies in that disk."""
    if isinstance(p, IntPolynomial):
        if p.is_zero() or p.degree < 1:
            raise ConstantPolynomial("constant polynomial has no roots")
        lead = abs(p.leading)
        return 1.0 + float(Fraction(max(abs(c) for c in p.coeffs[:-1]), lead))
    if p.degree < 1:
        raise ConstantPolynomial("constant polynomial has no roots")
    c = np.abs(p.coeffs)
    return float(1.0 + c[:-1].max() / c[-1])


def eval_with_derivative(p: ComplexPolynomial, z):
    """Horner evaluation of ``p(z)`` and ``p'(z)`` in a single pass."""
    z = np.asarray(z, dtype=np.complex128)
    val = np.zeros_like(z)
    der = np.zeros_like(z)
    for c in p.coeffs[::-1]:
        der = der * z + val
        val = val * z + c
    if val.ndim == 0:
        return complex(val), complex(der)
    return val, der


# ---------------------------------------------------------------- internals


def _newton_polygon_starts(absc: np.ndarray) -> np.ndarray:
    """Starting points on circles whose radii come from the upper convex hull
    of ``(i, log|c_i|)`` (one circle per hull edge)."""
    D = len(absc) - 1
    with np.errstate(divide="ignore"):
        logs = np.log(absc)
    idx = [i for i in range(D + 1) if np.isfinite(logs[i])]
    hull: list[int] = []
    for i in idx:
        while len(hull) >= 2:
            i1, i2 = hull[-2], hull[-1]
            # drop i2 if it lies on or below the chord from i1 to i
            if (logs[i2] - logs[i1]) * (i - i1) <= (logs[i] - logs[i1]) * (i2 - i1):
                hull.pop()
            else:
                break
        hull.append(i)
    pts = []
    for e, (a, b) in enumerate(zip(hull[:-1], hull[1:])):
        k = b - a
        radius = math.exp((logs[a] - logs[b]) / k)
        ang = 2.0 * math.pi * (np.arange(k) / k) + _START_OFFSET + 2.0 * math.pi * e / (len(hull) + 1)
        pts.append(radius * np.exp(1j * ang))
    return np.concatenate(pts)


_POWER_MATRIX_MAX_DEGREE = 1500


def _powers(t: np.ndarray, D: int) -> np.ndarray:
    """Matrix of ``t**k`` for k = 0..D (rows follow t); safe for |t| <= 1."""
    out = np.empty((len(t), D + 1), dtype=t.dtype)
    out[:, 0] = 1
    if D:
        out[:, 1:] = t[:, None]
        np.cumprod(out[:, 1:], axis=1, out=out[:, 1:])
    return out


def _horner_abs(c: np.ndarray, t: np.ndarray) -> np.ndarray:
    """``sum c_k t**k`` for non-negative reals, constant-first coefficients."""
    D = len(c) - 1
    if D <= _POWER_MATRIX_MAX_DEGREE:
        return _powers(t, D) @ c
    acc = np.zeros_like(t)
    for ck in c[::-1]:
        acc = acc * t + ck
    return acc


def _horner_pair(c: np.ndarray, z: np.ndarray):
    """Value and derivative for constant-first coefficients ``c``."""
    D = len(c) - 1
    if D <= _POWER_MATRIX_MAX_DEGREE:
        pw = _powers(z, D)
        return pw @ c, pw[:, :-1] @ (c[1:] * np.arange(1, D + 1))
    val = np.zeros_like(z)
    der = np.zeros_like(z)
    for ck in c[::-1]:
        der = der * z + val
        val = val * z + ck
    return val, der


def _newton_ratio(coeffs: np.ndarray, absc: np.ndarray, z: np.ndarray):
    """Newton correction ``p(z)/p'(z)`` plus a scaled residual
    ``|p(z)| / sum|c_i||z|^i`` and the evaluation error bound divided by |p'|.

    Points outside the unit disk are evaluated through the reversed polynomial
    at ``1/z`` to avoid overflow.
    """
    D = len(coeffs) - 1
    ratio = np.empty_like(z)
    scaled_res = np.empty(z.shape)
    err_over_der = np.empty(z.shape)
    inside = np.abs(z) <= 1.0
    if inside.any():
        zi = z[inside]
        v, d = _horner_pair(coeffs, zi)
        s = _horner_abs(absc, np.abs(zi))
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio[inside] = v / d
            scaled_res[inside] = np.abs(v) / s
            err_over_der[inside] = 2 * D * EPS * s / np.abs(d)
    out = ~inside
    if out.any():
        zo = z[out]
        w = 1.0 / zo
        q, dq = _horner_pair(coeffs[::-1], w)
        s = _horner_abs(absc[::-1], np.abs(w))
        with np.errstate(divide="ignore", invalid="ignore"):
            # p(z)/p'(z) = z q(w) / (D q(w) - w q'(w))
            den = D * q - w * dq
            ratio[out] = zo * q / den
            scaled_res[out] = np.abs(q) / s
            err_over_der[out] = 2 * D * EPS * s * np.abs(zo) / np.abs(den)
    return ratio, scaled_res, err_over_der


def _aberth_sums(z: np.ndarray) -> np.ndarray:
    diff = z[:, None] - z[None, :]
    np.fill_diagonal(diff, 1.0)
    inv = 1.0 / diff
    np.fill_diagonal(inv, 0.0)
    return inv.sum(axis=1)


def _aberth_double(coeffs: np.ndarray, tol: float, max_iters: int):
    absc = np.abs(coeffs)
    z = _newton_polygon_starts(absc)
    bound = 1.0 + absc[:-1].max() / absc[-1]
    big = np.abs(z) > bound
    z[big] *= bound / np.abs(z[big]) * 0.9
    active = np.ones(len(z), dtype=bool)
    converged = False
    for _ in range(max_iters):
        ratio, scaled_res, _ = _newton_ratio(coeffs, absc, z[active])
        s = _aberth_sums(z)[active]
        with np.errstate(divide="ignore", invalid="ignore"):
            w = ratio / (1.0 - ratio * s)
        bad = ~np.isfinite(w)
        w[bad] = 0.0
        za = z[active]
        done = (np.abs(w) <= tol * np.abs(za)) | (scaled_res <= 4 * len(coeffs) * EPS) | bad
        z[active] = za - w
        idx = np.nonzero(active)[0]
        active[idx[done]] = False
        if not active.any():
            converged = True
            break
    return z, converged


def _polish(coeffs: np.ndarray, z: np.ndarray) -> np.ndarray:
    absc = np.abs(coeffs)
    for _ in range(POLISH_STEPS):
        ratio, res_before, _ = _newton_ratio(coeffs, absc, z)
        cand = z - np.where(np.isfinite(ratio), ratio, 0.0)
        _, res_after, _ = _newton_ratio(coeffs, absc, cand)
        better = res_after <= res_before
        z = np.where(better, cand, z)
    return z


class _ExactEvaluator:
    """Evaluates p and p' at double-precision points from exact coefficients."""

    def __init__(self, exact_coeffs):
        self.is_int = all(isinstance(c, int) for c in exact_coeffs)
        if self.is_int:
            self.coeffs = [gmpy2.mpz(c) for c in exact_coeffs]
            self.bits = max(abs(c).bit_length() for c in exact_coeffs)
            self.absc = None
        else:
            self.coeffs = [gmpy2.mpc(complex(c)) for c in exact_coeffs]
            self.absc = [abs(complex(c)) for c in exact_coeffs]
            self.bits = max(math.frexp(a)[1] for a in self.absc) + 53
        self.D = len(exact_coeffs) - 1

    def precision(self, zmax: float) -> int:
        return 160 + self.bits + self.D * max(0, math.ceil(math.log2(max(zmax, 1.0)))) + self.D.bit_length()

    def eval(self, z: complex, prec: int):
        with gmpy2.context(precision=prec):
            zz = gmpy2.mpc(z)
            v = gmpy2.mpc(0)
            d = gmpy2.mpc(0)
            for c in reversed(self.coeffs):
                d = d * zz + v
                v = v * zz + c
            return complex(v), complex(d)


def _refine_exact(ev: _ExactEvaluator, z: np.ndarray, tol: float, max_iters: int):
    """Aberth iterations whose Newton corrections come from exact evaluation."""
    z = z.copy()
    active = np.ones(len(z), dtype=bool)
    for _ in range(max_iters):
        prec = ev.precision(float(np.abs(z).max()))
        idx = np.nonzero(active)[0]
        ratio = np.empty(len(idx), dtype=np.complex128)
        for k, i in enumerate(idx):
            v, d = ev.eval(complex(z[i]), prec)
            ratio[k] = v / d if d != 0 else 0.0
        s = _aberth_sums(z)[idx]
        with np.errstate(divide="ignore", invalid="ignore"):
            w = ratio / (1.0 - ratio * s)
        w[~np.isfinite(w)] = 0.0
        z[idx] = z[idx] - w
        done = np.abs(w) <= tol * np.maximum(np.abs(z[idx]), 1e-300)
        active[idx[done]] = False
        if not active.any():
            return z, True
    return z, False


def _exact_radii(ev: _ExactEvaluator, z: np.ndarray) -> np.ndarray:
    prec = ev.precision(float(np.abs(z).max()))
    D = ev.D
    out = np.empty(len(z))
    for i, zi in enumerate(z):
        v, d = ev.eval(complex(zi), prec)
        # evaluation error of the high-precision pass, relative to sum |c||z|^i
        if ev.is_int:
            slog = ev.bits + D * max(0.0, math.log2(max(abs(zi), 1e-300)))
        else:
            slog = math.log2(max(sum(a * abs(zi) ** k for k, a in enumerate(ev.absc)), 1e-300))
        err = 2.0 ** (slog - prec + 8)
        out[i] = D * (abs(v) + err) / abs(d) if d != 0 else math.inf
    return out


def _check_clusters(z: np.ndarray, radii: np.ndarray) -> None:
    if len(z) < 2:
        return
    dist = np.abs(z[:, None] - z[None, :])
    np.fill_diagonal(dist, np.inf)
    overlap = dist <= radii[:, None] + radii[None, :]
    if overlap.any():
        i, j = np.argwhere(overlap)[0]
        raise ClusterDetected(
            f"root disks overlap near {complex(z[i]):.6g} and {complex(z[j]):.6g}; "
            "pass a squarefree polynomial or raise precision"
        )


def _solve(coeffs: np.ndarray, exact_coeffs, tol: float, max_iters: int):
    """Roots of a polynomial with nonzero constant term, degree >= 1."""
    D = len(coeffs) - 1
    conv = True
    if D == 1:
        z = np.array([-coeffs[0] / coeffs[1]])
    else:
        z, conv = _aberth_double(coeffs, tol, max_iters)
        if conv:
            z = _polish(coeffs, z)
    absc = np.abs(coeffs)
    ratio, scaled_res, err_over_der = _newton_ratio(coeffs, absc, z)
    radii = D * (np.abs(ratio) + err_over_der)
    need_exact = (~np.isfinite(radii)) | (err_over_der > ESCALATE_REL * np.maximum(np.abs(z), 1e-300))
    if D > 1 and (need_exact.any() or not conv):
        ev = _ExactEvaluator(exact_coeffs)
        z, conv = _refine_exact(ev, z, tol, max_iters)
        if not conv:
            raise NoConvergence(f"exact refinement did not converge in {max_iters} iterations")
        radii = _exact_radii(ev, z)
    elif D > 1 and not np.all(np.isfinite(radii)):
        raise NoConvergence("root iteration produced non-finite values")
    if not np.all(np.isfinite(radii)):
        raise NoConvergence("could not certify every root")
    _check_clusters(z, radii)
    return z, radii


def _best_shift(p: IntPolynomial) -> tuple[int, IntPolynomial]:
    """Integer Taylor shift in {0, 1, -1} with the smallest coefficients."""
    best = (p.height().bit_length(), 0, p)
    if best[0] <= 24 or p.degree < 2:
        return 0, p
    for c in (1, -1):
        q = taylor_shift(p, c)
        size = q.height().bit_length()
        if size + 8 < best[0]:
            best = (size, c, q)
    return best[1], best[2]


def roots(p: PolyLike, tol: float = DEFAULT_TOL, max_iters: int = DEFAULT_MAX_ITERS) -> RootSet:
    """All complex roots of ``p`` with error radii ``deg*|p(z)|/|p'(z)|``.

    The input should be squarefree; repeated roots make the disks overlap and
    raise ClusterDetected. Roots at zero are returned exactly with radius 0.
    """
    if isinstance(p, IntPolynomial):
        if p.is_zero() or p.degree < 1:
            raise ConstantPolynomial("constant polynomial has no roots")
        D = p.degree
        k, core = strip_x_powers(p)
        zeros = np.zeros(k, dtype=np.complex128)
        if core.degree == 0:
            return RootSet(zeros, np.zeros(k), D)
        shift, q = _best_shift(core)
        fc = ComplexPolynomial.from_int(q).coeffs
        z, radii = _solve(np.asarray(fc), list(q.coeffs), tol, max_iters)
        z = z + shift
        pts = np.concatenate([zeros, z])
        rad = np.concatenate([np.zeros(k), radii])
        if k:
            _check_clusters(pts, rad)
        return RootSet(pts, rad, D)
    if p.degree < 1:
        raise ConstantPolynomial("constant polynomial has no roots")
    D = p.degree
    c = np.asarray(p.coeffs)
    nz = np.nonzero(c)[0][0]
    zeros = np.zeros(nz, dtype=np.complex128)
    core = c[nz:]
    if len(core) == 1:
        return RootSet(zeros, np.zeros(nz), D)
    z, radii = _solve(core, [complex(v) for v in core], tol, max_iters)
    pts = np.concatenate([zeros, z])
    rad = np.concatenate([np.zeros(nz), radii])
    if nz:
        _check_clusters(pts, rad)
    return RootSet(pts, rad, D)


def roots_with_multiplicity(p: IntPolynomial, tol: float = DEFAULT_TOL,
                            max_iters: int = DEFAULT_MAX_ITERS) -> RootSet:
    """Root multiset of an arbitrary integer polynomial, via squarefree layers.

    Points of a layer of multiplicity ``i`` are repeated ``i`` times.
    """
    if p.is_zero() or p.degree < 1:
        raise ConstantPolynomial("constant polynomial has no roots")
    pts, rad = [], []
    for f, mult in squarefree_decomposition(p):
        rs = roots(f, tol, max_iters)
        for _ in range(mult):
            pts.append(rs.points)
            rad.append(rs.radii)
    return RootSet(np.concatenate(pts), np.concatenate(rad), p.degree)
