"""Mahler measures, mean Weil heights and the derived bound factors.

All logarithms are natural.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from heightdist.errors import DegreeTooSmall, NodeOnRoot, NotPrimitive, NotSquarefree, ZeroPolynomial
from heightdist.rootfind import RootSet, roots
from heightdist.zpoly import IntPolynomial, content_primitive, is_squarefree, squarefree_decomposition

# Roots closer than this to |z| = 1 get flagged in HeightSummary.warnings.
NEAR_CIRCLE = 1e-9
_JENSEN_OFFSET = math.sqrt(2.0) - 1.0


@dataclass(frozen=True)
class HeightSummary:
    card_S: int
    m_S: float
    h_S: float
    mahler_log: float
    warnings: tuple[str, ...] = field(default=())

    def to_dict(self) -> dict:
        return {
            "card_S": self.card_S,
            "m_S": self.m_S,
            "h_S": self.h_S,
            "mahler_log": self.mahler_log,
            "warnings": list(self.warnings),
        }

    @classmethod
    def from_mean(cls, card_S: int, m_S: float, mahler_log: float | None = None,
                  warnings: tuple[str, ...] = ()) -> "HeightSummary":
        if mahler_log is None:
            mahler_log = card_S * m_S
        return cls(card_S, m_S, discrepancy_factor(card_S, m_S), mahler_log, tuple(warnings))


def discrepancy_factor(card_S: int, m_S: float) -> float:
    """``24 * (m_S + log(2 card_S) / card_S) ** (1/3)``."""
    if card_S < 1:
        raise ValueError("card_S must be positive")
    if m_S < 0:
        raise ValueError("m_S must be non-negative")
    return 24.0 * (m_S + math.log(2 * card_S) / card_S) ** (1.0 / 3.0)


def _log_measure_squarefree(f: IntPolynomial, rs: RootSet | None = None) -> tuple[float, int]:
    """log M of a squarefree primitive polynomial and the count of roots
    within NEAR_CIRCLE of the unit circle."""
    if f.degree == 0:
        return math.log(abs(f.leading)), 0
    if rs is None:
        rs = roots(f)
    mod = np.abs(rs.points)
    near = int(np.count_nonzero(np.abs(mod - 1.0) <= NEAR_CIRCLE))
    logs = np.log(np.maximum(mod[mod > 1.0], 1.0))
    return math.log(abs(f.leading)) + math.fsum(logs), near


def log_mahler_measure(p: IntPolynomial) -> float:
    return _log_mahler_with_flags(p)[0]


def _log_mahler_with_flags(p: IntPolynomial, rs: RootSet | None = None) -> tuple[float, int]:
    if p.is_zero():
        raise ZeroPolynomial("Mahler measure of the zero polynomial")
    _, pp = content_primitive(p)
    if pp.degree == 0:
        return 0.0, 0
    total, near = 0.0, 0
    layers = [(pp, 1)] if rs is not None else squarefree_decomposition(pp)
    for f, mult in layers:
        lm, nr = _log_measure_squarefree(f, rs)
        total += mult * lm
        near += mult * nr
    return total, near


def mahler_measure(p: IntPolynomial) -> float:
    """Mahler measure of the primitive part of ``p``.

    Repeated roots are handled through the squarefree layers of ``p``, each
    counted with its multiplicity. The content is not included.
    """
    if p.is_zero() or p.degree < 1:
        raise ValueError("Mahler measure needs a polynomial of degree >= 1")
    return math.exp(log_mahler_measure(p))


def _float_coeffs(p: IntPolynomial) -> np.ndarray:
    e = max(abs(c).bit_length() for c in p.coeffs) - 1
    if e <= 900:
        return np.array([float(c) for c in p.coeffs])
    return np.array([float(Fraction(c, 1 << e)) for c in p.coeffs])


def mahler_jensen(p: IntPolynomial, nodes: int = 4096, radius: float = 1.0) -> float:
    """Mahler measure by Jensen's formula, independent of the root finder.

    With ``radius == 1`` this is the periodic trapezoid average of ``log|p|``
    over ``nodes`` equally spaced points of the unit circle, shifted by a fixed
    irrational fraction of the spacing. Roots on the unit circle make that
    average converge only like 1/nodes.

    With ``radius = rho > 1`` the average is taken on ``|z| = rho`` instead,
    where Jensen gives ``log M + n(rho) log rho`` (``n`` = number of roots in
    ``|z| < rho``, found from the argument principle on the same nodes). This
    converges geometrically as long as no root modulus lies in ``(1, rho]``;
    such roots would bias the result by at most ``log rho`` each.
    """
    if p.is_zero() or p.degree < 1:
        raise ValueError("Mahler measure needs a polynomial of degree >= 1")
    if nodes < 1:
        raise ValueError("nodes must be positive")
    if radius < 1.0:
        raise ValueError("radius must be >= 1")
    _, pp = content_primitive(p)
    c = _float_coeffs(pp)
    scale = math.log(abs(pp.leading)) - math.log(abs(c[-1]))
    t = (np.arange(nodes) + _JENSEN_OFFSET) / nodes
    z = radius * np.exp(2j * np.pi * t)
    val = np.zeros(nodes, dtype=np.complex128)
    der = np.zeros(nodes, dtype=np.complex128)
    for ck in c[::-1]:
        der = der * z + val
        val = val * z + ck
    mag = np.abs(val)
    if np.any(mag == 0.0) or not np.all(np.isfinite(mag)):
        raise NodeOnRoot("polynomial vanishes (numerically) at a quadrature node")
    log_avg = math.fsum(np.log(mag)) / nodes + scale
    if radius == 1.0:
        return math.exp(log_avg)
    winding = float(np.mean(z * der / val).real)
    n_inside = round(winding)
    if abs(winding - n_inside) > 0.05:
        raise NodeOnRoot(f"argument principle count {winding:.4f} is not near an integer; "
                         "a root lies too close to the contour")
    return math.exp(log_avg - n_inside * math.log(radius))


def require_primitive_squarefree(p: IntPolynomial) -> None:
    content, _ = content_primitive(p)
    if content != 1:
        raise NotPrimitive(f"content {content} != 1")
    if not is_squarefree(p):
        raise NotSquarefree("polynomial has repeated roots")


def mean_height(p: IntPolynomial, precomputed_roots: RootSet | None = None) -> HeightSummary:
    """Mean Weil height of the full root set of a primitive squarefree ``p``.

    Mahler measure is multiplicative and all roots of one irreducible factor
    share the same height, so ``m_S = log M(p) / deg p`` without factoring.
    """
    if p.is_zero() or p.degree < 1:
        raise ValueError("mean_height needs a polynomial of degree >= 1")
    require_primitive_squarefree(p)
    logm, near = _log_mahler_with_flags(p, precomputed_roots)
    d = p.degree
    m_S = max(logm / d, 0.0)
    warnings = (f"{near} root(s) within {NEAR_CIRCLE:g} of the unit circle",) if near else ()
    return HeightSummary(d, m_S, discrepancy_factor(d, m_S), logm, warnings)


def siegel_bound(card_S: int, m_S: float, L: int) -> float:
    """Height bound for an auxiliary polynomial of degree < L vanishing on a
    set of card_S points with mean height m_S."""
    if L <= card_S:
        raise DegreeTooSmall(f"need L > card_S, got L={L}, card_S={card_S}")
    return card_S / (L + 1 - card_S) * (1.5 * math.log(L + 1) + (L + 1) * m_S) + math.log(L + 1) / 2

