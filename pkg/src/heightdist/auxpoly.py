"""Low-height integer multiples of a polynomial by lattice reduction, and the
auxiliary-polynomial route to the angular bound."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from heightdist.discrepancy import (
    TWO_PI,
    DiscrepancyReport,
    SectorSpec,
    erdos_turan_check,
    sector_count_with_warnings,
)
from heightdist.errors import DegreeTooSmall, NotPrimitive, ZeroIsRoot
from heightdist.heights import mean_height, siegel_bound
from heightdist.rootfind import roots
from heightdist.zpoly import IntPolynomial, content_primitive, poly_divexact, strip_x_powers


@dataclass(frozen=True)
class LatticeBasis:
    """Integer row vectors of a common dimension, constant term first."""

    rows: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        rows = tuple(tuple(int(v) for v in r) for r in self.rows)
        if not rows:
            raise ValueError("empty basis")
        if len({len(r) for r in rows}) != 1:
            raise ValueError("rows must share one dimension")
        object.__setattr__(self, "rows", rows)

    @property
    def dim(self) -> int:
        return len(self.rows[0])

    def __len__(self) -> int:
        return len(self.rows)

    def gram_determinant(self) -> int:
        """det(B B^T), the squared covolume, exactly."""
        return _gram_det(self.rows)

    def to_json(self) -> list[list[str]]:
        return [IntPolynomial(r).to_json() for r in self.rows]


def _dot(u, v) -> int:
    return sum(a * b for a, b in zip(u, v))


def _gram_det(rows) -> int:
    n = len(rows)
    g = [[Fraction(_dot(rows[i], rows[j])) for j in range(n)] for i in range(n)]
    det = Fraction(1)
    for c in range(n):
        piv = next((i for i in range(c, n) if g[i][c] != 0), None)
        if piv is None:
            return 0
        if piv != c:
            g[c], g[piv] = g[piv], g[c]
            det = -det
        det *= g[c][c]
        for i in range(c + 1, n):
            f = g[i][c] / g[c][c]
            if f:
                g[i] = [a - f * b for a, b in zip(g[i], g[c])]
    return int(det)


def multiples_lattice(p: IntPolynomial, L: int) -> LatticeBasis:
    """Rows ``x^i p`` for ``i = 0 .. L-1-deg p``: all multiples of degree < L."""
    if p.is_zero() or p.degree < 1:
        raise ValueError("need a polynomial of degree >= 1")
    d = p.degree
    if L <= d:
        raise DegreeTooSmall(f"need L > deg p = {d}, got L={L}")
    c = list(p.coeffs)
    return LatticeBasis(tuple(tuple([0] * i + c + [0] * (L - d - 1 - i)) for i in range(L - d)))


def lll_reduce(basis: LatticeBasis, delta: float | Fraction = Fraction(99, 100),
               with_transform: bool = False):
    """Integral LLL (Cohen, Algorithm 2.6.7): exact integer Gram-Schmidt data,
    no floating point.

    Returns the reduced basis, or ``(basis, U)`` with integer ``U`` such that
    ``U @ old_rows == new_rows`` when ``with_transform`` is set.
    """
    delta = Fraction(delta).limit_denominator(10**6)
    if not Fraction(1, 4) < delta < 1:
        raise ValueError("delta must lie in (1/4, 1)")
    num, den = delta.numerator, delta.denominator
    b = [list(r) for r in basis.rows]
    n = len(b)
    H = [[int(i == j) for j in range(n)] for i in range(n)] if with_transform else None
    d = [1] + [0] * n
    lam = [[0] * n for _ in range(n)]

    def red(k, l):
        if 2 * abs(lam[k][l]) > d[l + 1]:
            q = (2 * lam[k][l] + d[l + 1]) // (2 * d[l + 1])
            b[k] = [x - q * y for x, y in zip(b[k], b[l])]
            if H is not None:
                H[k] = [x - q * y for x, y in zip(H[k], H[l])]
            lam[k][l] -= q * d[l + 1]
            for i in range(l):
                lam[k][i] -= q * lam[l][i]

    def swap(k, kmax):
        b[k], b[k - 1] = b[k - 1], b[k]
        if H is not None:
            H[k], H[k - 1] = H[k - 1], H[k]
        for j in range(k - 1):
            lam[k][j], lam[k - 1][j] = lam[k - 1][j], lam[k][j]
        l = lam[k][k - 1]
        B = (d[k - 1] * d[k + 1] + l * l) // d[k]
        for i in range(k + 1, kmax + 1):
            t = lam[i][k]
            lam[i][k] = (d[k + 1] * lam[i][k - 1] - l * t) // d[k]
            lam[i][k - 1] = (B * t + l * lam[i][k]) // d[k + 1]
        d[k] = B

    d[1] = _dot(b[0], b[0])
    if d[1] == 0:
        raise ValueError("basis rows are linearly dependent")
    k, kmax = 1, 0
    while k < n:
        if k > kmax:
            kmax = k
            for j in range(k + 1):
                u = _dot(b[k], b[j])
                for i in range(j):
                    u = (d[i + 1] * u - lam[k][i] * lam[j][i]) // d[i]
                if j < k:
                    lam[k][j] = u
                else:
                    d[k + 1] = u
            if d[k + 1] == 0:
                raise ValueError("basis rows are linearly dependent")
        red(k, k - 1)
        if den * d[k + 1] * d[k - 1] < num * d[k] * d[k] - den * lam[k][k - 1] ** 2:
            swap(k, kmax)
            k = max(1, k - 1)
        else:
            for l in range(k - 2, -1, -1):
                red(k, l)
            k += 1
    out = LatticeBasis(tuple(tuple(r) for r in b))
    if with_transform:
        return out, tuple(tuple(r) for r in H)
    return out


def integer_height(F: IntPolynomial) -> float:
    """``log max|f_i| - log content(F)``."""
    return math.log(content_primitive(F)[1].height())


def short_multiple(p: IntPolynomial, L: int, delta: float | Fraction = Fraction(99, 100)
                   ) -> tuple[IntPolynomial, float, float]:
    """A short nonzero multiple of ``p`` of degree < L.

    Returns ``(F, achieved_height, siegel_rhs)``. ``F`` is the shortest row of
    the reduced basis with its power of x divided out and a positive leading
    coefficient; ``siegel_rhs`` is the absolute bound, for comparison only.
    """
    if p.is_zero() or p.degree < 1:
        raise ValueError("need a polynomial of degree >= 1")
    if p.coeffs[0] == 0:
        raise ZeroIsRoot("p(0) = 0")
    content, _ = content_primitive(p)
    if content != 1:
        raise NotPrimitive(f"content {content} != 1")
    hs = mean_height(p)
    reduced = lll_reduce(multiples_lattice(p, L), delta)
    row = min(reduced.rows, key=lambda r: (_dot(r, r), r))
    _, F = strip_x_powers(IntPolynomial(row))
    if F.leading < 0:
        F = -F
    poly_divexact(F, p)  # raises NotDivisible on an internal error
    return F, integer_height(F), siegel_bound(p.degree, hs.m_S, L)


def proof_degree(card_S: int, h_S: float) -> int:
    """``floor((1 + h_S/6) card_S)``."""
    return math.floor((1.0 + h_S / 6.0) * card_S)


def angular_via_auxpoly(p: IntPolynomial, sector: SectorSpec) -> DiscrepancyReport:
    """Sector discrepancy of the roots of ``p`` bounded through an auxiliary
    multiple ``F``:

        |Z_p - theta d/2pi| <= (D - d) + sqrt(ET(F)) + theta (D - d)/2pi

    where ``D = deg F``, ``d = deg p`` and ``ET(F)`` is the Erdos-Turan bound for F.
    """
    if p.is_zero() or p.degree < 2:
        raise ValueError("need deg p >= 2")
    hs = mean_height(p)
    d = p.degree
    L_proof = proof_degree(d, hs.h_S)
    L = max(d + 1, L_proof)
    F, achieved, siegel_rhs = short_multiple(p, L)
    D = F.degree
    et = erdos_turan_check(F, sector)
    rs = roots(p)
    Z, warn = sector_count_with_warnings(rs.points, sector, rs.radii)
    stat = abs(Z - sector.theta * d / TWO_PI)
    bound = (D - d) + math.sqrt(et.bound) + sector.theta * (D - d) / TWO_PI
    params = {"poly": str(p), "start_angle": sector.start_angle, "theta": sector.theta,
              "card_S": d, "m_S": hs.m_S, "h_S": hs.h_S, "L": L, "L_proof": L_proof}
    details = {
        "L_floored": L != L_proof,
        "F": F.to_json(),
        "deg_F": D,
        "achieved_height": achieved,
        "siegel_rhs": siegel_rhs,
        "height_ratio": achieved / siegel_rhs if siegel_rhs > 0 else None,
        "erdos_turan_F": et.to_dict(),
        "zero_count": Z,
    }
    return DiscrepancyReport(stat, bound, warn + et.boundary_warnings, params, details)
