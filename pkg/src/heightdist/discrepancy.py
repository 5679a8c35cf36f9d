"""Annulus and sector statistics with the radial, angular and Erdos-Turan bounds."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from heightdist.ensembles import OrbitEnsemble
from heightdist.errors import VanishingEndCoefficient
from heightdist.rootfind import RootSet, roots, roots_with_multiplicity
from heightdist.zpoly import IntPolynomial

TWO_PI = 2.0 * math.pi
ET_CONSTANT = 256


@dataclass(frozen=True)
class AnnulusSpec:
    """The closed annulus ``1/r <= |z| <= r``."""

    r: float

    def __post_init__(self):
        if not self.r > 1.0:
            raise ValueError(f"annulus needs r > 1, got {self.r}")


@dataclass(frozen=True)
class SectorSpec:
    """Arguments in ``[start_angle, start_angle + theta)`` modulo 2 pi."""

    start_angle: float
    theta: float

    def __post_init__(self):
        if not 0.0 <= self.theta <= TWO_PI:
            raise ValueError(f"theta must lie in [0, 2 pi], got {self.theta}")

    @property
    def full(self) -> bool:
        return self.theta >= TWO_PI


@dataclass(frozen=True)
class DiscrepancyReport:
    statistic: float
    bound: float
    boundary_warnings: int = 0
    params: dict = field(default_factory=dict)
    # Derived observables that are not part of the inequality itself.
    details: dict = field(default_factory=dict)

    @property
    def margin(self) -> float:
        return self.bound - self.statistic

    @property
    def holds(self) -> bool:
        return bool(self.statistic <= self.bound)

    def to_dict(self) -> dict:
        out = {
            "statistic": self.statistic,
            "bound": self.bound,
            "margin": self.margin,
            "holds": self.holds,
            "boundary_warnings": self.boundary_warnings,
            "params": self.params,
        }
        if self.details:
            out["details"] = self.details
        return out


def _angle_offsets(points: np.ndarray, start: float) -> np.ndarray:
    """Argument of each point minus ``start``, reduced into [0, 2 pi)."""
    u = np.mod(np.angle(points) - start, TWO_PI)
    # np.mod can round a tiny negative up to exactly 2 pi.
    u[u >= TWO_PI] = 0.0
    return u


def _check_nonzero(points: np.ndarray) -> None:
    if np.any(points == 0):
        raise ValueError("point sets must not contain 0")


def sector_count_with_warnings(points, sector: SectorSpec, radii=None) -> tuple[int, int]:
    """Sector count plus the number of points whose error disk meets a sector edge."""
    pts = np.asarray(points, dtype=np.complex128).reshape(-1)
    _check_nonzero(pts)
    if sector.full:
        return len(pts), 0
    u = _angle_offsets(pts, sector.start_angle)
    count = int(np.count_nonzero(u < sector.theta))
    if radii is None:
        return count, 0
    mod = np.abs(pts)
    rad = np.asarray(radii, dtype=float).reshape(-1)
    half_width = np.where(rad >= mod, np.inf, np.arcsin(np.minimum(rad / mod, 1.0)))
    d_start = np.minimum(u, TWO_PI - u)
    d_end = np.abs(u - sector.theta)
    d_end = np.minimum(d_end, TWO_PI - d_end)
    warn = int(np.count_nonzero(np.minimum(d_start, d_end) <= half_width))
    return count, warn


def sector_count(points, sector: SectorSpec) -> int:
    return sector_count_with_warnings(points, sector)[0]


def annulus_outside_with_warnings(points, annulus: AnnulusSpec, radii=None) -> tuple[int, int]:
    pts = np.asarray(points, dtype=np.complex128).reshape(-1)
    _check_nonzero(pts)
    mod = np.abs(pts)
    r = annulus.r
    count = int(np.count_nonzero((mod < 1.0 / r) | (mod > r)))
    if radii is None:
        return count, 0
    rad = np.asarray(radii, dtype=float).reshape(-1)
    near = (np.abs(mod - r) <= rad) | (np.abs(mod - 1.0 / r) <= rad)
    return count, int(np.count_nonzero(near))


def annulus_outside_count(points, annulus: AnnulusSpec) -> int:
    """Points with ``|z| < 1/r`` or ``|z| > r``."""
    return annulus_outside_with_warnings(points, annulus)[0]


def _ensemble_params(ens: OrbitEnsemble) -> dict:
    return {
        "label": ens.label,
        "card_S": ens.card_S,
        "m_S": ens.m_S,
        "h_S": ens.h_S,
        "m_S_mode": ens.m_S_mode,
        "num_sets": len(ens),
    }


def radial_bound(card_S: int, m_S: float, r: float) -> float:
    return 2.0 * card_S * m_S / math.log(r)


def angular_bound(card_S: int, h_S: float) -> float:
    return card_S * h_S


def radial_mean_stat(ens: OrbitEnsemble, annulus: AnnulusSpec) -> DiscrepancyReport:
    """Weighted mean of ``|set \\ A_r|`` against ``2 card_S m_S / log r``."""
    terms, warnings = [], 0
    for w, s, rad in zip(ens.weights, ens.conjugate_sets, ens.radii):
        c, bw = annulus_outside_with_warnings(s, annulus, rad)
        terms.append(w * c)
        warnings += bw
    params = _ensemble_params(ens) | {"r": annulus.r}
    return DiscrepancyReport(math.fsum(terms), radial_bound(ens.card_S, ens.m_S, annulus.r),
                             warnings, params)


def angular_mean_stat(ens: OrbitEnsemble, sector: SectorSpec) -> DiscrepancyReport:
    """Weighted mean of ``|Z - theta card_S / 2 pi|`` against ``card_S h_S``.

    The bound exceeds ``card_S`` at any realistic size, so the per-point
    statistic is reported as well to make trends visible.
    """
    expected = sector.theta * ens.card_S / TWO_PI
    terms, warnings = [], 0
    for w, s, rad in zip(ens.weights, ens.conjugate_sets, ens.radii):
        c, bw = sector_count_with_warnings(s, sector, rad)
        terms.append(w * abs(c - expected))
        warnings += bw
    stat = math.fsum(terms)
    params = _ensemble_params(ens) | {"start_angle": sector.start_angle, "theta": sector.theta}
    return DiscrepancyReport(stat, angular_bound(ens.card_S, ens.h_S), warnings, params,
                             {"statistic_per_point": stat / ens.card_S})


def _log_length_ratio(q) -> tuple[int, float]:
    """Degree and ``log(L(q) / sqrt|q_D q_0|)``, checking ``q_D q_0 != 0``."""
    if isinstance(q, IntPolynomial):
        if q.is_zero() or q.degree < 1:
            raise ValueError("need a polynomial of degree >= 1")
        c = q.coeffs
        if c[0] == 0 or c[-1] == 0:
            raise VanishingEndCoefficient("q_0 = 0; divide out the power of x first")
        length = sum(abs(v) for v in c)
        return q.degree, math.log(length) - 0.5 * (math.log(abs(c[0])) + math.log(abs(c[-1])))
    c = np.asarray(q.coeffs)
    if q.degree < 1:
        raise ValueError("need a polynomial of degree >= 1")
    if c[0] == 0:
        raise VanishingEndCoefficient("q_0 = 0; divide out the power of x first")
    a = np.abs(c)
    return q.degree, math.log(math.fsum(a)) - 0.5 * (math.log(a[0]) + math.log(a[-1]))


def erdos_turan_bound(q) -> float:
    D, lr = _log_length_ratio(q)
    return ET_CONSTANT * D * lr


def erdos_turan_check(q, sector: SectorSpec,
                      precomputed_roots: RootSet | None = None) -> DiscrepancyReport:
    """``(Z - theta D / 2 pi)^2`` against ``256 D log(L(q)/sqrt|q_D q_0|)``.

    ``q`` may be an IntPolynomial (roots counted with multiplicity through its
    squarefree layers) or a ComplexPolynomial (which must then be squarefree).
    """
    D, lr = _log_length_ratio(q)
    if precomputed_roots is None:
        rs = roots_with_multiplicity(q) if isinstance(q, IntPolynomial) else roots(q)
    else:
        rs = precomputed_roots
    if len(rs) != D:
        raise ValueError(f"{len(rs)} roots supplied for a degree-{D} polynomial")
    Z, warn = sector_count_with_warnings(rs.points, sector, rs.radii)
    stat = (Z - sector.theta * D / TWO_PI) ** 2
    params = {"degree": D, "start_angle": sector.start_angle, "theta": sector.theta,
              "log_length_ratio": lr}
    return DiscrepancyReport(stat, ET_CONSTANT * D * lr, warn, params, {"zero_count": Z})

