"""Weighted families of conjugate point sets.

An ensemble stands in for the collection of images of a finite set S under
the embeddings of its field into C: a list of point sets, each of size
``card_S``, together with averaging weights.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import jsonschema
import numpy as np

from heightdist.errors import InvariantViolation, SchemaError, ZeroIsRoot
from heightdist.heights import HeightSummary, mean_height, require_primitive_squarefree
from heightdist.rootfind import DEFAULT_TOL, EPS, roots
from heightdist.zpoly import IntPolynomial, compose_shift_power, cyclotomic, euler_phi

WEIGHT_TOL = 1e-12
# Bound-mode height: every conjugate of 1 - zeta_m has modulus <= 2.
LOG2 = math.log(2.0)

ENSEMBLE_SCHEMA = {
    "type": "object",
    "required": ["label", "card_S", "m_S", "m_S_mode", "sets", "weights"],
    "properties": {
        "label": {"type": "string"},
        "card_S": {"type": "integer", "minimum": 1},
        "m_S": {"type": "number", "minimum": 0},
        "m_S_mode": {"enum": ["exact", "bound"]},
        "sets": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "array",
                "items": {
                    "type": "object",
                    "required": ["re", "im"],
                    "properties": {"re": {"type": "number"}, "im": {"type": "number"}},
                },
            },
        },
        "weights": {"type": "array", "items": {"type": "number"}},
        "set_labels": {"type": "array", "items": {"type": "integer"}},
    },
}


def _frozen(a, dtype) -> np.ndarray:
    arr = np.array(a, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class OrbitEnsemble:
    conjugate_sets: tuple[np.ndarray, ...]
    weights: np.ndarray
    card_S: int
    heights: HeightSummary
    label: str
    m_S_mode: str = "exact"
    # Per-point error radii, same shapes as conjugate_sets.
    radii: tuple[np.ndarray, ...] | None = None
    # Optional integer tag per set (the residue a for Kummer ensembles).
    set_labels: tuple[int, ...] | None = None

    def __post_init__(self):
        sets = tuple(_frozen(s, np.complex128).reshape(-1) for s in self.conjugate_sets)
        w = _frozen(self.weights, float).reshape(-1)
        object.__setattr__(self, "conjugate_sets", sets)
        object.__setattr__(self, "weights", w)
        if self.radii is None:
            rad = tuple(_frozen(8 * EPS * np.abs(s), float) for s in sets)
        else:
            rad = tuple(_frozen(r, float).reshape(-1) for r in self.radii)
        object.__setattr__(self, "radii", rad)
        if self.set_labels is not None:
            object.__setattr__(self, "set_labels", tuple(int(a) for a in self.set_labels))
        self._validate()

    def _validate(self) -> None:
        if self.card_S < 1:
            raise InvariantViolation("card_S must be positive")
        if not self.conjugate_sets:
            raise InvariantViolation("ensemble has no conjugate sets")
        if len(self.weights) != len(self.conjugate_sets):
            raise InvariantViolation(
                f"{len(self.weights)} weights for {len(self.conjugate_sets)} sets")
        for k, s in enumerate(self.conjugate_sets):
            if len(s) != self.card_S:
                raise InvariantViolation(f"set {k} has {len(s)} points, expected {self.card_S}")
            if not np.all(np.isfinite(s)):
                raise InvariantViolation(f"set {k} has a non-finite point")
            if np.any(s == 0):
                raise InvariantViolation(f"set {k} contains 0")
            if self.radii[k].shape != s.shape:
                raise InvariantViolation(f"radii of set {k} do not match its points")
        if not np.all(np.isfinite(self.weights)) or np.any(self.weights <= 0):
            raise InvariantViolation("weights must be positive")
        total = math.fsum(self.weights)
        if abs(total - 1.0) > WEIGHT_TOL:
            raise InvariantViolation(f"weights sum to {total!r}, not 1")
        if self.set_labels is not None and len(self.set_labels) != len(self.conjugate_sets):
            raise InvariantViolation("set_labels length mismatch")
        if self.m_S_mode not in ("exact", "bound"):
            raise InvariantViolation(f"unknown m_S_mode {self.m_S_mode!r}")

    @property
    def m_S(self) -> float:
        return self.heights.m_S

    @property
    def h_S(self) -> float:
        return self.heights.h_S

    def __len__(self) -> int:
        return len(self.conjugate_sets)

    def all_points(self) -> np.ndarray:
        return np.concatenate(self.conjugate_sets)

    def to_json(self) -> dict:
        out = {
            "label": self.label,
            "card_S": self.card_S,
            "m_S": self.m_S,
            "m_S_mode": self.m_S_mode,
            "sets": [[{"re": float(z.real), "im": float(z.imag)} for z in s]
                     for s in self.conjugate_sets],
            "weights": [float(w) for w in self.weights],
        }
        if self.set_labels is not None:
            out["set_labels"] = list(self.set_labels)
        return out

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), indent=1, sort_keys=True))


def _poly_label(p: IntPolynomial) -> str:
    text = str(p)
    return f"roots({text})" if len(text) <= 120 else f"roots(degree-{p.degree} polynomial)"


def galois_stable_ensemble(p: IntPolynomial, tol: float = DEFAULT_TOL) -> OrbitEnsemble:
    """The full root set of ``p``: every embedding maps it to itself."""
    if p.is_zero() or p.degree < 1:
        raise ValueError("need a polynomial of degree >= 1")
    if p.coeffs[0] == 0:
        raise ZeroIsRoot("p(0) = 0; 0 cannot belong to S")
    require_primitive_squarefree(p)
    rs = roots(p, tol)
    hs = mean_height(p, precomputed_roots=rs)
    return OrbitEnsemble(
        conjugate_sets=(rs.points,),
        weights=np.ones(1),
        card_S=p.degree,
        heights=hs,
        label=_poly_label(p),
        radii=(rs.radii,),
    )


@lru_cache(maxsize=64)
def height_one_minus_zeta(m: int) -> float:
    """h(1 - zeta_m) = log M(Phi_m(1 - x)) / phi(m)."""
    return mean_height(compose_shift_power(cyclotomic(m), 1)).m_S


def kummer_points(m: int, n: int, a: int) -> np.ndarray:
    """All n-th roots of gamma_a = 1 - exp(2 pi i a / m), from the polar form
    ``gamma_a = 2 sin(pi a/m) exp(i(pi a/m - pi/2))``."""
    modulus = (2.0 * math.sin(math.pi * a / m)) ** (1.0 / n)
    arg = math.pi * a / m - math.pi / 2
    ang = (arg + 2.0 * math.pi * np.arange(n)) / n
    return modulus * np.exp(1j * ang)


def kummer_ensemble(m: int, n: int, height_mode: str = "exact") -> OrbitEnsemble:
    """Sets ``S_a`` of n-th roots of ``1 - zeta_m^a`` for ``a`` coprime to ``m``,
    uniformly weighted.

    Heights use ``h(gamma^(1/n)) = h(gamma)/n``. With ``height_mode="bound"``
    the exact ``h(1 - zeta_m)`` is replaced by its upper bound ``log 2``.
    """
    if m < 3:
        raise ValueError("m must be >= 3")
    if n < 1:
        raise ValueError("n must be >= 1")
    if height_mode == "exact":
        h = height_one_minus_zeta(m)
    elif height_mode == "bound":
        h = LOG2
    else:
        raise ValueError(f"height_mode must be 'exact' or 'bound', got {height_mode!r}")
    residues = [a for a in range(1, m) if math.gcd(a, m) == 1]
    sets = tuple(kummer_points(m, n, a) for a in residues)
    k = len(residues)
    hs = HeightSummary.from_mean(n, h / n, mahler_log=euler_phi(m) * h)
    return OrbitEnsemble(
        conjugate_sets=sets,
        weights=np.full(k, 1.0 / k),
        card_S=n,
        heights=hs,
        label=f"kummer(m={m},n={n})",
        m_S_mode=height_mode,
        set_labels=tuple(residues),
    )


def ensemble_from_json(data: dict) -> OrbitEnsemble:
    try:
        jsonschema.validate(data, ENSEMBLE_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise SchemaError(exc.message) from exc
    sets = [np.array([complex(pt["re"], pt["im"]) for pt in s], dtype=np.complex128)
            for s in data["sets"]]
    weights = np.array(data["weights"], dtype=float)
    if len(weights) != len(sets):
        raise InvariantViolation(f"{len(weights)} weights for {len(sets)} sets")
    w_sum = math.fsum(weights)
    # Renormalising would hide the defect, so only report it.
    if abs(w_sum - 1.0) > WEIGHT_TOL:
        raise InvariantViolation(f"weights sum to {w_sum!r}, not 1")
    hs = HeightSummary.from_mean(data["card_S"], float(data["m_S"]))
    return OrbitEnsemble(
        conjugate_sets=tuple(sets),
        weights=weights,
        card_S=data["card_S"],
        heights=hs,
        label=data["label"],
        m_S_mode=data["m_S_mode"],
        set_labels=data.get("set_labels"),
    )


def load_ensemble(path) -> OrbitEnsemble:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError(f"not valid JSON: {exc}") from exc
    return ensemble_from_json(data)
