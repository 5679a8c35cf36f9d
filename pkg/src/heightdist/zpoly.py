"""Exact arithmetic on polynomials with integer coefficients.

Polynomials are immutable and store their coefficients constant term first.
Every coefficient is a Python ``int``; nothing is ever rounded.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from heightdist.errors import NotDivisible, ZeroPolynomial

# Primes used for the modular coprimality shortcut in poly_gcd.
_GCD_PRIMES = (2**61 - 1, 2**59 - 55, 2**57 - 13)


@dataclass(frozen=True)
class IntPolynomial:
    """Integer polynomial, ``coeffs[i]`` is the coefficient of ``x**i``.

    Trailing zeros are stripped on construction, so the zero polynomial is
    the empty tuple and ``coeffs[-1]`` is always the leading coefficient.
    """

    coeffs: tuple[int, ...]

    def __post_init__(self):
        c = [int(v) for v in self.coeffs]
        while c and c[-1] == 0:
            c.pop()
        object.__setattr__(self, "coeffs", tuple(c))

    @classmethod
    def from_coeffs(cls, coeffs: Iterable[int]) -> "IntPolynomial":
        return cls(tuple(coeffs))

    @classmethod
    def monomial(cls, k: int, c: int = 1) -> "IntPolynomial":
        return cls((0,) * k + (c,))

    @classmethod
    def constant(cls, c: int) -> "IntPolynomial":
        return cls((c,))

    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def degree(self) -> int:
        if not self.coeffs:
            raise ZeroPolynomial("degree of the zero polynomial is undefined")
        return len(self.coeffs) - 1

    @property
    def leading(self) -> int:
        if not self.coeffs:
            raise ZeroPolynomial("zero polynomial has no leading coefficient")
        return self.coeffs[-1]

    def __call__(self, x):
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def __neg__(self) -> "IntPolynomial":
        return IntPolynomial(tuple(-c for c in self.coeffs))

    def __add__(self, other) -> "IntPolynomial":
        other = _coerce(other)
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, c in enumerate(b):
            out[i] += c
        return IntPolynomial(tuple(out))

    __radd__ = __add__

    def __sub__(self, other) -> "IntPolynomial":
        return self + (-_coerce(other))

    def __rsub__(self, other) -> "IntPolynomial":
        return _coerce(other) - self

    def __mul__(self, other) -> "IntPolynomial":
        return poly_mul(self, _coerce(other))

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "IntPolynomial":
        out = IntPolynomial((1,))
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def derivative(self) -> "IntPolynomial":
        return IntPolynomial(tuple(i * c for i, c in enumerate(self.coeffs))[1:])

    def height(self) -> int:
        """Largest absolute coefficient (0 for the zero polynomial)."""
        return max((abs(c) for c in self.coeffs), default=0)

    def to_json(self) -> list[str]:
        return [str(c) for c in self.coeffs]

    @classmethod
    def from_json(cls, data: Sequence) -> "IntPolynomial":
        return cls(tuple(int(c) for c in data))

    def __str__(self) -> str:
        if not self.coeffs:
            return "0"
        terms = []
        for i in range(len(self.coeffs) - 1, -1, -1):
            c = self.coeffs[i]
            if c == 0:
                continue
            sign = "-" if c < 0 else "+"
            a = abs(c)
            if i == 0:
                body = str(a)
            else:
                mono = "x" if i == 1 else f"x^{i}"
                body = mono if a == 1 else f"{a}*{mono}"
            terms.append((sign, body))
        first_sign, first = terms[0]
        out = ("-" if first_sign == "-" else "") + first
        for sign, body in terms[1:]:
            out += f" {sign} {body}"
        return out


def _coerce(v) -> IntPolynomial:
    if isinstance(v, IntPolynomial):
        return v
    if isinstance(v, int):
        return IntPolynomial((v,))
    raise TypeError(f"cannot treat {type(v).__name__} as an integer polynomial")


X = IntPolynomial((0, 1))


def poly_mul(a: IntPolynomial, b: IntPolynomial) -> IntPolynomial:
    """Exact product, schoolbook with zero skipping."""
    if a.is_zero() or b.is_zero():
        return IntPolynomial(())
    ac, bc = a.coeffs, b.coeffs
    if len(ac) < len(bc):
        ac, bc = bc, ac
    out = [0] * (len(ac) + len(bc) - 1)
    for j, y in enumerate(bc):
        if y == 0:
            continue
        for i, x in enumerate(ac):
            if x:
                out[i + j] += x * y
    return IntPolynomial(tuple(out))


def _divmod_exact_lead(a: Sequence[int], b: Sequence[int]) -> tuple[list[int], list[int]]:
    """Long division over Z; raises NotDivisible when a quotient coefficient
    would not be an integer."""
    r = list(a)
    db = len(b) - 1
    lb = b[-1]
    if len(r) - 1 < db:
        return [], r
    q = [0] * (len(r) - db)
    for i in range(len(r) - 1, db - 1, -1):
        c = r[i]
        if c == 0:
            continue
        t, rem = divmod(c, lb)
        if rem:
            raise NotDivisible("quotient has a non-integral coefficient")
        q[i - db] = t
        off = i - db
        for j in range(db):
            bj = b[j]
            if bj:
                r[off + j] -= t * bj
        r[i] = 0
    rem_part = r[:db]
    while rem_part and rem_part[-1] == 0:
        rem_part.pop()
    return q, rem_part


def poly_divexact(a: IntPolynomial, b: IntPolynomial) -> IntPolynomial:
    """Return ``q`` with ``a == b*q`` exactly, or raise NotDivisible."""
    if b.is_zero():
        raise ZeroPolynomial("division by the zero polynomial")
    if a.is_zero():
        return a
    q, r = _divmod_exact_lead(a.coeffs, b.coeffs)
    if r or (not q and not a.is_zero()):
        raise NotDivisible(f"({b}) does not divide ({a})")
    return IntPolynomial(tuple(q))


def divides(b: IntPolynomial, a: IntPolynomial) -> bool:
    try:
        poly_divexact(a, b)
    except NotDivisible:
        return False
    return True


def content_primitive(p: IntPolynomial) -> tuple[int, IntPolynomial]:
    """Split ``p`` as content times primitive part.

    The content is positive, so the primitive part keeps the sign of ``p``.
    """
    if p.is_zero():
        raise ZeroPolynomial("content of the zero polynomial")
    g = 0
    for c in p.coeffs:
        g = math.gcd(g, c)
        if g == 1:
            return 1, p
    return g, IntPolynomial(tuple(c // g for c in p.coeffs))


def _normalize(p: IntPolynomial) -> IntPolynomial:
    """Primitive part with positive leading coefficient."""
    _, pp = content_primitive(p)
    return -pp if pp.leading < 0 else pp


def _prem(a: list[int], b: list[int]) -> list[int]:
    """Pseudo-remainder of a by b (lists, constant first, no trailing zeros)."""
    r = list(a)
    db = len(b) - 1
    lb = b[-1]
    while r and len(r) - 1 >= db:
        lr = r[-1]
        shift = len(r) - 1 - db
        r = [lb * c for c in r]
        for j in range(db + 1):
            r[shift + j] -= lr * b[j]
        while r and r[-1] == 0:
            r.pop()
        if r:
            g = 0
            for c in r:
                g = math.gcd(g, c)
                if g == 1:
                    break
            if g > 1:
                r = [c // g for c in r]
    return r


def _mod_gcd_degree(a: Sequence[int], b: Sequence[int], q: int) -> int:
    """Degree of gcd(a mod q, b mod q) over GF(q)."""

    def trim(v):
        v = [c % q for c in v]
        while v and v[-1] == 0:
            v.pop()
        return v

    u, v = trim(a), trim(b)
    while v:
        inv = pow(v[-1], -1, q)
        dv = len(v) - 1
        while len(u) - 1 >= dv:
            t = u[-1] * inv % q
            off = len(u) - 1 - dv
            for j in range(dv):
                u[off + j] = (u[off + j] - t * v[j]) % q
            u.pop()
            while u and u[-1] == 0:
                u.pop()
        u, v = v, u
    return len(u) - 1


def _coprime_mod_certificate(a: IntPolynomial, b: IntPolynomial) -> bool:
    """True when a and b are certainly coprime over Q.

    For a prime q dividing neither leading coefficient, the gcd modulo q has
    degree at least that of the rational gcd, so a constant modular gcd
    certifies coprimality.
    """
    for q in _GCD_PRIMES:
        if a.leading % q and b.leading % q:
            return _mod_gcd_degree(a.coeffs, b.coeffs, q) == 0
    return False


def poly_gcd(a: IntPolynomial, b: IntPolynomial) -> IntPolynomial:
    """Primitive gcd over Z[x] with positive leading coefficient.

    Uses the primitive-part Euclidean scheme; a modular check short-circuits
    the common coprime case.
    """
    if a.is_zero() and b.is_zero():
        raise ZeroPolynomial("gcd(0, 0) is undefined")
    if a.is_zero():
        return _normalize(b)
    if b.is_zero():
        return _normalize(a)
    if a.degree == 0 or b.degree == 0:
        return IntPolynomial((1,))
    if _coprime_mod_certificate(a, b):
        return IntPolynomial((1,))
    u = list(_normalize(a).coeffs)
    v = list(_normalize(b).coeffs)
    if len(u) < len(v):
        u, v = v, u
    while v:
        r = _prem(u, v)
        u, v = v, r
    return _normalize(IntPolynomial(tuple(u)))


def is_squarefree(p: IntPolynomial) -> bool:
    if p.is_zero():
        raise ZeroPolynomial("squarefree test of the zero polynomial")
    if p.degree <= 1:
        return True
    return poly_gcd(p, p.derivative()).degree == 0


def squarefree_part(p: IntPolynomial) -> IntPolynomial:
    """Primitive squarefree polynomial with the same roots as ``p``."""
    if p.is_zero():
        raise ZeroPolynomial("squarefree part of the zero polynomial")
    _, pp = content_primitive(p)
    if pp.degree <= 1:
        return pp
    g = poly_gcd(pp, pp.derivative())
    if g.degree == 0:
        return pp
    return content_primitive(poly_divexact(pp, g))[1]


def squarefree_decomposition(p: IntPolynomial) -> list[tuple[IntPolynomial, int]]:
    """Yun's decomposition of the primitive part: ``pp = prod f_i**i``.

    Returns ``[(f_i, i), ...]`` skipping constant factors. The product of the
    factors can differ from the primitive part of ``p`` by a sign.
    """
    _, f = content_primitive(p)
    if f.degree == 0:
        return []
    fp = f.derivative()
    a0 = poly_gcd(f, fp)
    if a0.degree == 0:
        return [(f, 1)]
    b = poly_divexact(f, a0)
    c = poly_divexact(fp, a0)
    d = c - b.derivative()
    out = []
    i = 1
    while b.degree > 0:
        a = poly_gcd(b, d) if not d.is_zero() else _normalize(b)
        b = poly_divexact(b, a)
        c = poly_divexact(d, a)
        d = c - b.derivative()
        if a.degree > 0:
            out.append((a, i))
        i += 1
    return out


@functools.lru_cache(maxsize=256)
def cyclotomic(m: int) -> IntPolynomial:
    """m-th cyclotomic polynomial: x^m - 1 divided by every Phi_d, d | m, d < m."""
    if m < 1:
        raise ValueError("cyclotomic index must be positive")
    if m == 1:
        return IntPolynomial((-1, 1))
    q = IntPolynomial.monomial(m) - 1
    for d in _divisors(m)[:-1]:
        q = poly_divexact(q, cyclotomic(d))
    return q


def _divisors(m: int) -> list[int]:
    small, large = [], []
    d = 1
    while d * d <= m:
        if m % d == 0:
            small.append(d)
            if d * d != m:
                large.append(m // d)
        d += 1
    return small + large[::-1]


def euler_phi(m: int) -> int:
    out, k, p = m, m, 2
    while p * p <= k:
        if k % p == 0:
            while k % p == 0:
                k //= p
            out -= out // p
        p += 1
    if k > 1:
        out -= out // k
    return out


def compose_shift_power(p: IntPolynomial, n: int) -> IntPolynomial:
    """Return ``p(1 - x**n)`` by Horner's rule with a sparse multiplier."""
    if p.is_zero():
        raise ZeroPolynomial("composition of the zero polynomial")
    if n < 1:
        raise ValueError("n must be a positive integer")
    acc: list[int] = []
    for c in reversed(p.coeffs):
        # acc <- acc * (1 - x^n) + c
        new = acc + [0] * n if acc else []
        for i, v in enumerate(acc):
            if v:
                new[i + n] -= v
        if new:
            new[0] += c
        else:
            new = [c]
        acc = new
    return IntPolynomial(tuple(acc))


def taylor_shift(p: IntPolynomial, c: int) -> IntPolynomial:
    """Return ``p(x + c)`` exactly."""
    if c == 0 or p.is_zero():
        return p
    a = list(p.coeffs)
    n = len(a)
    for i in range(n - 1):
        for j in range(n - 2, i - 1, -1):
            a[j] += c * a[j + 1]
    return IntPolynomial(tuple(a))


def strip_x_powers(p: IntPolynomial) -> tuple[int, IntPolynomial]:
    """Split off the largest power of x: returns ``(k, p / x**k)``."""
    if p.is_zero():
        raise ZeroPolynomial("cannot strip powers of x from zero")
    k = 0
    while p.coeffs[k] == 0:
        k += 1
    return k, IntPolynomial(p.coeffs[k:])
