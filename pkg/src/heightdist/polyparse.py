"""Parser for integer polynomial literals such as ``x^64-2``, ``3x^2+(x-1)^3``,
``Phi(105)`` or ``compose1m(Phi(7), 5)`` (which means ``Phi_7(1 - x^5)``).

Grammar::

    expr   := ['+'|'-'] term (('+'|'-') term)*
    term   := factor (['*'] factor)*
    factor := atom ['^' INT]
    atom   := INT | 'x' | '(' expr ')' | 'Phi' '(' INT ')' | 'compose1m' '(' expr ',' INT ')'
"""

from __future__ import annotations

import re

from heightdist.zpoly import X, IntPolynomial, compose_shift_power, cyclotomic

_TOKEN = re.compile(r"\s*(?:(\d+)|(Phi|compose1m|x)|(\S))")


class PolyParseError(ValueError):
    pass


def _tokenize(text: str) -> list[tuple[str, str]]:
    out, pos = [], 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise PolyParseError(f"cannot tokenize at {text[pos:]!r}")
        num, name, sym = m.groups()
        if num is not None:
            out.append(("int", num))
        elif name is not None:
            out.append(("name", name))
        else:
            if sym not in "+-*^(),":
                raise PolyParseError(f"unexpected character {sym!r}")
            out.append(("sym", sym))
        pos = m.end()
    return out


class _Parser:
    def __init__(self, tokens):
        self.toks = tokens
        self.i = 0

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else (None, None)

    def take(self, kind=None, value=None):
        tok = self.peek()
        if tok[0] is None or (kind and tok[0] != kind) or (value and tok[1] != value):
            want = value or kind or "token"
            raise PolyParseError(f"expected {want}, got {tok[1]!r}")
        self.i += 1
        return tok

    def expr(self) -> IntPolynomial:
        sign = 1
        if self.peek() in (("sym", "+"), ("sym", "-")):
            sign = -1 if self.take()[1] == "-" else 1
        acc = self.term() * sign
        while self.peek() in (("sym", "+"), ("sym", "-")):
            op = self.take()[1]
            rhs = self.term()
            acc = acc + rhs if op == "+" else acc - rhs
        return acc

    def _starts_atom(self) -> bool:
        kind, val = self.peek()
        return kind in ("int", "name") or (kind, val) == ("sym", "(")

    def term(self) -> IntPolynomial:
        acc = self.factor()
        while True:
            if self.peek() == ("sym", "*"):
                self.take()
                acc = acc * self.factor()
            elif self._starts_atom():
                acc = acc * self.factor()
            else:
                return acc

    def factor(self) -> IntPolynomial:
        base = self.atom()
        if self.peek() == ("sym", "^"):
            self.take()
            return base ** int(self.take("int")[1])
        return base

    def atom(self) -> IntPolynomial:
        kind, val = self.peek()
        if kind == "int":
            self.take()
            return IntPolynomial.constant(int(val))
        if (kind, val) == ("name", "x"):
            self.take()
            return X
        if (kind, val) == ("sym", "("):
            self.take()
            inner = self.expr()
            self.take("sym", ")")
            return inner
        if (kind, val) == ("name", "Phi"):
            self.take()
            self.take("sym", "(")
            m = int(self.take("int")[1])
            self.take("sym", ")")
            if m < 1:
                raise PolyParseError("Phi needs m >= 1")
            return cyclotomic(m)
        if (kind, val) == ("name", "compose1m"):
            self.take()
            self.take("sym", "(")
            inner = self.expr()
            self.take("sym", ",")
            n = int(self.take("int")[1])
            self.take("sym", ")")
            if n < 1:
                raise PolyParseError("compose1m needs n >= 1")
            return compose_shift_power(inner, n)
        raise PolyParseError(f"unexpected token {val!r}")


def parse_poly(text: str) -> IntPolynomial:
    p = _Parser(_tokenize(text))
    if not p.toks:
        raise PolyParseError("empty polynomial literal")
    out = p.expr()
    if p.i != len(p.toks):
        raise PolyParseError(f"trailing input at token {p.toks[p.i][1]!r}")
    return out
