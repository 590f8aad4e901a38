"""Parser for rational transfer-function expressions in the Laplace variable.

Grammar:
    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := base ('^' unsigned-int)?
    base   := number | 's' | '(' expr ')'

Evaluation happens over the field of polynomial fractions; the result is
normalized to a monic denominator.  Numbers are plain decimals with an
optional exponent; no unit suffixes, no delays.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .statespace import ContinuousStateSpace

__all__ = ["RationalExpr", "ParseError", "parse_tf", "realize"]


class ParseError(ValueError):
    """Syntax or arithmetic error, with the byte offset of the problem."""

    def __init__(self, message, offset):
        self.offset = offset
        super().__init__(f"{message} (at byte {offset})")


def _trim(coeffs):
    c = list(coeffs)
    while len(c) > 1 and c[-1] == 0.0:
        c.pop()
    return c


def _poly_add(p, q):
    n = max(len(p), len(q))
    out = [0.0] * n
    for i, v in enumerate(p):
        out[i] += v
    for i, v in enumerate(q):
        out[i] += v
    return _trim(out)


def _poly_scale(p, a):
    return _trim([a * v for v in p])


def _poly_mul(p, q):
    out = [0.0] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if a == 0.0:
            continue
        for j, b in enumerate(q):
            out[i + j] += a * b
    return _trim(out)


def _is_zero(p):
    return all(v == 0.0 for v in p)


class _Fraction:
    """Polynomial fraction with ascending-power coefficient lists."""

    __slots__ = ("num", "den")

    def __init__(self, num, den):
        self.num = _trim(num)
        self.den = _trim(den)

    def add(self, other, sign=1.0):
        num = _poly_add(
            _poly_mul(self.num, other.den),
            _poly_scale(_poly_mul(other.num, self.den), sign),
        )
        return _Fraction(num, _poly_mul(self.den, other.den))

    def mul(self, other):
        return _Fraction(_poly_mul(self.num, other.num),
                         _poly_mul(self.den, other.den))

    def div(self, other, offset):
        if _is_zero(other.num):
            raise ParseError("division by the zero polynomial", offset)
        return _Fraction(_poly_mul(self.num, other.den),
                         _poly_mul(self.den, other.num))

    def pow(self, k):
        out = _Fraction([1.0], [1.0])
        for _ in range(k):
            out = out.mul(self)
        return out


@dataclass(frozen=True)
class RationalExpr:
    """Normalized polynomial fraction in s, ascending powers, monic denominator."""

    numerator: tuple
    denominator: tuple

    def __post_init__(self):
        num = _trim(self.numerator)
        den = _trim(self.denominator)
        if _is_zero(den):
            raise ValueError("denominator is the zero polynomial")
        lead = den[-1]
        num = [v / lead for v in num]
        den = [v / lead for v in den]
        object.__setattr__(self, "numerator", tuple(num))
        object.__setattr__(self, "denominator", tuple(den))

    @property
    def num_degree(self):
        return len(self.numerator) - 1

    @property
    def den_degree(self):
        return len(self.denominator) - 1

    @property
    def proper(self):
        return _is_zero(self.numerator) or self.num_degree <= self.den_degree

    @property
    def strictly_proper(self):
        return _is_zero(self.numerator) or self.num_degree < self.den_degree

    def eval(self, s):
        s = np.asarray(s, dtype=complex)
        num = sum(c * s ** i for i, c in enumerate(self.numerator))
        den = sum(c * s ** i for i, c in enumerate(self.denominator))
        return num / den

    def to_string(self):
        return f"({_poly_string(self.numerator)})/({_poly_string(self.denominator)})"


def _poly_string(coeffs):
    parts = []
    for i, c in enumerate(coeffs):
        if c == 0.0 and len(coeffs) > 1:
            continue
        if i == 0:
            parts.append(repr(float(c)))
        elif i == 1:
            parts.append(f"{c!r}*s")
        else:
            parts.append(f"{c!r}*s^{i}")
    if not parts:
        return "0.0"
    return " + ".join(parts)


_NUMBER = re.compile(r"(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?")


class _Parser:
    def __init__(self, text):
        self.text = text
        self.pos = 0

    def error(self, message):
        raise ParseError(message, self.pos)

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self):
        self.skip_ws()
        if self.pos < len(self.text):
            return self.text[self.pos]
        return ""

    def expr(self):
        sign = 1.0
        ch = self.peek()
        if ch in "+-":
            self.pos += 1
            sign = -1.0 if ch == "-" else 1.0
        value = self.term()
        if sign < 0:
            value = _Fraction(_poly_scale(value.num, -1.0), value.den)
        while True:
            ch = self.peek()
            if ch == "+":
                self.pos += 1
                value = value.add(self.term())
            elif ch == "-":
                self.pos += 1
                value = value.add(self.term(), sign=-1.0)
            else:
                return value

    def term(self):
        value = self.factor()
        while True:
            ch = self.peek()
            if ch == "*":
                self.pos += 1
                value = value.mul(self.factor())
            elif ch == "/":
                self.pos += 1
                at = self.pos
                value = value.div(self.factor(), at)
            else:
                return value

    def factor(self):
        value = self.base()
        if self.peek() == "^":
            self.pos += 1
            self.skip_ws()
            m = re.match(r"\d+", self.text[self.pos:])
            if not m:
                self.error("expected an unsigned integer exponent after '^'")
            self.pos += m.end()
            value = value.pow(int(m.group(0)))
        return value

    def base(self):
        ch = self.peek()
        if ch == "(":
            self.pos += 1
            value = self.expr()
            if self.peek() != ")":
                self.error("expected ')'")
            self.pos += 1
            return value
        if ch == "s":
            self.pos += 1
            return _Fraction([0.0, 1.0], [1.0])
        m = _NUMBER.match(self.text, self.pos)
        if m and m.start() == self.pos:
            self.pos = m.end()
            return _Fraction([float(m.group(0))], [1.0])
        self.error(f"unexpected character {ch!r}" if ch else "unexpected end of input")


def parse_tf(text):
    """Parse a rational expression in s into a normalized `RationalExpr`."""
    if not isinstance(text, str) or not text.strip():
        raise ParseError("empty expression", 0)
    p = _Parser(text)
    value = p.expr()
    p.skip_ws()
    if p.pos != len(text):
        p.error(f"trailing input {text[p.pos:]!r}")
    return RationalExpr(tuple(value.num), tuple(value.den))


def realize(expr):
    """Controllable-canonical state-space realization of a proper fraction.

    The frequency response of the realization matches direct polynomial
    evaluation; improper expressions are rejected.
    """
    if not expr.proper:
        raise ValueError(
            f"expression is improper (numerator degree {expr.num_degree} > "
            f"denominator degree {expr.den_degree})"
        )
    den = np.array(expr.denominator, dtype=float)
    num = np.zeros_like(den)
    num[: len(expr.numerator)] = expr.numerator
    n = den.size - 1

    if n == 0:
        return ContinuousStateSpace.gain(num[0] / den[0])

    d = num[n] / den[n]
    c = num[:n] - d * den[:n]
    A = np.zeros((n, n))
    A[:-1, 1:] = np.eye(n - 1)
    A[-1, :] = -den[:n]
    B = np.zeros((n, 1))
    B[-1, 0] = 1.0
    C = c.reshape(1, n)
    D = np.array([[d]])
    return ContinuousStateSpace(A, B, C, D)
