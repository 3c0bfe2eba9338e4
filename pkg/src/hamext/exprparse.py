"""Parser for inline coefficient expressions.

Accepts exactly the canonical fragment: rational numbers, the known
parameter names, declared position variables, sin/cos/sinh/cosh/tan/tanh of
a declared variable of the matching kind, and + - * / ^ with integer
powers.  Anything else is rejected with a pointed message so the exact
zero-test guarantee is never silently weakened.
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import List, Optional, Tuple

from .coeffs import CanonicalCoeff, VarSystem
from .params import PARAM_INDEX, ParamPoly, Q


class ExpressionError(ValueError):
    """Input is outside the supported coefficient grammar."""


_TOKEN = re.compile(r"""
    (?P<num>\d+(\.\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>\*\*|[()+\-*/^])
  | (?P<ws>\s+)
  | (?P<bad>.)
""", re.VERBOSE)

_FUNCTIONS = {
    "sin": ("S", 1), "cos": ("C", 1), "tan": ("T", 1),
    "sinh": ("S", -1), "cosh": ("C", -1), "tanh": ("T", -1),
}


def _tokenize(text: str) -> List[Tuple[str, str]]:
    out = []
    for m in _TOKEN.finditer(text):
        kind = m.lastgroup
        if kind == "ws":
            continue
        if kind == "bad":
            raise ExpressionError(f"unexpected character {m.group()!r} at "
                                  f"position {m.start()} in {text!r}")
        tok = m.group()
        out.append(("op", "^") if tok == "**" else (kind, tok))
    return out


class _Parser:
    def __init__(self, text: str, sys: VarSystem):
        self.text = text
        self.sys = sys
        self.toks = _tokenize(text)
        self.pos = 0

    def peek(self) -> Optional[Tuple[str, str]]:
        return self.toks[self.pos] if self.pos < len(self.toks) else None

    def take(self) -> Tuple[str, str]:
        tok = self.peek()
        if tok is None:
            raise ExpressionError(f"unexpected end of expression in {self.text!r}")
        self.pos += 1
        return tok

    def expect_op(self, op: str):
        tok = self.take()
        if tok != ("op", op):
            raise ExpressionError(f"expected {op!r}, found {tok[1]!r} in {self.text!r}")

    # expr := term (('+'|'-') term)*
    def expr(self) -> CanonicalCoeff:
        tok = self.peek()
        negate = False
        if tok == ("op", "-"):
            self.take()
            negate = True
        elif tok == ("op", "+"):
            self.take()
        value = self.term()
        if negate:
            value = -value
        while True:
            tok = self.peek()
            if tok == ("op", "+"):
                self.take()
                value = value + self.term()
            elif tok == ("op", "-"):
                self.take()
                value = value - self.term()
            else:
                return value

    # term := factor (('*'|'/') factor)*
    def term(self) -> CanonicalCoeff:
        value = self.factor()
        while True:
            tok = self.peek()
            if tok == ("op", "*"):
                self.take()
                value = value * self.factor()
            elif tok == ("op", "/"):
                self.take()
                value = value / self.factor()
            else:
                return value

    # factor := atom ('^' signed-int)?
    def factor(self) -> CanonicalCoeff:
        value = self.atom()
        if self.peek() == ("op", "^"):
            self.take()
            sign = 1
            if self.peek() == ("op", "-"):
                self.take()
                sign = -1
            kind, tok = self.take()
            if kind != "num" or "." in tok:
                raise ExpressionError(f"exponents must be integers, found {tok!r}")
            value = value ** (sign * int(tok))
        return value

    def atom(self) -> CanonicalCoeff:
        kind, tok = self.take()
        if kind == "op" and tok == "(":
            value = self.expr()
            self.expect_op(")")
            return value
        if kind == "op" and tok == "-":
            return -self.atom()
        if kind == "num":
            return self.sys.lift(ParamPoly.scalar(Q(Fraction(tok))))
        if kind == "name":
            if tok in _FUNCTIONS:
                return self.call(tok)
            if tok in PARAM_INDEX:
                return self.sys.param(tok)
            if tok in self.sys:
                v = self.sys.var(tok)
                if not v.is_linear:
                    raise ExpressionError(
                        f"{tok!r} is an angular variable; only "
                        f"sin({tok})-style generators are in the fragment"
                    )
                return self.sys.coord(tok)
            raise ExpressionError(
                f"unknown name {tok!r}; not a parameter, variable, or function"
            )
        raise ExpressionError(f"unexpected token {tok!r} in {self.text!r}")

    def call(self, fname: str) -> CanonicalCoeff:
        which, want_sign = _FUNCTIONS[fname]
        self.expect_op("(")
        kind, tok = self.take()
        if kind != "name" or tok not in self.sys:
            raise ExpressionError(
                f"{fname} takes a bare declared variable, found {tok!r}"
            )
        self.expect_op(")")
        v = self.sys.var(tok)
        if v.is_linear or v.rate != 1 or (1 if v.tag > 0 else -1) != want_sign \
                or abs(v.tag) != 1:
            raise ExpressionError(
                f"{fname}({tok}) needs {tok!r} declared "
                f"{'circular' if want_sign > 0 else 'hyperbolic'} with unit rate"
            )
        return getattr(self.sys, which)(tok)


def parse_coeff(text: str, sys: VarSystem) -> CanonicalCoeff:
    """Parse an inline expression into the exact coefficient ring."""
    parser = _Parser(text, sys)
    value = parser.expr()
    if parser.peek() is not None:
        raise ExpressionError(
            f"trailing input {parser.peek()[1]!r} in {text!r}"
        )
    return value
