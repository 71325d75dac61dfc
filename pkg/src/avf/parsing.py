"""Parser for the textual polynomial / rational-function syntax.

Grammar (no implicit multiplication; ``xy`` is one identifier)::

    expr   := term (("+" | "-") term)*
    term   := unary (("*" | "/") unary)*
    unary  := ("+" | "-") unary | power
    power  := atom ("^" INTEGER)?
    atom   := NUMBER | IDENT | "(" expr ")"
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import Sequence

from .algebra import Polynomial, RationalFunction, as_rational_function
from .errors import InputError


class ParseError(InputError):
    def __init__(self, message: str, text: str, position: int):
        super().__init__(f"{message} at position {position}: {text!r}")
        self.text = text
        self.position = position


_TOKEN = re.compile(r"\s*(?:(\d+(?:\.\d+)?)|([A-Za-z_][A-Za-z_0-9]*)|(\S))")


def _tokenize(text: str):
    pos = 0
    tokens = []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            break
        if m.group(0).strip() == "":
            break
        start = m.start(m.lastindex)
        if m.group(1):
            tokens.append(("num", m.group(1), start))
        elif m.group(2):
            tokens.append(("id", m.group(2), start))
        else:
            ch = m.group(3)
            if ch not in "+-*/^()":
                raise ParseError(f"unexpected character {ch!r}", text, start)
            tokens.append(("op", ch, start))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


def scan_identifiers(text: str) -> list[str]:
    """Identifiers in order of first appearance."""
    seen = []
    for kind, val, _ in _tokenize(text):
        if kind == "id" and val not in seen:
            seen.append(val)
    return seen


class _Parser:
    def __init__(self, text: str, vars: tuple):
        self.text = text
        self.vars = vars
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, val):
        kind, v, pos = self.take()
        if v != val or kind != "op":
            raise ParseError(f"expected {val!r}", self.text, pos)

    def parse(self) -> RationalFunction:
        if self.peek()[0] == "end":
            raise ParseError("empty expression", self.text, 0)
        r = self.expr()
        kind, v, pos = self.peek()
        if kind != "end":
            raise ParseError(f"unexpected token {v!r}", self.text, pos)
        return r

    def expr(self):
        r = self.term()
        while self.peek()[0] == "op" and self.peek()[1] in "+-":
            op = self.take()[1]
            rhs = self.term()
            r = r + rhs if op == "+" else r - rhs
        return r

    def term(self):
        r = self.unary()
        while self.peek()[0] == "op" and self.peek()[1] in "*/":
            op, pos = self.take()[1:]
            rhs = self.unary()
            if op == "*":
                r = r * rhs
            else:
                if rhs.is_zero():
                    raise ParseError("division by zero", self.text, pos)
                r = r / rhs
        return r

    def unary(self):
        kind, v, _ = self.peek()
        if kind == "op" and v in "+-":
            self.take()
            r = self.unary()
            return -r if v == "-" else r
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[0] == "op" and self.peek()[1] == "^":
            self.take()
            kind, v, pos = self.take()
            if kind != "num" or "." in v:
                raise ParseError("exponent must be a nonnegative integer", self.text, pos)
            return base ** int(v)
        return base

    def atom(self):
        kind, v, pos = self.take()
        if kind == "num":
            return as_rational_function(Fraction(v), self.vars)
        if kind == "id":
            if v not in self.vars:
                raise ParseError(f"unknown variable {v!r}", self.text, pos)
            return as_rational_function(Polynomial.var(v, self.vars))
        if kind == "op" and v == "(":
            r = self.expr()
            self.expect(")")
            return r
        raise ParseError(f"unexpected token {v or 'end of input'!r}", self.text, pos)


def parse_rational(text: str, vars: Sequence[str] | None = None) -> RationalFunction:
    vars = tuple(vars) if vars is not None else tuple(scan_identifiers(text))
    return _Parser(str(text), vars).parse()


def parse_expression(text: str, vars: Sequence[str] | None = None) -> Polynomial | RationalFunction:
    """Parse ``text``; returns a Polynomial whenever the denominator is constant."""
    r = parse_rational(text, vars)
    return r.as_polynomial() if r.is_polynomial() else r


def parse_polynomial(text: str, vars: Sequence[str] | None = None) -> Polynomial:
    r = parse_rational(text, vars)
    if not r.is_polynomial():
        raise InputError(f"expected a polynomial, got {r}")
    return r.as_polynomial()
