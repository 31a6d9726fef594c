"""Text syntax for SuperPoly values.

Identifiers name chart generators; ``hbar`` and ``i`` are reserved scalars.
Supported: ``+ - * /`` (division by scalars only), ``^`` integer powers,
parentheses and rational literals such as ``3/4``.
"""
from __future__ import annotations

import re

from .superalg import Chart, ParityError, Scalar, SuperPoly

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z_0-9]*)|(\S))")


class ParseError(ValueError):
    def __init__(self, message, text, pos):
        self.pos = pos
        self.column = pos + 1
        super().__init__(f"{message} at column {pos + 1}: {text!r}")


def _tokenize(text):
    toks = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            break
        if m.end() == pos:
            break
        start = m.start(m.lastindex) if m.lastindex else m.start()
        if m.group(1) is not None:
            toks.append(("num", int(m.group(1)), start))
        elif m.group(2) is not None:
            toks.append(("id", m.group(2), start))
        elif m.group(3) is not None:
            toks.append(("op", m.group(3), start))
        pos = m.end()
    toks.append(("end", None, len(text)))
    return toks


class _Parser:
    def __init__(self, text, chart):
        self.text = text
        self.chart = chart
        self.toks = _tokenize(text)
        self.k = 0

    def peek(self):
        return self.toks[self.k]

    def take(self):
        t = self.toks[self.k]
        self.k += 1
        return t

    def fail(self, msg, tok=None):
        tok = tok or self.peek()
        raise ParseError(msg, self.text, tok[2])

    def expect(self, op):
        t = self.take()
        if t[0] != "op" or t[1] != op:
            self.fail(f"expected {op!r}", t)

    def parse(self):
        v = self.expr()
        if self.peek()[0] != "end":
            self.fail("unexpected token")
        return v

    def expr(self):
        v = self.term()
        while self.peek()[0] == "op" and self.peek()[1] in "+-":
            op = self.take()[1]
            w = self.term()
            v = v + w if op == "+" else v - w
        return v

    def term(self):
        v = self.unary()
        while self.peek()[0] == "op" and self.peek()[1] in "*/":
            tok = self.take()
            w = self.unary()
            if tok[1] == "*":
                v = v * w
            else:
                s = _as_scalar(w)
                if s is None:
                    self.fail("division by a non-scalar", tok)
                try:
                    v = v * s.inverse()
                except ZeroDivisionError:
                    self.fail("division by zero or by a multi-term scalar", tok)
        return v

    def unary(self):
        t = self.peek()
        if t[0] == "op" and t[1] in "+-":
            self.take()
            v = self.unary()
            return -v if t[1] == "-" else v
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[0] == "op" and self.peek()[1] == "^":
            tok = self.take()
            sign = 1
            if self.peek()[0] == "op" and self.peek()[1] in "+-":
                sign = -1 if self.take()[1] == "-" else 1
            n = self.take()
            if n[0] != "num":
                self.fail("expected an integer exponent", n)
            e = sign * n[1]
            if e < 0:
                s = _as_scalar(base)
                if s is None:
                    self.fail("negative powers are only allowed for scalars", tok)
                try:
                    return self.chart.const(s.inverse() ** (-e))
                except ZeroDivisionError:
                    self.fail("cannot invert", tok)
            try:
                return base ** e
            except ParityError:
                self.fail("powers are only allowed for even elements", tok)
        return base

    def atom(self):
        t = self.take()
        kind, val, _ = t
        if kind == "num":
            return self.chart.const(val)
        if kind == "id":
            if val == "hbar":
                return self.chart.const(Scalar.hbar())
            if val == "i":
                return self.chart.const(Scalar.i())
            if val not in self.chart:
                self.fail(f"unknown generator {val!r}", t)
            return self.chart(val)
        if kind == "op" and val == "(":
            v = self.expr()
            self.expect(")")
            return v
        self.fail("unexpected token", t)


def _as_scalar(p: SuperPoly):
    if all(m == () for (m, _, _) in p.terms):
        return Scalar({(h, ph): c for (_, h, ph), c in p.terms.items()})
    return None


def parse(text: str, chart: Chart) -> SuperPoly:
    if not isinstance(text, str):
        raise ParseError("expression must be a string", str(text), 0)
    return _Parser(text, chart).parse()


