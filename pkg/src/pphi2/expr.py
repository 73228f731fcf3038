"""Arithmetic expressions over a single variable x.

Grammar: +, -, *, /, ^, exp, sin, cos, tanh, abs, parentheses, numeric
literals.  Compiled to numpy-vectorized closures; no eval().
"""

from __future__ import annotations

import re
from typing import Callable

import numpy as np

from .errors import ExpressionError

_FUNCS = {
    "exp": np.exp,
    "sin": np.sin,
    "cos": np.cos,
    "tanh": np.tanh,
    "abs": np.abs,
}

_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+\.?\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_]+)"
    r"|(?P<op>[-+*/^()]))"
)


def _tokenize(text):
    pos, out = 0, []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ExpressionError(f"bad character at position {pos}: {text[pos:]!r}")
        if m.group("num") is not None:
            out.append(("num", float(m.group("num"))))
        elif m.group("name") is not None:
            out.append(("name", m.group("name")))
        else:
            out.append(("op", m.group("op")))
        pos = m.end()
    return out


class _Parser:
    def __init__(self, tokens):
        self.toks = tokens
        self.i = 0

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else (None, None)

    def next(self):
        tok = self.peek()
        self.i += 1
        return tok

    def expect_op(self, op):
        kind, val = self.next()
        if kind != "op" or val != op:
            raise ExpressionError(f"expected {op!r}, got {val!r}")

    def parse(self):
        node = self.expr()
        if self.i != len(self.toks):
            raise ExpressionError(f"trailing tokens: {self.toks[self.i:]}")
        return node

    def expr(self):
        node = self.term()
        while self.peek() == ("op", "+") or self.peek() == ("op", "-"):
            _, op = self.next()
            rhs = self.term()
            node = (np.add if op == "+" else np.subtract, node, rhs)
        return node

    def term(self):
        node = self.unary()
        while self.peek() == ("op", "*") or self.peek() == ("op", "/"):
            _, op = self.next()
            rhs = self.unary()
            node = (np.multiply if op == "*" else np.divide, node, rhs)
        return node

    def unary(self):
        sign = 1.0
        while self.peek() in (("op", "-"), ("op", "+")):
            _, op = self.next()
            if op == "-":
                sign = -sign
        node = self.power()
        if sign < 0:
            node = (np.negative, node)
        return node

    def power(self):
        base = self.atom()
        if self.peek() == ("op", "^"):
            self.next()
            expo = self.unary()
            return (np.power, base, expo)
        return base

    def atom(self):
        kind, val = self.next()
        if kind == "num":
            return ("const", val)
        if kind == "name":
            if val == "x":
                return ("var",)
            if val in _FUNCS:
                self.expect_op("(")
                arg = self.expr()
                self.expect_op(")")
                return (_FUNCS[val], arg)
            raise ExpressionError(f"unknown name {val!r}")
        if (kind, val) == ("op", "("):
            node = self.expr()
            self.expect_op(")")
            return node
        raise ExpressionError(f"unexpected token {val!r}")


def _evaluate(node, x):
    head = node[0]
    if head == "const":
        return node[1]
    if head == "var":
        return x
    args = [_evaluate(child, x) for child in node[1:]]
    return head(*args)


def compile_expr(text: str) -> Callable[[np.ndarray], np.ndarray]:
    """Compile an expression string into a vectorized sampler f(x)."""
    node = _Parser(_tokenize(text)).parse()

    def sampler(x):
        x = np.asarray(x, dtype=float)
        out = _evaluate(node, x)
        return np.broadcast_to(np.asarray(out, dtype=float), x.shape).copy()

    sampler.expression = text
    return sampler
