"""Tiny arithmetic expression language used for warp profiles and metric data.

Grammar::

    expr   := term (("+" | "-") term)*
    term   := unary (("*" | "/") unary)*
    unary  := ("+" | "-") unary | power
    power  := atom (("^" | "**") unary)?
    atom   := number | name | func "(" expr ")" | "(" expr ")"

Exponents must be constant (rational powers such as ``t^(1/2)``). Functions
are ``exp`` and ``sqrt``. Expressions compile to Python callables that accept
floats or numpy arrays.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

import numpy as np

from .errors import ExpressionError

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>\*\*|[-+*/^(),]))"
)
_FUNCS = ("exp", "sqrt")


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    stripped_end = len(text.rstrip())
    while pos < stripped_end:
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            raise ExpressionError("unexpected character", text, pos)
        kind = m.lastgroup
        tokens.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


@dataclass
class _Node:
    src: str
    constant: bool


class _Parser:
    def __init__(self, text: str, variables: tuple[str, ...]):
        self.text = text
        self.variables = variables
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value: str):
        kind, val, pos = self.take()
        if val != value:
            found = "end of input" if kind == "end" else repr(val)
            raise ExpressionError(f"expected {value!r}, found {found}", self.text, pos)

    def parse(self) -> _Node:
        if self.peek()[0] == "end":
            raise ExpressionError("empty expression", self.text, 0)
        node = self.expr()
        kind, val, pos = self.peek()
        if kind != "end":
            raise ExpressionError(f"unexpected token {val!r}", self.text, pos)
        return node

    def expr(self) -> _Node:
        node = self.term()
        while self.peek()[1] in ("+", "-"):
            op = self.take()[1]
            rhs = self.term()
            node = _Node(f"({node.src} {op} {rhs.src})", node.constant and rhs.constant)
        return node

    def term(self) -> _Node:
        node = self.unary()
        while self.peek()[1] in ("*", "/"):
            op = self.take()[1]
            rhs = self.unary()
            node = _Node(f"({node.src} {op} {rhs.src})", node.constant and rhs.constant)
        return node

    def unary(self) -> _Node:
        if self.peek()[1] in ("+", "-"):
            op = self.take()[1]
            inner = self.unary()
            return _Node(f"({op}{inner.src})", inner.constant)
        return self.power()

    def power(self) -> _Node:
        base = self.atom()
        if self.peek()[1] in ("^", "**"):
            _, _, pos = self.take()
            exponent = self.unary()
            if not exponent.constant:
                raise ExpressionError("exponent must be constant", self.text, pos)
            return _Node(f"_pow({base.src}, {exponent.src})", base.constant)
        return base

    def atom(self) -> _Node:
        kind, val, pos = self.take()
        if kind == "num":
            return _Node(repr(float(val)), True)
        if kind == "name":
            if val in _FUNCS:
                self.expect("(")
                inner = self.expr()
                self.expect(")")
                return _Node(f"_{val}({inner.src})", inner.constant)
            if val in self.variables:
                return _Node(val, False)
            raise ExpressionError(f"unknown name {val!r}", self.text, pos)
        if val == "(":
            inner = self.expr()
            self.expect(")")
            return inner
        found = "end of input" if kind == "end" else repr(val)
        raise ExpressionError(f"unexpected {found}", self.text, pos)


def _scalar_exp(x):
    if isinstance(x, np.ndarray):
        with np.errstate(over="ignore"):
            return np.exp(x)
    try:
        return math.exp(x)
    except OverflowError:
        return math.inf


def _scalar_sqrt(x):
    if isinstance(x, np.ndarray):
        with np.errstate(invalid="ignore"):
            return np.sqrt(x)
    return math.sqrt(x) if x >= 0 else math.nan


def _pow(base, exponent):
    if isinstance(base, np.ndarray):
        with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
            return np.power(base, exponent)
    try:
        out = float(base) ** exponent
    except ZeroDivisionError:
        return math.inf
    except OverflowError:
        return math.inf
    return out if isinstance(out, float) else math.nan


_ENV = {"_exp": _scalar_exp, "_sqrt": _scalar_sqrt, "_pow": _pow}


@dataclass(eq=False)
class Expression:
    """A parsed expression in the given variables."""

    text: str
    variables: tuple[str, ...] = ("t",)
    source: str = field(init=False)
    is_constant: bool = field(init=False)

    def __post_init__(self):
        if not isinstance(self.text, str):
            raise ExpressionError("expression must be a string", str(self.text))
        node = _Parser(self.text, tuple(self.variables)).parse()
        self.source = node.src
        self.is_constant = node.constant
        args = ", ".join(self.variables)
        code = f"lambda {args}: {node.src}" if args else f"lambda: {node.src}"
        self._fn = eval(code, dict(_ENV))  # noqa: S307 - source built from our own tokens

    def __call__(self, *args):
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            try:
                return self._fn(*args)
            except ZeroDivisionError:
                return math.inf

    def constant_value(self) -> float:
        if not self.is_constant:
            raise ExpressionError("expression is not constant", self.text)
        return float(self(*([0.0] * len(self.variables))))

    def __eq__(self, other):
        return isinstance(other, Expression) and (self.text, self.variables) == (other.text, other.variables)

    def __hash__(self):
        return hash((self.text, self.variables))
