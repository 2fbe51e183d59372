"""Tiny closed-form expression grammar used by configs and field sampling.

Grammar (ASCII, case-sensitive):

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := '-' factor | power
    power  := atom ('^' factor)?
    atom   := number | 'x' | 'y' | name '(' expr (',' expr)* ')' | '(' expr ')'

Functions: abs, sin (one argument), min, max (two arguments). '^' is
exponentiation, right associative, binding tighter than unary minus so
-x^2 parses as -(x^2). Evaluation is vectorized over numpy arrays.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ExpressionError

_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+\.?\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[()+\-*/^,]))"
)

_FUNCS_1 = {"abs": np.abs, "sin": np.sin}
_FUNCS_2 = {"min": np.minimum, "max": np.maximum}


@dataclass
class Expression:
    """Parsed expression; call with coordinate arrays to evaluate."""

    text: str
    _fn: Callable
    variables: frozenset[str]

    def __call__(self, x, y=None):
        env = {"x": np.asarray(x, dtype=float)}
        if y is not None:
            env["y"] = np.asarray(y, dtype=float)
        missing = self.variables - env.keys()
        if missing:
            raise ExpressionError(
                f"expression {self.text!r} uses {sorted(missing)} but no such coordinate was supplied"
            )
        with np.errstate(all="ignore"):
            out = self._fn(env)
        return np.broadcast_to(np.asarray(out, dtype=float), np.shape(env["x"])).copy()


def _tokenize(text: str):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            # skip over whitespace-only tail
            if text[pos:].strip() == "":
                break
            raise ExpressionError(f"unexpected character {text[pos]!r}", pos)
        if m.lastgroup == "num":
            tokens.append(("num", float(m.group("num")), m.start("num")))
        elif m.lastgroup == "name":
            tokens.append(("name", m.group("name"), m.start("name")))
        else:
            tokens.append(("op", m.group("op"), m.start("op")))
        pos = m.end()
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0
        self.variables: set[str] = set()

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else (None, None, len(self.text))

    def next(self):
        tok = self.peek()
        self.i += 1
        return tok

    def expect_op(self, op: str):
        kind, val, pos = self.next()
        if kind != "op" or val != op:
            raise ExpressionError(f"expected {op!r}", pos)

    def parse(self):
        fn = self.expr()
        kind, val, pos = self.peek()
        if kind is not None:
            raise ExpressionError(f"trailing input {val!r}", pos)
        return fn

    def expr(self):
        fn = self.term()
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val in "+-":
                self.next()
                rhs = self.term()
                fn = (lambda a, b: lambda env: a(env) + b(env))(fn, rhs) if val == "+" else \
                     (lambda a, b: lambda env: a(env) - b(env))(fn, rhs)
            else:
                return fn

    def term(self):
        fn = self.factor()
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val in "*/":
                self.next()
                rhs = self.factor()
                fn = (lambda a, b: lambda env: a(env) * b(env))(fn, rhs) if val == "*" else \
                     (lambda a, b: lambda env: a(env) / b(env))(fn, rhs)
            else:
                return fn

    def factor(self):
        kind, val, _ = self.peek()
        if kind == "op" and val == "-":
            self.next()
            inner = self.factor()
            return lambda env: -inner(env)
        return self.power()

    def power(self):
        base = self.atom()
        kind, val, _ = self.peek()
        if kind == "op" and val == "^":
            self.next()
            exponent = self.factor()
            return lambda env: base(env) ** exponent(env)
        return base

    def atom(self):
        kind, val, pos = self.next()
        if kind == "num":
            return lambda env, c=val: c
        if kind == "name":
            if val in ("x", "y"):
                self.variables.add(val)
                return lambda env, v=val: env[v]
            if val in _FUNCS_1:
                self.expect_op("(")
                arg = self.expr()
                self.expect_op(")")
                return lambda env, f=_FUNCS_1[val], a=arg: f(a(env))
            if val in _FUNCS_2:
                self.expect_op("(")
                a = self.expr()
                self.expect_op(",")
                b = self.expr()
                self.expect_op(")")
                return lambda env, f=_FUNCS_2[val], a=a, b=b: f(a(env), b(env))
            raise ExpressionError(f"unknown name {val!r}", pos)
        if kind == "op" and val == "(":
            inner = self.expr()
            self.expect_op(")")
            return inner
        raise ExpressionError("expected a number, coordinate, function, or '('", pos)


def parse_expression(text: str) -> Expression:
    """Parse expression text into a callable Expression."""
    if not isinstance(text, str) or text.strip() == "":
        raise ExpressionError("empty expression")
    p = _Parser(text)
    fn = p.parse()
    return Expression(text=text, _fn=fn, variables=frozenset(p.variables))
