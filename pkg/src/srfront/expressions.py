"""Tiny arithmetic expression parser for metric coefficients in config files.

Grammar (usual precedence, ^ binds tightest and is right-associative):

    expr   := term  (("+" | "-") term)*
    term   := unary (("*" | "/") unary)*
    unary  := ("+" | "-") unary | power
    power  := atom ("^" unary)?
    atom   := NUMBER | "x1" | "x2" | FUNC "(" expr ")" | "(" expr ")"

FUNC is one of sin cos tan sinh cosh tanh exp sqrt.  Compiled expressions are
plain callables of (x1, x2) and accept complex arguments, so charts built from
them support complex-step differentiation.
"""

from __future__ import annotations

import re

from .scalars import FUNCTIONS


class ExpressionError(ValueError):
    """Raised for malformed source or unknown names."""


_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+(?:\.\d*)?(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()]))"
)


def _tokenize(source):
    tokens = []
    pos = 0
    while pos < len(source):
        m = _TOKEN.match(source, pos)
        if m is None:
            if source[pos:].strip() == "":
                break
            raise ExpressionError(f"bad character {source[pos]!r} at position {pos}")
        pos = m.end()
        if m.group("num") is not None:
            tokens.append(("num", float(m.group("num"))))
        elif m.group("name") is not None:
            tokens.append(("name", m.group("name")))
        else:
            tokens.append(("op", m.group("op")))
    tokens.append(("end", None))
    return tokens


class _Parser:
    def __init__(self, source):
        self.source = source
        self.tokens = _tokenize(source)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_op(self, op):
        kind, value = self.take()
        if kind != "op" or value != op:
            raise ExpressionError(f"expected {op!r} in {self.source!r}")

    def parse(self):
        node = self.expr()
        if self.peek()[0] != "end":
            raise ExpressionError(f"trailing input in {self.source!r}")
        return node

    def expr(self):
        node = self.term()
        while self.peek() == ("op", "+") or self.peek() == ("op", "-"):
            op = self.take()[1]
            rhs = self.term()
            node = (lambda f, g: lambda x1, x2: f(x1, x2) + g(x1, x2))(node, rhs) \
                if op == "+" else \
                (lambda f, g: lambda x1, x2: f(x1, x2) - g(x1, x2))(node, rhs)
        return node

    def term(self):
        node = self.unary()
        while self.peek() == ("op", "*") or self.peek() == ("op", "/"):
            op = self.take()[1]
            rhs = self.unary()
            node = (lambda f, g: lambda x1, x2: f(x1, x2) * g(x1, x2))(node, rhs) \
                if op == "*" else \
                (lambda f, g: lambda x1, x2: f(x1, x2) / g(x1, x2))(node, rhs)
        return node

    def unary(self):
        if self.peek() == ("op", "-"):
            self.take()
            inner = self.unary()
            return lambda x1, x2: -inner(x1, x2)
        if self.peek() == ("op", "+"):
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek() == ("op", "^"):
            self.take()
            expo = self.unary()
            return lambda x1, x2: base(x1, x2) ** expo(x1, x2)
        return base

    def atom(self):
        kind, value = self.take()
        if kind == "num":
            return lambda x1, x2, v=value: v
        if kind == "name":
            if value == "x1":
                return lambda x1, x2: x1
            if value == "x2":
                return lambda x1, x2: x2
            if value in FUNCTIONS:
                fn = FUNCTIONS[value]
                self.expect_op("(")
                arg = self.expr()
                self.expect_op(")")
                return lambda x1, x2: fn(arg(x1, x2))
            raise ExpressionError(f"unknown name {value!r} in {self.source!r}")
        if kind == "op" and value == "(":
            node = self.expr()
            self.expect_op(")")
            return node
        raise ExpressionError(f"unexpected token in {self.source!r}")


class Expression:
    """A compiled scalar field of (x1, x2); callable for real or complex input."""

    def __init__(self, source):
        self.source = str(source)
        self._fn = _Parser(self.source).parse()

    def __call__(self, x1, x2):
        return self._fn(x1, x2)

    def __repr__(self):
        return f"Expression({self.source!r})"


def compile_expression(source):
    return Expression(source)
