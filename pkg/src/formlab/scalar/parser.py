"""Recursive-descent parser for the expression grammar.

Grammar (precedence high to low)::

    atom    := INT | IDENT | IDENT '(' expr ')' | '(' expr ')'
    power   := atom ['^' unary]          (right associative)
    unary   := '-' unary | power
    term    := unary (('*' | '/') unary)*
    expr    := term (('+' | '-') term)*

A rational literal ``p/q`` is simply integer division and folds to a
constant. Calls to ``ln``, ``exp``, ``sin``, ``cos`` build builtins; any other
call is an opaque function, and ``name__dK(...)`` denotes its K-th derivative.
"""
from __future__ import annotations

import re

from ..errors import ExprSyntaxError, UnknownToken
from .expr import (BUILTINS, MINUS_ONE, Builtin, Opaque, Power, Product, Sum,
                   Symbol, const, normalize)

_TOKEN = re.compile(r"\s*(?:(?P<int>\d+)|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)|(?P<op>[-+*/^()]))")
_DERIV = re.compile(r"^(?P<name>[A-Za-z_][A-Za-z0-9_]*?)__d(?P<order>\d+)$")


def tokenize(text: str):
    """Yield ``(kind, value, byte_offset)``; kind is 'int', 'ident', 'op' or 'end'."""
    pos = 0
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos >= len(text):
            yield ("end", "", len(text.encode()))
            return
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            offset = len(text[:pos].encode())
            raise UnknownToken(f"unknown token {text[pos]!r}", text, offset)
        kind = m.lastgroup
        start = m.start(kind)
        yield (kind, m.group(kind), len(text[:start].encode()))
        pos = m.end()


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = list(tokenize(text))
        self.i = 0

    @property
    def tok(self):
        return self.tokens[self.i]

    def advance(self):
        t = self.tokens[self.i]
        self.i += 1
        return t

    def error(self, message, tok=None):
        tok = tok or self.tok
        return ExprSyntaxError(message, self.text, tok[2])

    def expect(self, op):
        if self.tok[0] != "op" or self.tok[1] != op:
            got = self.tok[1] or "end of input"
            raise self.error(f"expected {op!r}, got {got!r}")
        return self.advance()

    def parse(self):
        e = self.expr()
        if self.tok[0] != "end":
            raise self.error(f"unexpected {self.tok[1]!r}")
        return e

    def expr(self):
        left = self.term()
        while self.tok[0] == "op" and self.tok[1] in "+-":
            op = self.advance()[1]
            right = self.term()
            left = Sum((left, right if op == "+" else Product((MINUS_ONE, right))))
        return left

    def term(self):
        left = self.unary()
        while self.tok[0] == "op" and self.tok[1] in "*/":
            op = self.advance()[1]
            right = self.unary()
            left = Product((left, right if op == "*" else Power(right, MINUS_ONE)))
        return left

    def unary(self):
        if self.tok[0] == "op" and self.tok[1] == "-":
            self.advance()
            return Product((MINUS_ONE, self.unary()))
        return self.power()

    def power(self):
        base = self.atom()
        if self.tok[0] == "op" and self.tok[1] == "^":
            self.advance()
            return Power(base, self.unary())
        return base

    def atom(self):
        kind, value, _ = tok = self.advance()
        if kind == "int":
            return const(int(value))
        if kind == "ident":
            if self.tok[0] == "op" and self.tok[1] == "(":
                self.advance()
                arg = self.expr()
                self.expect(")")
                return make_call(value, arg)
            return Symbol(value)
        if kind == "op" and value == "(":
            e = self.expr()
            self.expect(")")
            return e
        raise self.error("unexpected end of input" if kind == "end" else f"unexpected {value!r}", tok)


def make_call(name: str, arg):
    if name in BUILTINS:
        return Builtin(name, arg)
    m = _DERIV.match(name)
    if m:
        return Opaque(m["name"], int(m["order"]), arg)
    return Opaque(name, 0, arg)


def parse_raw(text: str):
    """Parse without normalizing; factor and term order follow the source text."""
    return _Parser(text).parse()


def parse_expr(text: str):
    """Parse ``text`` into a normalized expression."""
    return normalize(parse_raw(text))
