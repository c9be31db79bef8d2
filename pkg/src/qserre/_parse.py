"""Recursive-descent parser for the textual renderings of QScalar and MLaurent.

Grammar::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | power
    power  := atom ('^' ['-'] INT)?
    atom   := INT | NAME | '(' expr ')'

Values are built in whatever ring the caller supplies: ``symbols`` maps
names to ring elements and ``const`` lifts integers.
"""

from __future__ import annotations

import re

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z_0-9]*)|(.))")


def _tokenize(text: str) -> list:
    out = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            break
        pos = m.end()
        num, name, op = m.groups()
        if num is not None:
            out.append(("int", int(num)))
        elif name is not None:
            out.append(("name", name))
        elif op is not None and not op.isspace():
            if op not in "+-*/^()":
                raise ValueError(f"unexpected character {op!r} in {text!r}")
            out.append(("op", op))
    out.append(("end", None))
    return out


class _Parser:
    def __init__(self, text, symbols, const):
        self.toks = _tokenize(text)
        self.i = 0
        self.symbols = symbols
        self.const = const
        self.text = text

    def peek(self):
        return self.toks[self.i]

    def take(self, kind=None, value=None):
        tok = self.toks[self.i]
        if kind is not None and (tok[0] != kind or (value is not None and tok[1] != value)):
            raise ValueError(f"expected {value or kind} at token {self.i} in {self.text!r}")
        self.i += 1
        return tok

    def expr(self):
        val = self.term()
        while self.peek() in (("op", "+"), ("op", "-")):
            op = self.take()[1]
            rhs = self.term()
            val = val + rhs if op == "+" else val - rhs
        return val

    def term(self):
        val = self.unary()
        while self.peek() in (("op", "*"), ("op", "/")):
            op = self.take()[1]
            rhs = self.unary()
            val = val * rhs if op == "*" else val / rhs
        return val

    def unary(self):
        if self.peek() == ("op", "-"):
            self.take()
            return -self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek() == ("op", "^"):
            self.take()
            sign = 1
            if self.peek() == ("op", "-"):
                self.take()
                sign = -1
            exp = self.take("int")[1]
            return base ** (sign * exp)
        return base

    def atom(self):
        kind, val = self.peek()
        if kind == "int":
            self.take()
            return self.const(val)
        if kind == "name":
            self.take()
            if val not in self.symbols:
                raise ValueError(f"unknown symbol {val!r} in {self.text!r}")
            return self.symbols[val]
        if (kind, val) == ("op", "("):
            self.take()
            inner = self.expr()
            self.take("op", ")")
            return inner
        raise ValueError(f"unexpected token {val!r} in {self.text!r}")


def parse_expression(text: str, symbols: dict, const):
    p = _Parser(text, symbols, const)
    val = p.expr()
    p.take("end")
    return val
