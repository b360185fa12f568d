"""Recursive-descent parser for the expression language.

Grammar (``^`` binds tighter than unary minus and is right-associative)::

    expr    := term (("+" | "-") term)*
    term    := unary (("*" | "/") unary)*
    unary   := "-" unary | power
    power   := primary ("^" unary)?
    primary := number | "t" | "x" | func "(" expr ")" | "(" expr ")"
             | "integral" "(" expr "," number ["," expr] ")"
    func    := exp | log | sin | cos | tan | tanh | sech | sqrt

Integer literals (and ``p/q``, which folds) are exact rationals; literals with
a decimal point or exponent are floats.
"""
from __future__ import annotations

import re
from fractions import Fraction

from .expr import FUNCTIONS, VARIABLES, Const, Expr, Integral, Var, add, div, func, mul, neg, power, sub

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_]\w*)|(?P<op>[-+*/^(),]))"
)


class ParseError(ValueError):
    """Syntax or name error; ``offset`` is the byte offset into the source."""

    def __init__(self, message: str, offset: int, source: str = ""):
        self.offset = offset
        self.source = source
        super().__init__(f"{message} at offset {offset}")


class _Tokens:
    def __init__(self, source: str):
        self.source = source
        self.items = []  # (kind, text, offset)
        pos = 0
        n = len(source)
        while pos < n:
            if source[pos:].strip() == "":
                break
            m = _TOKEN.match(source, pos)
            if m is None or m.end() == pos:
                bad = pos + len(source[pos:]) - len(source[pos:].lstrip())
                raise ParseError(f"unexpected character {source[bad]!r}", _byte(source, bad), source)
            kind = m.lastgroup
            self.items.append((kind, m.group(kind), m.start(kind)))
            pos = m.end()
        self.items.append(("end", "", len(source)))
        self.i = 0

    def peek(self):
        return self.items[self.i]

    def next(self):
        tok = self.items[self.i]
        self.i += 1
        return tok

    def error(self, message, tok=None):
        tok = tok or self.peek()
        return ParseError(message, _byte(self.source, tok[2]), self.source)

    def expect(self, text):
        tok = self.next()
        if tok[1] != text:
            found = tok[1] or "end of input"
            raise self.error(f"expected {text!r}, found {found!r}", tok)
        return tok


def _byte(source: str, index: int) -> int:
    return len(source[:index].encode("utf-8"))


def parse(source: str) -> Expr:
    """Parse ``source`` into an expression tree."""
    toks = _Tokens(source)
    if toks.peek()[0] == "end":
        raise toks.error("empty expression")
    e = _expr(toks)
    if toks.peek()[0] != "end":
        raise toks.error(f"unexpected token {toks.peek()[1]!r}")
    return e


def _expr(toks):
    e = _term(toks)
    while toks.peek()[1] in ("+", "-"):
        op = toks.next()[1]
        rhs = _term(toks)
        e = add(e, rhs) if op == "+" else sub(e, rhs)
    return e


def _term(toks):
    e = _unary(toks)
    while toks.peek()[1] in ("*", "/"):
        op = toks.next()[1]
        rhs = _unary(toks)
        e = mul(e, rhs) if op == "*" else div(e, rhs)
    return e


def _unary(toks):
    if toks.peek()[1] == "-":
        toks.next()
        return neg(_unary(toks))
    return _power(toks)


def _power(toks):
    base = _primary(toks)
    if toks.peek()[1] == "^":
        toks.next()
        return power(base, _unary(toks))
    return base


def _number(text: str):
    if any(c in text for c in ".eE"):
        return Const(float(text))
    return Const(Fraction(int(text)))


def _primary(toks):
    tok = toks.peek()
    kind, text, _ = tok
    if kind == "num":
        toks.next()
        return _number(text)
    if kind == "name":
        toks.next()
        if text in VARIABLES:
            return Var(text)
        if text in FUNCTIONS or text == "integral":
            if toks.peek()[1] != "(":
                raise toks.error(f"function {text!r} requires an argument list")
            args = _arguments(toks)
            if text == "integral":
                return _integral(toks, tok, args)
            if len(args) != 1:
                raise toks.error(f"{text} expects 1 argument, got {len(args)}", tok)
            return func(text, args[0])
        raise toks.error(f"unknown identifier {text!r}", tok)
    if text == "(":
        toks.next()
        e = _expr(toks)
        toks.expect(")")
        return e
    found = text or "end of input"
    raise toks.error(f"unexpected {found!r}")


def _arguments(toks):
    toks.expect("(")
    args = [_expr(toks)]
    while toks.peek()[1] == ",":
        toks.next()
        args.append(_expr(toks))
    toks.expect(")")
    return args


def _integral(toks, tok, args):
    from .integrate import Antiderivative

    if len(args) not in (2, 3):
        raise toks.error(f"integral expects 2 or 3 arguments, got {len(args)}", tok)
    integrand, base = args[0], args[1]
    if not isinstance(base, Const):
        raise toks.error("integral base point must be a number", tok)
    if integrand.depends_on("x"):
        raise toks.error("integral integrand must depend on t only", tok)
    arg = args[2] if len(args) == 3 else None
    return Integral(Antiderivative(integrand, float(base.value), mode="quadrature"), arg)
