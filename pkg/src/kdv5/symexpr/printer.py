"""Source printer. Output is accepted by :func:`kdv5.symexpr.parser.parse`."""
from __future__ import annotations

from fractions import Fraction

from .expr import (
    PREC_ADD,
    PREC_ATOM,
    PREC_MUL,
    PREC_NEG,
    PREC_POW,
    BinOp,
    Const,
    Expr,
    Func,
    Integral,
    Var,
)

_BIN_PREC = {"+": PREC_ADD, "-": PREC_ADD, "*": PREC_MUL, "/": PREC_MUL, "^": PREC_POW}


def _number(value) -> str:
    if isinstance(value, Fraction):
        if value.denominator == 1:
            return str(value.numerator)
        return f"{value.numerator}/{value.denominator}"
    text = repr(float(value))
    if text in ("inf", "-inf", "nan"):
        raise ValueError(f"cannot print non-finite constant {value!r}")
    return text


def precedence(e: Expr) -> int:
    if isinstance(e, Const):
        v = e.value
        if v < 0:
            return PREC_NEG if not isinstance(v, Fraction) or v.denominator == 1 else PREC_MUL
        if isinstance(v, Fraction) and v.denominator != 1:
            return PREC_MUL
        return PREC_ATOM
    if isinstance(e, BinOp):
        return _BIN_PREC[e.op]
    if isinstance(e, Func) and e.name == "neg":
        return PREC_NEG
    return PREC_ATOM


def _wrap(e: Expr, minimum: int) -> str:
    text = to_source(e)
    return f"({text})" if precedence(e) < minimum else text


def to_source(e: Expr) -> str:
    if isinstance(e, Const):
        return _number(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Func):
        if e.name == "neg":
            return "-" + _wrap(e.arg, PREC_NEG)
        return f"{e.name}({to_source(e.arg)})"
    if isinstance(e, Integral):
        phi = e.antiderivative
        head = f"integral({to_source(phi.integrand)}, {_number(phi.t0)}"
        if e.arg == Var("t"):
            return head + ")"
        return head + f", {to_source(e.arg)})"
    if isinstance(e, BinOp):
        p = _BIN_PREC[e.op]
        if e.op == "^":
            # base must be an atom, exponent at least a power (right assoc)
            return f"{_wrap(e.left, PREC_ATOM)}^{_wrap(e.right, PREC_POW)}"
        sep = f" {e.op} " if p == PREC_ADD else e.op
        # operands that are negations read badly after * or /
        right_min = p + 1 if p == PREC_ADD else PREC_POW
        left_min = p if p == PREC_ADD else PREC_MUL
        return _wrap(e.left, left_min) + sep + _wrap(e.right, right_min)
    raise TypeError(f"cannot print {e!r}")
