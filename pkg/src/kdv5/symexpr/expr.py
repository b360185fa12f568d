"""Immutable expression trees over the variables ``t`` and ``x``.

Nodes are built through the smart constructors in this module (``add``,
``mul``, ``func``, ...), which fold constants and apply the 0/1 identities.
Nothing else is simplified.
"""
from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache
from numbers import Rational, Real
from typing import Mapping, Union

VARIABLES = ("t", "x")
FUNCTIONS = ("exp", "log", "sin", "cos", "tan", "tanh", "sech", "sqrt")

# printing precedence
PREC_ADD, PREC_MUL, PREC_NEG, PREC_POW, PREC_ATOM = 1, 2, 3, 4, 5

Number = Union[Fraction, float]


class Expr:
    """Base class. Subclasses are immutable and hash by structure."""

    __slots__ = ("_hash", "_free")

    def _init(self, key):
        self._hash = hash(key)

    def __hash__(self):
        return self._hash

    @property
    def free_vars(self) -> frozenset:
        return self._free

    def depends_on(self, var: str) -> bool:
        return var in self._free

    def __add__(self, other):
        return add(self, as_expr(other))

    def __radd__(self, other):
        return add(as_expr(other), self)

    def __sub__(self, other):
        return sub(self, as_expr(other))

    def __rsub__(self, other):
        return sub(as_expr(other), self)

    def __mul__(self, other):
        return mul(self, as_expr(other))

    def __rmul__(self, other):
        return mul(as_expr(other), self)

    def __truediv__(self, other):
        return div(self, as_expr(other))

    def __rtruediv__(self, other):
        return div(as_expr(other), self)

    def __pow__(self, other):
        return power(self, as_expr(other))

    def __rpow__(self, other):
        return power(as_expr(other), self)

    def __neg__(self):
        return neg(self)

    def __str__(self):
        from .printer import to_source

        return to_source(self)


class Const(Expr):
    __slots__ = ("value",)

    def __init__(self, value: Number):
        if isinstance(value, bool) or not isinstance(value, Real):
            raise TypeError(f"constant must be a real number, got {value!r}")
        if isinstance(value, Rational) and not isinstance(value, Fraction):
            value = Fraction(value)
        elif not isinstance(value, Fraction):
            value = float(value)
        self.value = value
        self._free = frozenset()
        self._init(("const", value))

    @property
    def is_exact(self) -> bool:
        return isinstance(self.value, Fraction)

    __hash__ = Expr.__hash__

    def __eq__(self, other):
        return isinstance(other, Const) and self.value == other.value

    def __repr__(self):
        return f"Const({self.value!r})"


class Var(Expr):
    __slots__ = ("name",)

    def __init__(self, name: str):
        if name not in VARIABLES:
            raise ValueError(f"unknown variable {name!r}")
        self.name = name
        self._free = frozenset((name,))
        self._init(("var", name))

    __hash__ = Expr.__hash__

    def __eq__(self, other):
        return isinstance(other, Var) and self.name == other.name

    def __repr__(self):
        return f"Var({self.name!r})"


class Func(Expr):
    """Unary node: one of FUNCTIONS or ``neg``."""

    __slots__ = ("name", "arg")

    def __init__(self, name: str, arg: Expr):
        if name != "neg" and name not in FUNCTIONS:
            raise ValueError(f"unknown function {name!r}")
        self.name = name
        self.arg = arg
        self._free = arg.free_vars
        self._init(("func", name, arg))

    __hash__ = Expr.__hash__

    def __eq__(self, other):
        return (
            isinstance(other, Func)
            and self._hash == other._hash
            and self.name == other.name
            and self.arg == other.arg
        )

    def __repr__(self):
        return f"Func({self.name!r}, {self.arg!r})"


class BinOp(Expr):
    __slots__ = ("op", "left", "right")

    def __init__(self, op: str, left: Expr, right: Expr):
        if op not in "+-*/^" or len(op) != 1:
            raise ValueError(f"unknown operator {op!r}")
        self.op = op
        self.left = left
        self.right = right
        self._free = left.free_vars | right.free_vars
        self._init(("bin", op, left, right))

    __hash__ = Expr.__hash__

    def __eq__(self, other):
        return (
            isinstance(other, BinOp)
            and self._hash == other._hash
            and self.op == other.op
            and self.left == other.left
            and self.right == other.right
        )

    def __repr__(self):
        return f"BinOp({self.op!r}, {self.left!r}, {self.right!r})"


class Integral(Expr):
    """``Phi(arg)`` where ``Phi`` is an :class:`~kdv5.symexpr.integrate.Antiderivative`.

    Used when the integrand has no closed form in the supported class; the
    node differentiates to the integrand and evaluates by quadrature.
    """

    __slots__ = ("antiderivative", "arg")

    def __init__(self, antiderivative, arg: Expr | None = None):
        self.antiderivative = antiderivative
        self.arg = T if arg is None else arg
        self._free = self.arg.free_vars
        self._init(("integral", antiderivative, self.arg))

    __hash__ = Expr.__hash__

    def __eq__(self, other):
        return (
            isinstance(other, Integral)
            and self.antiderivative == other.antiderivative
            and self.arg == other.arg
        )

    def __repr__(self):
        return f"Integral({self.antiderivative!r}, {self.arg!r})"


T = Var("t")
X = Var("x")
ZERO = Const(0)
ONE = Const(1)


def as_expr(value) -> Expr:
    if isinstance(value, Expr):
        return value
    if isinstance(value, str):
        from .parser import parse

        return parse(value)
    return Const(value)


def _is_const(e: Expr, value=None) -> bool:
    if not isinstance(e, Const):
        return False
    return value is None or e.value == value


def _fold(value) -> Const:
    if isinstance(value, Fraction) and value.denominator == 1:
        value = Fraction(value.numerator)
    return Const(value)


def add(a: Expr, b: Expr) -> Expr:
    if isinstance(a, Const) and isinstance(b, Const):
        return _fold(a.value + b.value)
    if _is_const(a, 0):
        return b
    if _is_const(b, 0):
        return a
    flipped = _negated_const_term(b)
    if flipped is not None:
        return BinOp("-", a, flipped)
    return BinOp("+", a, b)


def sub(a: Expr, b: Expr) -> Expr:
    if isinstance(a, Const) and isinstance(b, Const):
        return _fold(a.value - b.value)
    if _is_const(b, 0):
        return a
    if _is_const(a, 0):
        return neg(b)
    flipped = _negated_const_term(b)
    if flipped is not None:
        return BinOp("+", a, flipped)
    return BinOp("-", a, b)


def _negated_const_term(b: Expr) -> Expr | None:
    """-b when b is a negative constant or (negative constant) * y, else None."""
    if isinstance(b, Const) and b.value < 0:
        return Const(-b.value)
    if isinstance(b, BinOp) and b.op == "*" and isinstance(b.left, Const) and b.left.value < 0:
        return mul(Const(-b.left.value), b.right)
    return None


def mul(a: Expr, b: Expr) -> Expr:
    if isinstance(a, Const) and isinstance(b, Const):
        return _fold(a.value * b.value)
    if _is_const(a, 0) or _is_const(b, 0):
        return ZERO
    if _is_const(a, 1):
        return b
    if _is_const(b, 1):
        return a
    return BinOp("*", a, b)


def div(a: Expr, b: Expr) -> Expr:
    if isinstance(a, Const) and isinstance(b, Const) and b.value != 0:
        if isinstance(a.value, Fraction) and isinstance(b.value, Fraction):
            return _fold(a.value / b.value)
        return Const(a.value / b.value)
    if _is_const(b, 1):
        return a
    if _is_const(a, 0) and not _is_const(b, 0):
        return ZERO
    return BinOp("/", a, b)


def _fold_pow(base, exponent):
    """Fold a constant power when the result is exact or float inputs are involved."""
    if isinstance(base, Fraction) and isinstance(exponent, Fraction):
        if exponent.denominator == 1:
            if base == 0 and exponent < 0:
                return None
            return base ** int(exponent)
        # exact rational roots of perfect powers
        if base > 0:
            q = exponent.denominator
            num = round(base.numerator ** (1 / q))
            den = round(base.denominator ** (1 / q))
            if num**q == base.numerator and den**q == base.denominator:
                return Fraction(num, den) ** exponent.numerator
        return None
    base, exponent = float(base), float(exponent)
    if base < 0 and not exponent.is_integer():
        return None
    if base == 0 and exponent < 0:
        return None
    return base**exponent


def power(a: Expr, b: Expr) -> Expr:
    if isinstance(a, Const) and isinstance(b, Const):
        folded = _fold_pow(a.value, b.value)
        if folded is not None:
            return _fold(folded)
    if _is_const(b, 0):
        return ONE
    if _is_const(b, 1):
        return a
    if _is_const(a, 1):
        return ONE
    return BinOp("^", a, b)


def neg(a: Expr) -> Expr:
    if isinstance(a, Const):
        return _fold(-a.value)
    if isinstance(a, Func) and a.name == "neg":
        return a.arg
    return Func("neg", a)


_EXACT_AT_ZERO = {"exp": 1, "sin": 0, "cos": 1, "tan": 0, "tanh": 0, "sech": 1, "sqrt": 0}

_FLOAT_IMPL = {
    "exp": math.exp,
    "log": math.log,
    "sin": math.sin,
    "cos": math.cos,
    "tan": math.tan,
    "tanh": math.tanh,
    "sech": lambda v: 1.0 / math.cosh(v),
    "sqrt": math.sqrt,
}


def func(name: str, a: Expr) -> Expr:
    if name == "neg":
        return neg(a)
    if name not in FUNCTIONS:
        raise ValueError(f"unknown function {name!r}")
    if isinstance(a, Const):
        v = a.value
        if isinstance(v, Fraction):
            if v == 0 and name in _EXACT_AT_ZERO:
                return Const(_EXACT_AT_ZERO[name])
            if name == "log" and v == 1:
                return ZERO
            if name == "sqrt" and v > 0:
                root = _fold_pow(v, Fraction(1, 2))
                if root is not None:
                    return _fold(root)
        else:
            try:
                return Const(_FLOAT_IMPL[name](v))
            except (ValueError, OverflowError):
                pass
    return Func(name, a)


def exp(a) -> Expr:
    return func("exp", as_expr(a))


def log(a) -> Expr:
    return func("log", as_expr(a))


def sin(a) -> Expr:
    return func("sin", as_expr(a))


def cos(a) -> Expr:
    return func("cos", as_expr(a))


def tan(a) -> Expr:
    return func("tan", as_expr(a))


def tanh(a) -> Expr:
    return func("tanh", as_expr(a))


def sech(a) -> Expr:
    return func("sech", as_expr(a))


def sqrt(a) -> Expr:
    return func("sqrt", as_expr(a))


def substitute(e: Expr, mapping: Mapping[str, Expr]) -> Expr:
    """Simultaneously replace variables by expressions."""
    mapping = {k: as_expr(v) for k, v in mapping.items()}
    cache: dict = {}

    def walk(node: Expr) -> Expr:
        if not (node.free_vars & mapping.keys()):
            return node
        hit = cache.get(node)
        if hit is not None:
            return hit
        if isinstance(node, Var):
            out = mapping[node.name]
        elif isinstance(node, Func):
            out = func(node.name, walk(node.arg))
        elif isinstance(node, BinOp):
            out = _BUILD[node.op](walk(node.left), walk(node.right))
        elif isinstance(node, Integral):
            out = Integral(node.antiderivative, walk(node.arg))
        else:  # pragma: no cover
            raise TypeError(node)
        cache[node] = out
        return out

    return walk(e)


_BUILD = {"+": add, "-": sub, "*": mul, "/": div, "^": power}


def rebuild(e: Expr) -> Expr:
    """Re-run the smart constructors bottom-up (constant canonicalization)."""
    if isinstance(e, Func):
        return func(e.name, rebuild(e.arg))
    if isinstance(e, BinOp):
        return _BUILD[e.op](rebuild(e.left), rebuild(e.right))
    if isinstance(e, Integral):
        return Integral(e.antiderivative, rebuild(e.arg))
    return e


@lru_cache(maxsize=None)
def differentiate(e: Expr, var: str) -> Expr:
    """Symbolic derivative of ``e`` with respect to ``var`` ("t" or "x")."""
    if var not in VARIABLES:
        raise ValueError(f"unknown variable {var!r}")
    if not e.depends_on(var):
        return ZERO
    if isinstance(e, Var):
        return ONE
    if isinstance(e, BinOp):
        f, g = e.left, e.right
        df, dg = differentiate(f, var), differentiate(g, var)
        if e.op == "+":
            return add(df, dg)
        if e.op == "-":
            return sub(df, dg)
        if e.op == "*":
            return add(mul(df, g), mul(f, dg))
        if e.op == "/":
            return sub(div(df, g), div(mul(f, dg), power(g, Const(2))))
        # power
        if not g.depends_on(var):
            return mul(mul(g, power(f, sub(g, ONE))), df)
        return mul(e, add(mul(dg, func("log", f)), div(mul(g, df), f)))
    if isinstance(e, Func):
        a = e.arg
        da = differentiate(a, var)
        name = e.name
        if name == "neg":
            return neg(da)
        if name == "exp":
            outer = e
        elif name == "log":
            return div(da, a)
        elif name == "sin":
            outer = func("cos", a)
        elif name == "cos":
            outer = neg(func("sin", a))
        elif name == "tan":
            outer = add(ONE, power(func("tan", a), Const(2)))
        elif name == "tanh":
            outer = power(func("sech", a), Const(2))
        elif name == "sech":
            outer = neg(mul(e, func("tanh", a)))
        elif name == "sqrt":
            return div(da, mul(Const(2), e))
        else:  # pragma: no cover
            raise AssertionError(name)
        return mul(outer, da)
    if isinstance(e, Integral):
        integrand = substitute(e.antiderivative.integrand, {"t": e.arg})
        return mul(integrand, differentiate(e.arg, var))
    raise TypeError(f"cannot differentiate {e!r}")  # pragma: no cover


def nth_derivative(e: Expr, var: str, n: int) -> Expr:
    for _ in range(n):
        e = differentiate(e, var)
    return e


def node_count(e: Expr) -> int:
    """Number of distinct subexpressions (DAG size)."""
    seen = set()
    stack = [e]
    while stack:
        n = stack.pop()
        if n in seen:
            continue
        seen.add(n)
        if isinstance(n, (Func, Integral)):
            stack.append(n.arg)
        elif isinstance(n, BinOp):
            stack.extend((n.left, n.right))
    return len(seen)
