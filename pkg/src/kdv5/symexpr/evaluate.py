"""Numeric evaluation of expression trees.

An expression is compiled once into a flat plan over its distinct
subexpressions and then evaluated with numpy, so the same plan serves scalar
points and whole grids.
"""
from __future__ import annotations

from functools import lru_cache
from typing import Mapping

import numpy as np

from .expr import BinOp, Const, Expr, Func, Integral, Var


class EvaluationError(ArithmeticError):
    """Domain error (log of a nonpositive number, pole, ...) at a subexpression."""

    def __init__(self, message: str, subexpression: Expr):
        self.subexpression = subexpression
        super().__init__(f"{message} in {subexpression}")


def _sech(v):
    with np.errstate(over="ignore"):
        return 1.0 / np.cosh(v)


_UNARY = {
    "neg": np.negative,
    "exp": np.exp,
    "log": np.log,
    "sin": np.sin,
    "cos": np.cos,
    "tan": np.tan,
    "tanh": np.tanh,
    "sech": _sech,
    "sqrt": np.sqrt,
}

_BINARY = {"+": np.add, "-": np.subtract, "*": np.multiply, "/": np.divide, "^": np.power}


class Plan:
    """Topologically ordered evaluation steps for one expression."""

    def __init__(self, expr: Expr):
        self.expr = expr
        self.steps: list[tuple] = []
        self.nodes: list[Expr] = []
        index: dict[Expr, int] = {}

        def visit(e: Expr) -> int:
            # iterative post-order keeps deep trees off the Python stack
            stack = [(e, False)]
            while stack:
                node, ready = stack.pop()
                if node in index:
                    continue
                children = _children(node)
                if not ready:
                    stack.append((node, True))
                    stack.extend((c, False) for c in reversed(children) if c not in index)
                    continue
                self.steps.append((node, tuple(index[c] for c in children)))
                index[node] = len(self.nodes)
                self.nodes.append(node)
            return index[e]

        visit(expr)
        self.variables = sorted(expr.free_vars)

    def __call__(self, bindings: Mapping[str, object]):
        missing = [v for v in self.variables if v not in bindings]
        if missing:
            raise KeyError(f"unbound variable(s) {missing} in {self.expr}")
        values: list = []
        scalar = all(np.ndim(bindings[v]) == 0 for v in self.variables)
        with np.errstate(all="ignore"):
            for node, args in self.steps:
                values.append(_step(node, [values[i] for i in args], bindings))
        out = values[-1]
        if scalar:
            return float(out)
        return np.asarray(out, dtype=float)


def _children(node: Expr):
    if isinstance(node, BinOp):
        return (node.left, node.right)
    if isinstance(node, (Func, Integral)):
        return (node.arg,)
    return ()


def _step(node: Expr, args, bindings):
    if isinstance(node, Const):
        return float(node.value)
    if isinstance(node, Var):
        return np.asarray(bindings[node.name], dtype=float)
    if isinstance(node, Func):
        (a,) = args
        if node.name == "log" and np.any(np.asarray(a) <= 0):
            raise EvaluationError("log of nonpositive value", node)
        if node.name == "sqrt" and np.any(np.asarray(a) < 0):
            raise EvaluationError("sqrt of negative value", node)
        return _UNARY[node.name](a)
    if isinstance(node, BinOp):
        a, b = args
        if node.op == "/" and np.any(np.asarray(b) == 0):
            raise EvaluationError("division by zero", node)
        if node.op == "^":
            a_arr, b_arr = np.asarray(a), np.asarray(b)
            if np.any((a_arr == 0) & (b_arr < 0)):
                raise EvaluationError("zero raised to a negative power", node)
            if np.any((a_arr < 0) & (b_arr != np.round(b_arr))):
                raise EvaluationError("negative base with non-integer exponent", node)
        out = _BINARY[node.op](a, b)
        return out
    if isinstance(node, Integral):
        (a,) = args
        return node.antiderivative(a)
    raise TypeError(node)  # pragma: no cover


@lru_cache(maxsize=4096)
def compile_expr(expr: Expr) -> Plan:
    return Plan(expr)


def evaluate(e: Expr, bindings: Mapping[str, object] | None = None, **kw):
    """Evaluate ``e`` at the given variable values (scalars or broadcastable arrays)."""
    env = dict(bindings or {})
    env.update(kw)
    return compile_expr(e)(env)


_MP_BINARY = {
    "+": lambda a, b: a + b,
    "-": lambda a, b: a - b,
    "*": lambda a, b: a * b,
    "/": lambda a, b: a / b,
    "^": lambda a, b: a**b,
}


def evaluate_mp(e: Expr, bindings: Mapping[str, object] | None = None, dps: int = 50, **kw):
    """Scalar evaluation in mpmath at ``dps`` digits (integrals fall back to float)."""
    import mpmath

    env = dict(bindings or {})
    env.update(kw)
    funcs = {
        "neg": lambda v: -v, "exp": mpmath.exp, "log": mpmath.log, "sin": mpmath.sin, "cos": mpmath.cos,
        "tan": mpmath.tan, "tanh": mpmath.tanh, "sech": mpmath.sech, "sqrt": mpmath.sqrt,
    }
    with mpmath.workdps(dps):
        values: list = []
        for node, args in compile_expr(e).steps:
            a = [values[i] for i in args]
            if isinstance(node, Const):
                v = node.value
                values.append(mpmath.mpf(v.numerator) / v.denominator if hasattr(v, "denominator") else mpmath.mpf(v))
            elif isinstance(node, Var):
                values.append(mpmath.mpf(env[node.name]))
            elif isinstance(node, Func):
                values.append(funcs[node.name](a[0]))
            elif isinstance(node, BinOp):
                x, y = a
                if node.op == "/" and y == 0:
                    raise EvaluationError("division by zero", node)
                values.append(_MP_BINARY[node.op](x, y))
            else:
                values.append(mpmath.mpf(float(node.antiderivative(float(a[0])))))
        return +values[-1]
