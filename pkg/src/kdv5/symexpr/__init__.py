"""Small symbolic engine: parse, print, differentiate, evaluate, integrate in t."""
from .evaluate import EvaluationError, Plan, compile_expr, evaluate, evaluate_mp
from .expr import (
    ONE,
    ZERO,
    BinOp,
    Const,
    Expr,
    Func,
    Integral,
    T,
    Var,
    X,
    as_expr,
    cos,
    differentiate,
    exp,
    log,
    nth_derivative,
    rebuild,
    sech,
    sin,
    sqrt,
    substitute,
    tan,
    tanh,
)
from .integrate import Antiderivative, QuadratureError, adaptive_simpson, antiderivative, integral_expr, symbolic_integral
from .parser import ParseError, parse
from .printer import to_source

__all__ = [
    "Antiderivative", "BinOp", "Const", "EvaluationError", "Expr", "Func", "Integral", "ONE",
    "ParseError", "Plan", "QuadratureError", "T", "Var", "X", "ZERO", "adaptive_simpson",
    "antiderivative", "as_expr", "compile_expr", "cos", "differentiate", "evaluate", "evaluate_mp", "exp",
    "integral_expr", "log", "nth_derivative", "parse", "rebuild", "sech", "sin", "sqrt",
    "substitute", "symbolic_integral", "tan", "tanh", "to_source",
]
