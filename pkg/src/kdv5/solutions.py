"""Exact traveling-wave solutions u = U(x - a t) of the constant-coefficient
equation, and their images under point transformations.

Substituting u = U(s), s = x - a t, gives the ODE

    -a U' + m1 U^(5) + m2 U''' + m3 U U''' + m4 U U' + m5 U' U'' = 0.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .equivalence import TargetConstants, _number
from .model import PointTransformation
from .symexpr import Const, Expr, T, X, cos, evaluate, exp, nth_derivative, sech, sqrt, substitute, tanh

FAMILIES = ("exponential", "kink", "soliton", "compacton")


class DegenerateFamilyError(ValueError):
    """A derived constant vanishes or a radicand is negative."""


@dataclass(frozen=True)
class ClosedFormSolution:
    family: str
    parameters: Mapping[str, float]
    u: Expr
    constants: TargetConstants | None = None
    wave_speed: float | None = None
    provenance: tuple | None = field(default=None, compare=False)  # (base solution, transformation, direction)

    def __call__(self, t, x):
        return evaluate(self.u, t=t, x=x)

    def evaluate_chain(self, t, x):
        """Evaluate through the provenance chain instead of the composed expression."""
        if self.provenance is None:
            return self(t, x)
        base, T, direction = self.provenance
        t = np.asarray(t, dtype=float)
        x = np.asarray(x, dtype=float)
        if direction == "pullback":
            tn, xn, _ = T.forward(t, x, 0.0)
            return base.evaluate_chain(tn, xn) / np.asarray(T.scale(t), dtype=float)
        told, xold, _ = T.backward(t, x, 0.0)
        return np.asarray(T.scale(told), dtype=float) * base.evaluate_chain(told, xold)

    def to_json(self) -> dict:
        out = {
            "family": self.family,
            "parameters": {k: float(v) for k, v in self.parameters.items()},
            "solutionSource": str(self.u),
        }
        if self.constants is not None:
            out["constants"] = self.constants.to_json()
        if self.wave_speed is not None:
            out["waveSpeed"] = float(self.wave_speed)
        return out


def _c(v) -> Const:
    return Const(_number(v))


def traveling_wave_residual(U: Expr, a, m, sigma=None) -> float:
    """Max |ODE residual| of the profile ``U`` (an expression in x standing for s) on ``sigma``."""
    m = TargetConstants.of(m)
    if U.depends_on("t"):
        raise ValueError("profile must depend on x (the traveling variable) only")
    if sigma is None:
        sigma = np.linspace(-10.0, 10.0, 201)
    sigma = np.asarray(sigma, dtype=float)
    d = [evaluate(nth_derivative(U, "x", k), x=sigma) * np.ones_like(sigma) for k in range(6)]
    m1, m2, m3, m4, m5 = m.floats()
    res = -float(a) * d[1] + m1 * d[5] + m2 * d[3] + m3 * d[0] * d[3] + m4 * d[0] * d[1] + m5 * d[1] * d[2]
    return float(np.max(np.abs(res)))


def make_exponential(m, c2=1) -> ClosedFormSolution:
    """u = c2 exp(k (x + w t)), k = sqrt(-m4/(m3+m5)), speed a = m4 (m1 m4 - m2 m5 - m2 m3)/(m3+m5)^2."""
    m = TargetConstants.of(m)
    m1, m2, m3, m4, m5 = m.as_tuple()
    if m3 + m5 == 0:
        raise DegenerateFamilyError("exponential family needs m3 + m5 != 0")
    radicand = -m4 / (m3 + m5)
    if radicand <= 0:
        raise DegenerateFamilyError(f"exponential family needs -m4/(m3+m5) > 0, got {float(radicand)}")
    a = m4 * (m1 * m4 - m2 * m5 - m2 * m3) / (m3 + m5) ** 2
    k = sqrt(_c(radicand))
    u = _c(c2) * exp(k * (X - _c(a) * T))
    return ClosedFormSolution("exponential", {"c2": _number(c2), "a": a}, u, m, a)


def kink_constants(a, m4, m5) -> TargetConstants:
    a, m4, m5 = map(_number, (a, m4, m5))
    m1 = (-3 * a + 2 * m4 - 2 * m5) / 72
    m2 = (-30 * a + 17 * m4 - 8 * m5) / 36
    m3 = (15 * a - 10 * m4 + 4 * m5) / 12
    return _validated("kink", (m1, m2, m3, m4, m5))


def soliton_constants(a, m4, m5) -> TargetConstants:
    # the wave speed plays the role of the constant written c in the derivation
    a, m4, m5 = map(_number, (a, m4, m5))
    m1 = (-3 * a + m4 + 2 * m5) / 72
    m2 = (15 * a - 2 * m4 - 4 * m5) / 36
    m3 = (-15 * a + 5 * m4 + 4 * m5) / 12
    return _validated("soliton", (m1, m2, m3, m4, m5))


def compacton_constants(a, m5) -> TargetConstants:
    a, m5 = _number(a), _number(m5)
    if a == 0:
        raise DegenerateFamilyError("compacton needs a != 0")
    m1 = -1 / (64 * a**4)
    m2 = -5 / (16 * a**2)
    return _validated("compacton", (m1, m2, -2 * m5, -16 * a**2 * m5, m5))


def _validated(family, values) -> TargetConstants:
    for i, v in enumerate(values, 1):
        if v == 0:
            raise DegenerateFamilyError(f"{family}: derived m{i} vanishes")
    return TargetConstants(*values)


def make_kink(a, m4, m5) -> tuple[TargetConstants, ClosedFormSolution]:
    m = kink_constants(a, m4, m5)
    a = _number(a)
    u = tanh(X - _c(a) * T) ** 2
    return m, ClosedFormSolution("kink", {"a": a, "m4": m.m4, "m5": m.m5}, u, m, a)


def make_soliton(a, m4, m5) -> tuple[TargetConstants, ClosedFormSolution]:
    m = soliton_constants(a, m4, m5)
    a = _number(a)
    u = sech(X - _c(a) * T) ** 2
    return m, ClosedFormSolution("soliton", {"a": a, "m4": m.m4, "m5": m.m5}, u, m, a)


def make_compacton(a, m5) -> tuple[TargetConstants, ClosedFormSolution]:
    """u = cos^4(a (x - t)): unit wave speed, ``a`` only shapes the profile and the constants."""
    m = compacton_constants(a, m5)
    a = _number(a)
    u = cos(_c(a) * (X - T)) ** 4
    return m, ClosedFormSolution("compacton", {"a": a, "m5": m.m5}, u, m, 1)


def make(family: str, **params):
    """Dispatch by family name; returns (constants, solution)."""
    if family == "exponential":
        m = params.pop("m")
        sol = make_exponential(m, params.pop("c2", 1))
        out = (sol.constants, sol)
    elif family == "kink":
        out = make_kink(params.pop("a"), params.pop("m4"), params.pop("m5"))
    elif family == "soliton":
        out = make_soliton(params.pop("a"), params.pop("m4"), params.pop("m5"))
    elif family == "compacton":
        out = make_compacton(params.pop("a"), params.pop("m5"))
    else:
        raise ValueError(f"unknown family {family!r}; choose from {', '.join(FAMILIES)}")
    if params:
        raise TypeError(f"unexpected parameters for {family}: {sorted(params)}")
    return out


def map_solution(sol: ClosedFormSolution, T: PointTransformation, direction: str = "pullback") -> ClosedFormSolution:
    """Carry a solution across ``T``.

    ``pullback``: ``sol`` solves the equation in T's new variables; returns
    u_old(t, x) = u_new(lam(t), (x + k2) e^k1) / s(t).
    ``pushforward``: ``sol`` solves the equation in T's old variables; needs a
    closed-form inverse time map.
    """
    if T.scale.expr is None or T.time_map.expr is None:
        raise TypeError("map_solution needs a symbolic time map and u-scale")
    xs = Const(T.x_scale)
    if direction == "pullback":
        inner = substitute(sol.u, {"t": T.time_map.expr, "x": xs * (X + Const(T.k2))})
        u = inner / T.scale.expr
    elif direction == "pushforward":
        inv = T.time_map.inverse_expr
        if inv is None:
            raise ValueError("time map has no closed-form inverse; use the inverse transformation with pullback")
        inner = substitute(sol.u, {"t": inv, "x": X / xs - Const(T.k2)})
        u = substitute(T.scale.expr, {"t": inv}) * inner
    else:
        raise ValueError(f"unknown direction {direction!r}")
    params = dict(sol.parameters)
    params.update(k1=T.k1, k2=T.k2)
    return ClosedFormSolution("transformed", params, u, None, None, (sol, T, direction))
