"""Equations u_t + A u_xxxxx + B u_xxx + C u u_xxx + E u u_x + F u_x u_xx + Q u = 0
with coefficients depending on t, and the finite equivalence transformations
acting on them.

A transformation maps old variables (t, x, u) to new ones::

    t_new = lam(t),   x_new = (x + k2) * exp(k1),   u_new = s(t) * u

and :func:`pushforward` returns the coefficients of the equation satisfied by
``u_new``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .symexpr import Const, Expr, as_expr, exp, integral_expr, parse, substitute, to_source
from .timefunc import (
    DerivedFunction,
    ExprFunction,
    Jet,
    TimeFunction,
    TimeMap,
    as_function,
    compose,
    product,
    reciprocal,
)

COEFFICIENTS = ("A", "B", "C", "E", "F", "Q")
NONVANISHING_SAMPLES = 101
NONVANISHING_THRESHOLD = 1e-12

# (power of exp(k1), power of 1/s) for the pushed-forward coefficients
_WEIGHTS = {"A": (5, 0), "B": (3, 0), "C": (3, 1), "E": (1, 1), "F": (3, 1)}


class InvalidEquationError(ValueError):
    pass


class InvalidTransformationError(ValueError):
    pass


def _check_nonvanishing(f: TimeFunction, domain, what: str, exc=InvalidEquationError):
    ts = np.linspace(domain[0], domain[1], NONVANISHING_SAMPLES)
    vals = np.asarray(f(ts), dtype=float) * np.ones_like(ts)
    if not np.all(np.isfinite(vals)):
        raise exc(f"{what} is not finite on [{domain[0]}, {domain[1]}]")
    bad = np.abs(vals) <= NONVANISHING_THRESHOLD
    if np.any(bad):
        raise exc(f"{what} vanishes near t={ts[np.argmax(bad)]:.6g}")
    if np.any(np.sign(vals) != np.sign(vals[0])):
        raise exc(f"{what} changes sign on [{domain[0]}, {domain[1]}]")


@dataclass(frozen=True)
class EquationInstance:
    coefficients: Mapping[str, TimeFunction]
    domain: tuple[float, float]

    def __post_init__(self):
        missing = set(COEFFICIENTS) - set(self.coefficients)
        if missing:
            raise InvalidEquationError(f"missing coefficients {sorted(missing)}")
        lo, hi = map(float, self.domain)
        if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
            raise InvalidEquationError(f"invalid domain {self.domain}")
        object.__setattr__(self, "domain", (lo, hi))
        object.__setattr__(
            self, "coefficients", {k: as_function(self.coefficients[k]) for k in COEFFICIENTS}
        )
        _check_nonvanishing(self.coefficients["A"], self.domain, "A")
        _check_nonvanishing(self.coefficients["C"], self.domain, "C")

    @classmethod
    def from_exprs(cls, domain, A, B, C, E, F, Q=0) -> "EquationInstance":
        return cls({"A": A, "B": B, "C": C, "E": E, "F": F, "Q": Q}, tuple(domain))

    @classmethod
    def constant(cls, m, domain=(0.0, 1.0), Q=0) -> "EquationInstance":
        """u_t + m1 u_xxxxx + m2 u_xxx + m3 u u_xxx + m4 u u_x + m5 u_x u_xx + Q u = 0."""
        m1, m2, m3, m4, m5 = (as_expr(v) for v in m)
        return cls.from_exprs(domain, m1, m2, m3, m4, m5, Q)

    @classmethod
    def from_json(cls, data) -> "EquationInstance":
        if isinstance(data, str):
            data = json.loads(data)
        try:
            sources = data["coefficients"]
            domain = data["domain"]
        except (KeyError, TypeError) as exc:
            raise InvalidEquationError(f"equation JSON needs 'coefficients' and 'domain': {exc}") from None
        unknown = set(sources) - set(COEFFICIENTS)
        if unknown:
            raise InvalidEquationError(f"unknown coefficients {sorted(unknown)}")
        missing = set(COEFFICIENTS[:5]) - set(sources)
        if missing:
            raise InvalidEquationError(f"missing coefficients {sorted(missing)}")
        if not (isinstance(domain, (list, tuple)) and len(domain) == 2):
            raise InvalidEquationError("domain must be [t_lo, t_hi]")
        coeffs = {}
        for name in COEFFICIENTS:
            expr = parse(str(sources.get(name, "0")))
            if expr.depends_on("x"):
                raise InvalidEquationError(f"coefficient {name} depends on x")
            coeffs[name] = expr
        return cls(coeffs, (float(domain[0]), float(domain[1])))

    def to_json(self) -> dict:
        exprs = self.exprs()
        if exprs is None:
            raise ValueError("equation has non-symbolic coefficients")
        return {"coefficients": {k: to_source(v) for k, v in exprs.items()}, "domain": list(self.domain)}

    def exprs(self) -> dict[str, Expr] | None:
        out = {k: f.expr for k, f in self.coefficients.items()}
        return None if any(v is None for v in out.values()) else out

    def __getitem__(self, name: str) -> TimeFunction:
        return self.coefficients[name]

    def grid(self, n: int = NONVANISHING_SAMPLES) -> np.ndarray:
        return np.linspace(self.domain[0], self.domain[1], n)

    def values(self, t) -> dict[str, np.ndarray]:
        """Coefficient values at t (broadcast to t's shape)."""
        t = np.asarray(t, dtype=float)
        return {k: np.asarray(f(t), dtype=float) * np.ones_like(t) for k, f in self.coefficients.items()}

    def q_is_zero(self, tol: float = 0.0) -> bool:
        q = self.coefficients["Q"]
        if isinstance(q.expr, Const):
            return abs(float(q.expr.value)) <= tol
        return bool(np.all(np.abs(np.asarray(q(self.grid()), dtype=float)) <= tol))


@dataclass(frozen=True)
class PointTransformation:
    """t_new = lam(t), x_new = (x + k2) e^k1, u_new = s(t) u, for t in ``time_map.domain``."""

    time_map: TimeMap
    k1: float = 0.0
    k2: float = 0.0
    scale: TimeFunction = field(default_factory=lambda: ExprFunction(Const(1)))
    labels: tuple[str, str] = ("old", "new")
    meta: Mapping = field(default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "scale", as_function(self.scale))
        if not (math.isfinite(self.k1) and math.isfinite(self.k2)):
            raise InvalidTransformationError("k1 and k2 must be finite")
        _check_nonvanishing(self.scale, self.domain, "u-scale s(t)", InvalidTransformationError)

    @property
    def domain(self) -> tuple[float, float]:
        return self.time_map.domain

    @property
    def image(self) -> tuple[float, float]:
        return self.time_map.image

    @property
    def x_scale(self) -> float:
        return math.exp(self.k1)

    @classmethod
    def identity(cls, domain=(0.0, 1.0)) -> "PointTransformation":
        return cls(TimeMap("t", domain))

    @classmethod
    def class_form(cls, lam, k1: float, k2: float, k3: float, mu, domain) -> "PointTransformation":
        """Equivalence transformation of the damped class: s = exp(k1/2 + k3*mu(t))."""
        s = exp(Const(k1) / 2 + Const(k3) * as_expr(mu))
        return cls(TimeMap(lam, domain), k1, k2, s)

    @classmethod
    def subclass_form(cls, lam, k1: float, k2: float, k3: float, domain) -> "PointTransformation":
        """Equivalence transformation of the undamped subclass: s = exp(k3)."""
        return cls(TimeMap(lam, domain), k1, k2, Const(math.exp(k3)))

    def forward(self, t, x, u):
        t = np.asarray(t, dtype=float)
        return (
            self.time_map(t),
            (np.asarray(x, dtype=float) + self.k2) * self.x_scale,
            np.asarray(self.scale(t), dtype=float) * u,
        )

    def backward(self, t_new, x_new, u_new):
        t = self.time_map.inverse(t_new)
        return t, np.asarray(x_new, dtype=float) / self.x_scale - self.k2, u_new / np.asarray(self.scale(t), dtype=float)

    def inverse(self) -> "PointTransformation":
        inv_map = self.time_map.inverse_map()
        if inv_map.expr is not None and self.scale.expr is not None:
            s = ExprFunction(substitute(1 / self.scale.expr, {"t": inv_map.expr}))
        else:
            s = compose(reciprocal(self.scale), inv_map)
        return PointTransformation(
            inv_map, -self.k1, -self.k2 * self.x_scale, s, (self.labels[1], self.labels[0]), dict(self.meta)
        )

    def then(self, other: "PointTransformation") -> "PointTransformation":
        """``other`` applied after ``self``."""
        lam = compose(other.time_map, self.time_map)
        inverse_expr = None
        if self.time_map.inverse_expr is not None and other.time_map.inverse_expr is not None:
            inverse_expr = substitute(self.time_map.inverse_expr, {"t": other.time_map.inverse_expr})
        s = product(compose(other.scale, self.time_map), self.scale)
        return PointTransformation(
            TimeMap(lam, self.domain, inverse_expr=inverse_expr),
            self.k1 + other.k1,
            self.k2 + other.k2 * math.exp(-self.k1),
            s,
            (self.labels[0], other.labels[1]),
        )


def _pushed_symbolic(eq: EquationInstance, T: PointTransformation) -> dict | None:
    exprs = eq.exprs()
    inv = T.time_map.inverse_expr
    lam, s = T.time_map.expr, T.scale.expr
    if exprs is None or inv is None or lam is None or s is None:
        return None
    lam_t = T.time_map.func.nth(1)
    s_t = T.scale.nth(1)
    out = {}
    for name, (ek, sp) in _WEIGHTS.items():
        val = Const(math.exp(ek * T.k1)) * exprs[name] / lam_t
        if sp:
            val = val / s
        out[name] = val
    out["Q"] = (exprs["Q"] - s_t / s) / lam_t
    return {k: substitute(v, {"t": inv}) for k, v in out.items()}


def _pushed_numeric(f: TimeFunction, T: PointTransformation, name: str) -> TimeFunction:
    lam, s, q = T.time_map, T.scale, f

    def jet(t_new, order):
        tau = lam.inverse(t_new)
        j_lam = lam.jet(tau, order + 1)
        lam_t = j_lam.derivative()
        if name == "Q":
            j_s = s.jet(tau, order + 1)
            g = (q.jet(tau, order) - j_s.derivative() / j_s.truncate(order)) / lam_t
        else:
            ek, sp = _WEIGHTS[name]
            g = q.jet(tau, order) * math.exp(ek * T.k1) / lam_t
            if sp:
                g = g / s.jet(tau, order)
        return g.compose(j_lam.truncate(order).revert(tau))

    return DerivedFunction(jet, f"pushed {name}")


def pushforward(eq: EquationInstance, T: PointTransformation) -> EquationInstance:
    """Coefficients, as functions of the new time, of the equation for u_new."""
    lo, hi = eq.domain
    d_lo, d_hi = T.domain
    slack = 1e-12 * (1 + abs(hi - lo))
    if lo < d_lo - slack or hi > d_hi + slack:
        raise InvalidTransformationError(
            f"transformation domain {T.domain} does not cover equation domain {eq.domain}"
        )
    a, b = float(T.time_map(lo)), float(T.time_map(hi))
    new_domain = (min(a, b), max(a, b))
    sym = _pushed_symbolic(eq, T)
    if sym is not None:
        return EquationInstance(sym, new_domain)
    coeffs = {name: _pushed_numeric(eq[name], T, name) for name in COEFFICIENTS}
    return EquationInstance(coeffs, new_domain)


def remove_damping(eq: EquationInstance) -> tuple[EquationInstance, PointTransformation]:
    """Remove the Q u term with u = exp(-int Q) u_new.

    Returns the undamped instance (C, E, F multiplied by exp(-int Q), Q = 0)
    and the transformation u_new = exp(int Q) u realizing it.
    """
    q = eq["Q"]
    if q.expr is None:
        raise TypeError("remove_damping needs a symbolic Q")
    ident = TimeMap("t", eq.domain)
    if eq.q_is_zero():
        return eq, PointTransformation(ident, meta={"kind": "damping", "integral": "0"})
    integral = integral_expr(q.expr, eq.domain[0])
    damp = exp(-integral)
    coeffs = dict(eq.coefficients)
    for name in ("C", "E", "F"):
        f = coeffs[name]
        coeffs[name] = ExprFunction(f.expr * damp) if f.expr is not None else product(f, ExprFunction(damp))
    coeffs["Q"] = ExprFunction(Const(0))
    T = PointTransformation(
        ident, 0.0, 0.0, exp(integral), meta={"kind": "damping", "integral": to_source(integral)}
    )
    return EquationInstance(coeffs, eq.domain), T


def sample_points(domain, n: int = 50) -> np.ndarray:
    return np.linspace(domain[0], domain[1], n)


__all__ = [
    "COEFFICIENTS", "EquationInstance", "InvalidEquationError", "InvalidTransformationError",
    "Jet", "PointTransformation", "pushforward", "remove_damping", "sample_points",
]
