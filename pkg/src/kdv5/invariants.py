"""Zero- and first-order differential invariants of the undamped class and the
invariant equations that separate it into strata.

Zero order::

    J1_0 = A E / (B C)            J2_0 = F / C

First order::

    J1_1 = A (A_t B - A B_t)^2 / B^7
    J2_1 = A (A_t C - A C_t)^2 / (B^5 C^2)
    J3_1 = A^3 (A_t E - A E_t)^2 / (B^7 C^2)
    J4_1 = A (A_t F - A F_t)^2 / (B^5 C^2)

Values are sampled on a uniform grid. Points where B (or C) is within
``ZERO_THRESHOLD`` of zero are undefined (NaN) and make the constancy verdict
false.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .model import EquationInstance

ZERO_THRESHOLD = 1e-12
DEFAULT_GRID_POINTS = 101
DEFAULT_REL_TOL = 1e-9
DEFAULT_ABS_TOL = 1e-10

ZERO_ORDER = ("J1_0", "J2_0")
FIRST_ORDER = ("J1_1", "J2_1", "J3_1", "J4_1")
NAMES = ZERO_ORDER + FIRST_ORDER
BASIS = ("J1_0", "J2_0", "J1_1", "J2_1")
FLAGS = (
    "A=0", "B=0", "C=0", "E=0", "F=0",
    "A_t*B-A*B_t=0", "A_t*C-A*C_t=0", "A_t*E-A*E_t=0", "A_t*F-A*F_t=0",
)


def _jets(eq: EquationInstance, t):
    t = np.atleast_1d(np.asarray(t, dtype=float))
    out = {}
    for name in "ABCEF":
        j = eq[name].jet(t, 1)
        out[name] = np.asarray(j.c[0], dtype=float) * np.ones_like(t)
        out[name + "_t"] = np.asarray(j.c[1], dtype=float) * np.ones_like(t)
    return out


def _safe_div(num, den, bad):
    with np.errstate(all="ignore"):
        out = num / den
    return np.where(bad, np.nan, out)


def _zero_order(v):
    A, B, C, E, F = (v[k] for k in "ABCEF")
    bad_b = np.abs(B) <= ZERO_THRESHOLD
    bad_c = np.abs(C) <= ZERO_THRESHOLD
    return {
        "J1_0": _safe_div(A * E, B * C, bad_b | bad_c),
        "J2_0": _safe_div(F, C, bad_c),
    }


def _wronskians(v):
    A, A_t = v["A"], v["A_t"]
    return {k: A_t * v[k] - A * v[k + "_t"] for k in "BCEF"}


def _first_order(v):
    A, B, C = v["A"], v["B"], v["C"]
    w = _wronskians(v)
    bad = (np.abs(B) <= ZERO_THRESHOLD) | (np.abs(C) <= ZERO_THRESHOLD)
    return {
        "J1_1": _safe_div(A * w["B"] ** 2, B**7, bad),
        "J2_1": _safe_div(A * w["C"] ** 2, B**5 * C**2, bad),
        "J3_1": _safe_div(A**3 * w["E"] ** 2, B**7 * C**2, bad),
        "J4_1": _safe_div(A * w["F"] ** 2, B**5 * C**2, bad),
    }


def zero_order_invariants(eq: EquationInstance, t=None):
    """(J1_0, J2_0) at the points t (default: 101-point grid); NaN where undefined."""
    t = eq.grid(DEFAULT_GRID_POINTS) if t is None else t
    z = _zero_order(_jets(eq, t))
    return z["J1_0"], z["J2_0"]


def first_order_invariants(eq: EquationInstance, t=None):
    """(J1_1, J2_1, J3_1, J4_1) at the points t; NaN where B or C vanishes."""
    t = eq.grid(DEFAULT_GRID_POINTS) if t is None else t
    f = _first_order(_jets(eq, t))
    return tuple(f[k] for k in FIRST_ORDER)


def invariants_at(eq: EquationInstance, t) -> dict[str, np.ndarray]:
    v = _jets(eq, t)
    return {**_zero_order(v), **_first_order(v)}


def invariant_equation_flags(eq: EquationInstance, t=None, abs_tol: float = DEFAULT_ABS_TOL) -> dict[str, bool]:
    """Truth of A=0, ..., F=0 and of the four Wronskian equations on the grid."""
    t = eq.grid(DEFAULT_GRID_POINTS) if t is None else t
    v = _jets(eq, t)
    w = _wronskians(v)
    quantities = [v[k] for k in "ABCEF"] + [w[k] for k in "BCEF"]
    return {name: bool(np.all(np.abs(q) <= abs_tol)) for name, q in zip(FLAGS, quantities)}


def is_constant(values, rel_tol: float = DEFAULT_REL_TOL) -> bool:
    values = np.asarray(values, dtype=float)
    if values.size == 0 or not np.all(np.isfinite(values)):
        return False
    spread = float(values.max() - values.min())
    return spread <= rel_tol * (1.0 + float(np.median(np.abs(values))))


@dataclass
class InvariantSignature:
    grid: np.ndarray
    values: dict[str, np.ndarray]
    flags: dict[str, bool]
    rel_tol: float = DEFAULT_REL_TOL
    constant: dict[str, bool] = field(init=False)

    def __post_init__(self):
        self.constant = {k: is_constant(v, self.rel_tol) for k, v in self.values.items()}

    def constant_value(self, name: str) -> float | None:
        if not self.constant[name]:
            return None
        return float(np.median(self.values[name]))

    def defined(self, name: str) -> bool:
        return bool(np.all(np.isfinite(self.values[name])))

    def to_json(self) -> dict:
        n = len(self.grid)
        picks = {"start": 0, "mid": n // 2, "end": n - 1}

        def num(v):
            v = float(v)
            return v if math.isfinite(v) else None

        invariants = {}
        for name in NAMES:
            vals = self.values[name]
            entry = {
                "values": {label: {"t": float(self.grid[i]), "value": num(vals[i])} for label, i in picks.items()},
                "defined": self.defined(name),
                "isConstant": self.constant[name],
            }
            if self.constant[name]:
                entry["constantValue"] = self.constant_value(name)
            invariants[name] = entry
        return {
            "grid": {"tRange": [float(self.grid[0]), float(self.grid[-1])], "points": n},
            "relTol": self.rel_tol,
            "invariants": invariants,
            "flags": dict(self.flags),
        }


def signature(
    eq: EquationInstance,
    points: int = DEFAULT_GRID_POINTS,
    rel_tol: float = DEFAULT_REL_TOL,
    abs_tol: float = DEFAULT_ABS_TOL,
) -> InvariantSignature:
    if points < 2:
        raise ValueError("need at least two grid points")
    if rel_tol <= 0 or abs_tol <= 0:
        raise ValueError("tolerances must be positive")
    t = eq.grid(points)
    v = _jets(eq, t)
    values = {**_zero_order(v), **_first_order(v)}
    w = _wronskians(v)
    quantities = [v[k] for k in "ABCEF"] + [w[k] for k in "BCEF"]
    flags = {name: bool(np.all(np.abs(q) <= abs_tol)) for name, q in zip(FLAGS, quantities)}
    return InvariantSignature(t, values, flags, rel_tol)
