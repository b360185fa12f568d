"""Screening against the constant-coefficient equation

    u_t + m1 u_xxxxx + m2 u_xxx + m3 u u_xxx + m4 u u_x + m5 u_x u_xx = 0

recognition of the variable-coefficient forms that map to it, and
construction of the explicit transformation.

Recognized forms, with G(t) != 0, H(t) != 0 and constants c1, r1, r2::

    A = G, B = c1 G, C = H, E = c1 r1 H, F = r2 H, Q = (G H_t - G_t H) / (G H)

where r1 = m1 m4 / (m2 m3) and r2 = m5 / m3. With Q = 0 this is the undamped
form in which C, E, F are all proportional to G.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational
from typing import Sequence

import numpy as np

from . import invariants as inv
from .model import EquationInstance, PointTransformation
from .symexpr import Const, Expr, as_expr, differentiate, integral_expr, to_source
from .timefunc import ExprFunction, TimeFunction, TimeMap

RATIO_REL_TOL = 1e-9
Q_ABS_TOL = 1e-9
RECONSTRUCTION_REL_TOL = 1e-9


class NoRealTransformationError(ValueError):
    pass


def _number(v):
    if isinstance(v, bool):
        raise TypeError("boolean is not a constant")
    if isinstance(v, Rational):
        return Fraction(v)
    return float(v)


@dataclass(frozen=True)
class TargetConstants:
    """The five nonzero constants of the constant-coefficient equation."""

    m1: object
    m2: object
    m3: object
    m4: object
    m5: object

    def __post_init__(self):
        for name in ("m1", "m2", "m3", "m4", "m5"):
            v = _number(getattr(self, name))
            if v == 0 or not math.isfinite(float(v)):
                raise ValueError(f"{name} must be a finite nonzero constant, got {v}")
            object.__setattr__(self, name, v)

    @classmethod
    def of(cls, values: Sequence) -> "TargetConstants":
        if isinstance(values, TargetConstants):
            return values
        values = list(values)
        if len(values) != 5:
            raise ValueError(f"expected five constants, got {len(values)}")
        return cls(*values)

    def as_tuple(self) -> tuple:
        return (self.m1, self.m2, self.m3, self.m4, self.m5)

    def floats(self) -> tuple[float, ...]:
        return tuple(float(v) for v in self.as_tuple())

    @property
    def r1(self):
        return self.m1 * self.m4 / (self.m2 * self.m3)

    @property
    def r2(self):
        return self.m5 / self.m3

    def instance(self, domain=(0.0, 1.0), Q=0) -> EquationInstance:
        return EquationInstance.constant(self.as_tuple(), domain, Q)

    def to_json(self) -> list:
        return [float(v) for v in self.as_tuple()]


def _close(a: float, b: float, rel: float) -> bool:
    return abs(a - b) <= rel * max(abs(a), abs(b), 1e-300)


def extract_constant(num, den, rel_tol: float = RATIO_REL_TOL):
    """Median of num/den and whether every pointwise ratio is within rel_tol of it."""
    num, den = np.asarray(num, dtype=float), np.asarray(den, dtype=float)
    if np.any(np.abs(den) <= inv.ZERO_THRESHOLD):
        return math.nan, False, math.inf
    ratio = num / den
    med = float(np.median(ratio))
    dev = float(np.max(np.abs(ratio - med)))
    scale = abs(med)
    ok = bool(np.all(np.isfinite(ratio))) and dev <= rel_tol * scale + 1e-14
    return med, ok, (dev / scale if scale else dev)


# -- necessary conditions ---------------------------------------------------


@dataclass
class NecessaryVerdict:
    verdict: str  # "candidate" | "excluded"
    checks: dict
    target: TargetConstants | None = None

    @property
    def candidate(self) -> bool:
        return self.verdict == "candidate"

    @property
    def failed(self) -> list[str]:
        return [k for k, v in self.checks.items() if not v["passed"]]

    def to_json(self) -> dict:
        out = {"verdict": self.verdict, "failed": self.failed, "checks": self.checks}
        if self.target is not None:
            out["target"] = self.target.to_json()
        return out


def check_necessary_equivalence(
    eq: EquationInstance,
    m: TargetConstants | Sequence | None = None,
    points: int = inv.DEFAULT_GRID_POINTS,
    rel_tol: float = RATIO_REL_TOL,
    abs_tol: float = inv.DEFAULT_ABS_TOL,
) -> NecessaryVerdict:
    """Necessary conditions for mapping ``eq`` to the constant-coefficient equation.

    The basis invariants must equal their constant-coefficient values:
    J1_0 = m1 m4/(m2 m3), J2_0 = m5/m3, J1_1 = J2_1 = 0. Without ``m`` only
    constancy of J1_0, J2_0 is required. A "candidate" verdict is necessary,
    not sufficient.
    """
    if not eq.q_is_zero():
        raise ValueError("equation has a damping term; apply remove_damping first")
    target = None if m is None else TargetConstants.of(m)
    sig = inv.signature(eq, points, rel_tol, abs_tol)
    checks: dict = {}
    for name in "BEF":
        zero_somewhere = bool(np.any(np.abs(np.asarray(eq[name](sig.grid)) * np.ones_like(sig.grid)) <= inv.ZERO_THRESHOLD))
        checks[f"{name}!=0"] = {"passed": not zero_somewhere}
    targets = {}
    if target is not None:
        targets = {"J1_0": float(target.r1), "J2_0": float(target.r2)}
    for name in ("J1_0", "J2_0"):
        vals = sig.values[name]
        entry = {"isConstant": sig.constant[name]}
        passed = sig.constant[name]
        if passed:
            entry["value"] = sig.constant_value(name)
        if name in targets:
            entry["expected"] = targets[name]
            if passed:
                passed = bool(np.all(np.abs(vals - targets[name]) <= rel_tol * (1 + abs(targets[name]))))
        entry["passed"] = passed
        checks[name] = entry
    for name in ("J1_1", "J2_1"):
        vals = sig.values[name]
        finite = bool(np.all(np.isfinite(vals)))
        worst = float(np.max(np.abs(vals))) if finite else math.inf
        checks[name] = {"passed": finite and worst <= abs_tol, "expected": 0.0, "maxAbs": worst if finite else None}
    verdict = "candidate" if all(c["passed"] for c in checks.values()) else "excluded"
    return NecessaryVerdict(verdict, checks, target)


# -- recognition --------------------------------------------------------------


@dataclass
class RecognitionResult:
    matched: bool
    form: str  # "undamped" | "damped"
    domain: tuple[float, float]
    G: TimeFunction | None = None
    H: TimeFunction | None = None
    c1: float = math.nan
    r1: float = math.nan
    r2: float = math.nan
    h_over_g: float | None = None  # constant C/A when H is proportional to G
    diagnostics: dict = field(default_factory=dict)
    reconstruction_residual: float | None = None

    def reconstruct(self) -> EquationInstance:
        if self.G is None or self.H is None:
            raise ValueError("no G/H available")
        if self.G.expr is None or self.H.expr is None:
            raise TypeError("reconstruction needs symbolic G and H")
        return transformed_instance(self.G.expr, self.H.expr, self.c1, None, self.domain, r1=self.r1, r2=self.r2)

    def to_json(self) -> dict:
        out = {"matched": self.matched, "form": self.form, "diagnostics": self.diagnostics}
        if self.matched:
            out.update(
                c1=self.c1,
                r1=self.r1,
                r2=self.r2,
                G=self.G.describe(),
                H=self.H.describe(),
                reconstructionResidual=self.reconstruction_residual,
            )
        return out


def _reconstruction_residual(eq: EquationInstance, rec: RecognitionResult, t) -> float:
    G, H = rec.G.jet(t, 1), rec.H.jet(t, 1)
    g, gt, h, ht = (np.asarray(v, dtype=float) * np.ones_like(t) for v in (G.c[0], G.c[1], H.c[0], H.c[1]))
    expected = {
        "A": g,
        "B": rec.c1 * g,
        "C": h,
        "E": rec.c1 * rec.r1 * h,
        "F": rec.r2 * h,
        "Q": (g * ht - gt * h) / (g * h),
    }
    worst = 0.0
    for name, want in expected.items():
        got = np.asarray(eq[name](t), dtype=float) * np.ones_like(t)
        scale = np.maximum(np.abs(want), 1.0) if name == "Q" else np.abs(want)
        worst = max(worst, float(np.max(np.abs(got - want) / np.maximum(scale, 1e-300))))
    return worst


def recognize_ed2(eq: EquationInstance, points: int = inv.DEFAULT_GRID_POINTS,
                  rel_tol: float = RATIO_REL_TOL) -> RecognitionResult:
    """Recognize the undamped form: B, C, E, F all constant multiples of A."""
    if not eq.q_is_zero():
        raise ValueError("equation has a damping term; use recognize_transed2")
    t = eq.grid(points)
    v = eq.values(t)
    diag = {}
    consts = {}
    for name, label in (("B", "B/A"), ("C", "C/A"), ("E", "E/A"), ("F", "F/A")):
        val, ok, dev = extract_constant(v[name], v["A"], rel_tol)
        consts[name] = val
        diag[label] = {"constant": ok, "value": val if math.isfinite(val) else None, "relDeviation": dev}
    matched = all(d["constant"] for d in diag.values())
    rec = RecognitionResult(False, "undamped", eq.domain, diagnostics=diag)
    if not matched:
        return rec
    c1, kc, ke, kf = consts["B"], consts["C"], consts["E"], consts["F"]
    if c1 == 0 or kc == 0:
        diag["degenerate"] = "B or C vanishes identically"
        return rec
    rec.matched = True
    rec.G, rec.H = eq["A"], eq["C"]
    rec.c1, rec.r1, rec.r2 = c1, ke / (c1 * kc), kf / kc
    rec.h_over_g = kc
    rec.reconstruction_residual = _reconstruction_residual(eq, rec, t)
    return rec


def recognize_transed2(eq: EquationInstance, points: int = inv.DEFAULT_GRID_POINTS,
                       rel_tol: float = RATIO_REL_TOL, q_tol: float = Q_ABS_TOL) -> RecognitionResult:
    """Recognize the damped form with G = A, H = C and Q = C_t/C - A_t/A."""
    t = eq.grid(points)
    jets = {k: eq[k].jet(t, 1) for k in "ABCEFQ"}
    v = {k: np.asarray(j.c[0], dtype=float) * np.ones_like(t) for k, j in jets.items()}
    d = {k: np.asarray(j.c[1], dtype=float) * np.ones_like(t) for k, j in jets.items()}
    diag = {}
    c1, ok1, dev1 = extract_constant(v["B"], v["A"], rel_tol)
    diag["B/A"] = {"constant": ok1, "value": c1 if math.isfinite(c1) else None, "relDeviation": dev1}
    r2, ok2, dev2 = extract_constant(v["F"], v["C"], rel_tol)
    diag["F/C"] = {"constant": ok2, "value": r2 if math.isfinite(r2) else None, "relDeviation": dev2}
    r1, ok3, dev3 = extract_constant(v["A"] * v["E"], v["B"] * v["C"], rel_tol)
    diag["AE/(BC)"] = {"constant": ok3, "value": r1 if math.isfinite(r1) else None, "relDeviation": dev3}
    q_expected = d["C"] / v["C"] - d["A"] / v["A"]
    q_res = float(np.max(np.abs(v["Q"] - q_expected)))
    diag["Q=C_t/C-A_t/A"] = {"holds": q_res <= q_tol, "maxAbsResidual": q_res}
    matched = ok1 and ok2 and ok3 and q_res <= q_tol and c1 != 0
    rec = RecognitionResult(False, "damped", eq.domain, diagnostics=diag)
    if not matched:
        return rec
    rec.matched = True
    rec.G, rec.H = eq["A"], eq["C"]
    rec.c1, rec.r1, rec.r2 = c1, r1, r2
    hg, ok, _ = extract_constant(v["C"], v["A"], rel_tol)
    rec.h_over_g = hg if ok else None
    rec.reconstruction_residual = _reconstruction_residual(eq, rec, t)
    return rec


def recognize(eq: EquationInstance, **kw) -> RecognitionResult:
    if eq.q_is_zero():
        return recognize_ed2(eq, **kw)
    return recognize_transed2(eq, **kw)


# -- construction -------------------------------------------------------------


def transformed_instance(G, H, c1, m: TargetConstants | None, domain, r1=None, r2=None) -> EquationInstance:
    """Instance with A = G, B = c1 G, C = H, E = c1 r1 H, F = r2 H, Q = (G H_t - G_t H)/(G H)."""
    G, H = as_expr(G), as_expr(H)
    if m is not None:
        m = TargetConstants.of(m)
        r1, r2 = m.r1, m.r2
    c1, r1, r2 = (Const(_number(v)) for v in (c1, r1, r2))
    Q = (G * differentiate(H, "t") - differentiate(G, "t") * H) / (G * H)
    return EquationInstance.from_exprs(domain, G, c1 * G, H, c1 * r1 * H, r2 * H, Q)


def undamped_instance(G, c1, c2, m: TargetConstants, domain) -> EquationInstance:
    """Undamped form: C = (c2 m3/m5) G, E = (c1 c2 m1 m4/(m2 m5)) G, F = c2 G."""
    m = TargetConstants.of(m)
    G = as_expr(G)
    c1, c2 = Const(_number(c1)), Const(_number(c2))
    m1, m2, m3, m4, m5 = (Const(v) for v in m.as_tuple())
    return EquationInstance.from_exprs(
        domain, G, c1 * G, c2 * m3 / m5 * G, c1 * c2 * m1 * m4 / (m2 * m5) * G, c2 * G
    )


def build_transformation(rec: RecognitionResult, m: TargetConstants | Sequence, k2: float = 0.0) -> PointTransformation:
    """Transformation from the recognized equation (old) to the constant one (new).

    New variables::

        t = (c1 m1/m2)^(5/2) / m1 * int_{t0}^{t_old} G,
        x = sqrt(c1 m1/m2) (x_old + k2),
        u = m2 H / (c1 m3 G) * u_old

    Its inverse carries constant-coefficient solutions to the recognized
    equation. The time prefactor equals (c1/m2)^(5/2) m1^(3/2) when m1 > 0
    and stays real whenever c1 m1/m2 > 0.
    """
    if not rec.matched:
        raise ValueError("recognition did not match; no transformation to build")
    m = TargetConstants.of(m)
    if rec.G.expr is None or rec.H.expr is None:
        raise TypeError("build_transformation needs symbolic G and H")
    if not (_close(rec.r1, float(m.r1), RATIO_REL_TOL * 10) and _close(rec.r2, float(m.r2), RATIO_REL_TOL * 10)):
        raise ValueError(
            f"target constants give m1m4/(m2m3)={float(m.r1)}, m5/m3={float(m.r2)}; "
            f"equation has {rec.r1}, {rec.r2}"
        )
    m1, m2, m3, _, m5 = m.floats()
    c1 = rec.c1
    radicand = c1 * m1 / m2
    if not radicand > 0:
        raise NoRealTransformationError(
            f"no real transformation with these constants: c1*m1/m2 = {radicand} is not positive"
        )
    alpha = math.sqrt(radicand)
    prefactor = alpha**5 / m1
    t0 = rec.domain[0]
    G, H = rec.G.expr, rec.H.expr
    lam = Const(prefactor) * integral_expr(G, t0)
    if rec.h_over_g is not None and rec.form == "undamped":
        scale: Expr = Const(m2 * rec.h_over_g / (c1 * m3))
    else:
        scale = Const(m2 / (c1 * m3)) * H / G
    time_map = TimeMap(lam, rec.domain)
    meta = {
        "kind": "constant-coefficient",
        "prefactor": prefactor,
        "integrandSource": to_source(G),
        "basePoint": t0,
        "xScale": alpha,
        "k2": float(k2),
        "uScaleSource": to_source(scale),
        "c1": c1,
        "target": m.to_json(),
        "G": to_source(G),
        "H": to_source(H),
    }
    return PointTransformation(time_map, math.log(alpha), float(k2), ExprFunction(scale),
                               ("recognized", "constant"), meta)


def transformation_json(T: PointTransformation) -> dict:
    """Structured description of a transformation built by :func:`build_transformation`.

    Reading: t_const = prefactor * int_{basePoint}^{t} G,
    x_const = xScale (x + k2), u_const = uScale * u with ``uScaleSource``
    the expression of uScale in t.
    """
    meta = T.meta
    return {
        "tMap": {
            "prefactor": meta["prefactor"],
            "integrandSource": meta["integrandSource"],
            "basePoint": meta["basePoint"],
            "source": to_source(T.time_map.expr),
        },
        "xScale": meta["xScale"],
        "k2": meta["k2"],
        "uScaleSource": meta["uScaleSource"],
        "c1": meta["c1"],
        "target": meta["target"],
        "G": meta["G"],
        "H": meta["H"],
        "domain": list(T.domain),
        "increasing": T.time_map.increasing,
    }
