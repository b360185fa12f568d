"""Antiderivatives in ``t``: closed forms for a small class, adaptive Simpson otherwise."""
from __future__ import annotations

import math
import threading
from fractions import Fraction

import numpy as np

from .evaluate import compile_expr
from .expr import (
    ONE,
    BinOp,
    Const,
    Expr,
    Func,
    Integral,
    Var,
    add,
    as_expr,
    div,
    func,
    mul,
    neg,
    power,
    sub,
    substitute,
)

MAX_POLY_DEGREE = 64


class QuadratureError(ArithmeticError):
    def __init__(self, message: str, estimate: float):
        self.estimate = estimate
        super().__init__(f"{message} (achieved error estimate {estimate:.3e})")


def _simpson(fa, fm, fb, a, b):
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb)


def adaptive_simpson(f, a: float, b: float, tol: float = 1e-10, max_depth: int = 40) -> float:
    """Integrate ``f`` over [a, b] by adaptive Simpson with bisection.

    Each accepted panel is Richardson-corrected. Raises QuadratureError when a
    panel still misses its share of ``tol`` at ``max_depth``.
    """
    if a == b:
        return 0.0
    fa, fm, fb = f(a), f(0.5 * (a + b)), f(b)
    whole = _simpson(fa, fm, fb, a, b)
    total = 0.0
    worst = 0.0
    # explicit stack: (a, b, fa, fm, fb, whole, tol, depth)
    stack = [(a, b, fa, fm, fb, whole, tol, 0)]
    while stack:
        a, b, fa, fm, fb, whole, tol_i, depth = stack.pop()
        m = 0.5 * (a + b)
        lm, rm = 0.5 * (a + m), 0.5 * (m + b)
        flm, frm = f(lm), f(rm)
        left = _simpson(fa, flm, fm, a, m)
        right = _simpson(fm, frm, fb, m, b)
        delta = left + right - whole
        if not math.isfinite(delta):
            raise QuadratureError(f"non-finite integrand on [{a}, {b}]", math.inf)
        if abs(delta) <= 15.0 * tol_i or depth >= max_depth:
            if abs(delta) > 15.0 * tol_i:
                raise QuadratureError(
                    f"adaptive Simpson did not converge on [{a}, {b}] at depth {max_depth}",
                    abs(delta) / 15.0,
                )
            total += left + right + delta / 15.0
            worst = max(worst, abs(delta) / 15.0)
            continue
        stack.append((m, b, fm, frm, fb, right, 0.5 * tol_i, depth + 1))
        stack.append((a, m, fa, flm, fm, left, 0.5 * tol_i, depth + 1))
    return total


def _poly(e: Expr):
    """Coefficients {degree: Expr} if ``e`` is a polynomial in t, else None."""
    if not e.depends_on("t"):
        return None if e.depends_on("x") else {0: e}
    if isinstance(e, Var):
        return {1: ONE}
    if isinstance(e, Func) and e.name == "neg":
        p = _poly(e.arg)
        return None if p is None else {k: neg(v) for k, v in p.items()}
    if not isinstance(e, BinOp):
        return None
    if e.op in "+-":
        p, q = _poly(e.left), _poly(e.right)
        if p is None or q is None:
            return None
        out = dict(p)
        for k, v in q.items():
            out[k] = (add if e.op == "+" else sub)(out.get(k, Const(0)), v)
        return out
    if e.op == "*":
        p, q = _poly(e.left), _poly(e.right)
        if p is None or q is None:
            return None
        return _pmul(p, q)
    if e.op == "/":
        if e.right.depends_on("t"):
            return None
        p = _poly(e.left)
        return None if p is None else {k: div(v, e.right) for k, v in p.items()}
    if e.op == "^":
        n = e.right
        if not (isinstance(n, Const) and isinstance(n.value, Fraction) and n.value.denominator == 1):
            return None
        n = int(n.value)
        p = _poly(e.left)
        if p is None or n < 0 or n * max(p) > MAX_POLY_DEGREE:
            return None
        out = {0: ONE}
        for _ in range(n):
            out = _pmul(out, p)
        return out
    return None


def _pmul(p, q):
    out: dict = {}
    for i, a in p.items():
        for j, b in q.items():
            out[i + j] = add(out.get(i + j, Const(0)), mul(a, b))
    if max(out) > MAX_POLY_DEGREE:
        return None
    return out


def _affine_slope(arg: Expr):
    p = _poly(arg)
    if p is None or max(p) > 1 or 1 not in p:
        return None
    k = p[1]
    if isinstance(k, Const) and k.value == 0:
        return None
    return k


def symbolic_integral(e: Expr) -> Expr | None:
    """Closed-form antiderivative in t, or None outside the supported class.

    Supported: polynomials, exp/sin/cos of affine arguments, and sums and
    constant multiples of these.
    """
    if e.depends_on("x"):
        return None
    if not e.depends_on("t"):
        return mul(e, Var("t"))
    p = _poly(e)
    if p is not None:
        out: Expr = Const(0)
        for k in sorted(p):
            out = add(out, mul(div(p[k], Const(k + 1)), power(Var("t"), Const(k + 1))))
        return out
    if isinstance(e, BinOp):
        if e.op in "+-":
            f, g = symbolic_integral(e.left), symbolic_integral(e.right)
            if f is None or g is None:
                return None
            return add(f, g) if e.op == "+" else sub(f, g)
        if e.op == "*":
            if not e.left.depends_on("t"):
                g = symbolic_integral(e.right)
                return None if g is None else mul(e.left, g)
            if not e.right.depends_on("t"):
                f = symbolic_integral(e.left)
                return None if f is None else mul(f, e.right)
            return None
        if e.op == "/" and not e.right.depends_on("t"):
            f = symbolic_integral(e.left)
            return None if f is None else div(f, e.right)
        return None
    if isinstance(e, Func):
        if e.name == "neg":
            f = symbolic_integral(e.arg)
            return None if f is None else neg(f)
        if e.name in ("exp", "sin", "cos"):
            k = _affine_slope(e.arg)
            if k is None:
                return None
            if e.name == "exp":
                return div(e, k)
            if e.name == "sin":
                return neg(div(func("cos", e.arg), k))
            return div(func("sin", e.arg), k)
    return None


def _exact(t0) -> Const:
    if isinstance(t0, Fraction):
        return Const(t0)
    if float(t0).is_integer():
        return Const(Fraction(int(t0)))
    return Const(float(t0))


class Antiderivative:
    """``Phi(t) = integral of integrand from t0 to t``.

    ``mode`` is "symbolic" when a closed form was found, else
    "quadrature"; pass ``mode="quadrature"`` to force the numeric route.
    Quadrature values are built from memoized fixed-width panels anchored at
    ``t0`` plus one adaptive partial panel.
    """

    def __init__(self, integrand, t0: float = 0.0, mode: str | None = None, tol: float = 1e-10,
                 panel_width: float = 0.25, max_depth: int = 40):
        integrand = as_expr(integrand)
        if integrand.depends_on("x"):
            raise ValueError("antiderivative integrand must depend on t only")
        if mode not in (None, "symbolic", "quadrature"):
            raise ValueError(f"unknown mode {mode!r}")
        if tol <= 0:
            raise ValueError("tolerance must be positive")
        self.integrand = integrand
        self.t0 = float(t0)
        self.tol = tol
        self.panel_width = panel_width
        self.max_depth = max_depth
        self.expr: Expr | None = None
        closed = None if mode == "quadrature" else symbolic_integral(integrand)
        if mode == "symbolic" and closed is None:
            raise ValueError(f"no closed-form antiderivative for {integrand}")
        if closed is not None:
            self.mode = "symbolic"
            self.expr = sub(closed, substitute(closed, {"t": _exact(t0)}))
        else:
            self.mode = "quadrature"
        self._plan = compile_expr(integrand)
        self._lock = threading.Lock()
        self._panels: dict[int, float] = {}
        self._offsets: dict[int, float] = {0: 0.0}
        self._values: dict[float, float] = {self.t0: 0.0}

    def __eq__(self, other):
        return (
            isinstance(other, Antiderivative)
            and self.integrand == other.integrand
            and self.t0 == other.t0
        )

    def __hash__(self):
        return hash(("antiderivative", self.integrand, self.t0))

    def __repr__(self):
        return f"Antiderivative({str(self.integrand)!r}, t0={self.t0}, mode={self.mode!r})"

    def integrand_value(self, t):
        return self._plan({"t": t})

    def derivative(self) -> Expr:
        return self.integrand

    def as_expr(self) -> Expr:
        """Closed form when available, otherwise an opaque integral node."""
        if self.expr is not None:
            return self.expr
        return Integral(self)

    def __call__(self, t):
        if self.mode == "symbolic":
            return compile_expr(self.expr)({"t": t})
        arr = np.asarray(t, dtype=float)
        if arr.ndim == 0:
            return self._quad_value(float(arr))
        flat = arr.ravel()
        uniq, inverse = np.unique(flat, return_inverse=True)
        vals = np.array([self._quad_value(float(v)) for v in uniq])
        return vals[inverse].reshape(arr.shape)

    def quadrature(self, t):
        """Numeric value regardless of mode (cross-checks the closed form)."""
        arr = np.asarray(t, dtype=float)
        return np.vectorize(self._quad_value, otypes=[float])(arr) if arr.ndim else self._quad_value(float(arr))

    def _f(self, s: float) -> float:
        return self._plan({"t": s})

    def _panel(self, k: int) -> float:
        val = self._panels.get(k)
        if val is None:
            a = self.t0 + k * self.panel_width
            val = adaptive_simpson(self._f, a, a + self.panel_width, self.tol, self.max_depth)
            self._panels[k] = val
        return val

    def _offset(self, k: int) -> float:
        """Integral from t0 to the left edge of panel k."""
        if k in self._offsets:
            return self._offsets[k]
        step = 1 if k > 0 else -1
        j = k
        while j not in self._offsets:
            j -= step
        acc = self._offsets[j]
        while j != k:
            if step > 0:
                acc += self._panel(j)
            else:
                acc -= self._panel(j - 1)
            j += step
            self._offsets[j] = acc
        return acc

    def _quad_value(self, t: float) -> float:
        with self._lock:
            hit = self._values.get(t)
            if hit is not None:
                return hit
            k = math.floor((t - self.t0) / self.panel_width)
            left = self.t0 + k * self.panel_width
            val = self._offset(k) + adaptive_simpson(self._f, left, t, self.tol, self.max_depth)
            if len(self._values) < 100_000:
                self._values[t] = val
            return val


def antiderivative(e, t0: float = 0.0, **kw) -> Antiderivative:
    return Antiderivative(e, t0, **kw)


def integral_expr(e, t0: float = 0.0) -> Expr:
    """Expression for the integral of ``e`` from ``t0`` to ``t``."""
    return Antiderivative(e, t0).as_expr()
