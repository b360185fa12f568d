"""Functions of t carried as truncated Taylor jets.

Coefficients of transformed equations are compositions with a numerically
inverted time map, so they have no closed form. Each function here can report
its value and its first few derivatives at a point (a :class:`Jet`), which is
what the differential invariants need. Jets compose, invert and divide
exactly up to their truncation order.
"""
from __future__ import annotations

import math
from functools import cached_property

import numpy as np

from .symexpr import Const, Expr, as_expr, compile_expr, differentiate, substitute
from .symexpr.integrate import _poly


class Jet:
    """Taylor coefficients ``c[k] = f^(k)(t0) / k!`` up to a fixed order.

    Coefficients may be floats or numpy arrays (one jet per grid point).
    """

    __slots__ = ("c",)

    def __init__(self, coeffs):
        self.c = list(coeffs)

    @property
    def order(self) -> int:
        return len(self.c) - 1

    @property
    def value(self):
        return self.c[0]

    @classmethod
    def constant(cls, value, order: int) -> "Jet":
        return cls([value] + [0.0] * order)

    def derivatives(self) -> list:
        return [ck * math.factorial(k) for k, ck in enumerate(self.c)]

    def derivative(self) -> "Jet":
        """Jet of f' (one order lower)."""
        return Jet([(k + 1) * self.c[k + 1] for k in range(self.order)])

    def truncate(self, order: int) -> "Jet":
        return Jet(self.c[: order + 1])

    def _coerce(self, other):
        if isinstance(other, Jet):
            n = min(self.order, other.order)
            return self.truncate(n), other.truncate(n)
        return self, Jet.constant(other, self.order)

    def __add__(self, other):
        a, b = self._coerce(other)
        return Jet([x + y for x, y in zip(a.c, b.c)])

    __radd__ = __add__

    def __neg__(self):
        return Jet([-x for x in self.c])

    def __sub__(self, other):
        a, b = self._coerce(other)
        return Jet([x - y for x, y in zip(a.c, b.c)])

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Jet):
            return Jet([x * other for x in self.c])
        a, b = self._coerce(other)
        n = a.order
        return Jet([sum(a.c[i] * b.c[k - i] for i in range(k + 1)) for k in range(n + 1)])

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, Jet):
            return Jet([x / other for x in self.c])
        a, b = self._coerce(other)
        q: list = []
        for k in range(a.order + 1):
            acc = a.c[k]
            for j in range(1, k + 1):
                acc = acc - b.c[j] * q[k - j]
            q.append(acc / b.c[0])
        return Jet(q)

    def __rtruediv__(self, other):
        return Jet.constant(other, self.order) / self

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise ValueError("jets support nonnegative integer powers only")
        out = Jet.constant(1.0, self.order)
        for _ in range(n):
            out = out * self
        return out

    def compose(self, inner: "Jet") -> "Jet":
        """Jet of ``self(inner(s))``; ``self`` must be expanded at ``inner.value``."""
        n = min(self.order, inner.order)
        d = Jet([0.0] + inner.c[1 : n + 1])
        out = Jet.constant(self.c[n], n)
        for k in range(n - 1, -1, -1):
            out = out * d + self.c[k]
        return out

    def revert(self, point) -> "Jet":
        """Jet of the inverse function at ``self.value``; ``point`` is where self was expanded."""
        n = self.order
        if n == 0:
            return Jet([point])
        a1 = self.c[1]
        delta = Jet([0.0, 1.0] + [0.0] * (n - 1))
        tail = Jet([0.0, 0.0] + self.c[2:]) if n >= 2 else None
        h = delta / a1
        for _ in range(max(n - 1, 0)):
            h = (delta - tail.compose(h)) / a1
        return Jet([point] + h.c[1:])


class TimeFunction:
    """A smooth function of t that can produce jets. ``expr`` is set when symbolic."""

    expr: Expr | None = None

    def jet(self, t, order: int) -> Jet:
        raise NotImplementedError

    def __call__(self, t):
        return self.jet(t, 0).value

    def derivative(self, t, k: int = 1):
        return self.jet(t, k).derivatives()[k]

    def describe(self) -> str:
        return str(self.expr) if self.expr is not None else f"<{type(self).__name__}>"


class ExprFunction(TimeFunction):
    """Function given by an expression in t; derivatives are symbolic."""

    def __init__(self, expr):
        expr = as_expr(expr)
        if expr.depends_on("x"):
            raise ValueError(f"coefficient {expr} depends on x")
        self.expr = expr
        self._derivs = [expr]

    def __repr__(self):
        return f"ExprFunction({str(self.expr)!r})"

    def nth(self, k: int) -> Expr:
        while len(self._derivs) <= k:
            self._derivs.append(differentiate(self._derivs[-1], "t"))
        return self._derivs[k]

    def jet(self, t, order: int) -> Jet:
        t = np.asarray(t, dtype=float) if np.ndim(t) else float(t)
        coeffs = []
        for k in range(order + 1):
            val = compile_expr(self.nth(k))({"t": t})
            if np.ndim(t) and np.ndim(val) == 0:
                val = np.full(np.shape(t), val)
            coeffs.append(val / math.factorial(k))
        return Jet(coeffs)

    @cached_property
    def is_zero(self) -> bool:
        return isinstance(self.expr, Const) and self.expr.value == 0


class DerivedFunction(TimeFunction):
    """Function defined by a jet-producing callable."""

    def __init__(self, jet_fn, label: str = "derived"):
        self._jet_fn = jet_fn
        self.label = label

    def __repr__(self):
        return f"DerivedFunction({self.label!r})"

    def jet(self, t, order: int) -> Jet:
        return self._jet_fn(t, order)

    def describe(self) -> str:
        return f"<{self.label}>"


def as_function(value) -> TimeFunction:
    if isinstance(value, TimeFunction):
        return value
    return ExprFunction(value)


def compose(outer: TimeFunction, inner: TimeFunction) -> TimeFunction:
    """``outer(inner(t))``, symbolic when both sides are."""
    if outer.expr is not None and inner.expr is not None:
        return ExprFunction(substitute(outer.expr, {"t": inner.expr}))

    def jet(t, order):
        ji = inner.jet(t, order)
        return outer.jet(ji.value, order).compose(ji)

    return DerivedFunction(jet, f"{outer.describe()} o {inner.describe()}")


def product(f: TimeFunction, g: TimeFunction) -> TimeFunction:
    if f.expr is not None and g.expr is not None:
        return ExprFunction(f.expr * g.expr)
    return DerivedFunction(lambda t, n: f.jet(t, n) * g.jet(t, n), f"{f.describe()} * {g.describe()}")


def reciprocal(f: TimeFunction) -> TimeFunction:
    if f.expr is not None:
        return ExprFunction(1 / f.expr)
    return DerivedFunction(lambda t, n: 1.0 / f.jet(t, n), f"1/{f.describe()}")


class MonotonicityError(ValueError):
    pass


class OutOfDomainError(ValueError):
    pass


class TimeMap(TimeFunction):
    """Strictly monotone map of a closed t-interval, with numeric inversion.

    Inversion brackets the target with a 101-point sample table, then runs
    safeguarded Newton to an absolute step of ``tol``.
    """

    def __init__(self, func, domain, samples: int = 101, tol: float = 1e-12, inverse_expr: Expr | None = None):
        self.func = as_function(func)
        self.expr = self.func.expr
        lo, hi = float(domain[0]), float(domain[1])
        if not lo < hi:
            raise ValueError(f"empty domain {domain}")
        self.domain = (lo, hi)
        self.tol = tol
        self._ts = np.linspace(lo, hi, samples)
        vals = np.asarray(self.func(self._ts), dtype=float)
        slopes = np.asarray(self.func.derivative(self._ts), dtype=float)
        if not (np.all(np.isfinite(vals)) and np.all(np.isfinite(slopes))):
            raise MonotonicityError("time map is not finite on its domain")
        diffs = np.diff(vals)
        if np.all(slopes > 0) and np.all(diffs > 0):
            self.increasing = True
        elif np.all(slopes < 0) and np.all(diffs < 0):
            self.increasing = False
        else:
            raise MonotonicityError("time map is not strictly monotone on its domain")
        self._vals = vals
        if inverse_expr is None and self.expr is not None:
            inverse_expr = _affine_inverse(self.expr)
        self.inverse_expr = inverse_expr

    def __repr__(self):
        return f"TimeMap({self.func.describe()!r}, domain={self.domain})"

    def jet(self, t, order: int) -> Jet:
        return self.func.jet(t, order)

    @property
    def image(self) -> tuple[float, float]:
        a, b = float(self._vals[0]), float(self._vals[-1])
        return (a, b) if a < b else (b, a)

    def inverse(self, y):
        """Solve ``self(t) = y`` for t (vectorized over y)."""
        arr = np.asarray(y, dtype=float)
        out = self._invert(arr.ravel())
        return float(out[0]) if arr.ndim == 0 else out.reshape(arr.shape)

    def _invert(self, y: np.ndarray) -> np.ndarray:
        # all points run the same safeguarded Newton iteration in lockstep
        vals = self._vals if self.increasing else self._vals[::-1]
        ts = self._ts if self.increasing else self._ts[::-1]
        lo_v, hi_v = vals[0], vals[-1]
        slack = 1e-9 * (1.0 + abs(hi_v - lo_v))
        bad = (y < lo_v - slack) | (y > hi_v + slack) | ~np.isfinite(y)
        if np.any(bad):
            v = y[np.argmax(bad)]
            raise OutOfDomainError(f"value {v} outside time-map image [{lo_v}, {hi_v}]")
        out = np.empty_like(y)
        low, high = y <= lo_v, y >= hi_v
        out[low], out[high] = ts[0], ts[-1]
        todo = np.flatnonzero(~(low | high))
        if todo.size == 0:
            return out
        yy = y[todo]
        i = np.clip(np.searchsorted(vals, yy), 1, len(vals) - 1)
        a, b = np.minimum(ts[i - 1], ts[i]), np.maximum(ts[i - 1], ts[i])
        sign = 1.0 if self.increasing else -1.0
        t = 0.5 * (a + b)
        active = np.ones(todo.size, dtype=bool)
        for _ in range(200):
            idx = np.flatnonzero(active)
            if idx.size == 0:
                return out
            tc = t[idx]
            jet = self.func.jet(tc, 1)
            f = np.asarray(jet.c[0], dtype=float) * np.ones_like(tc) - yy[idx]
            slope = np.asarray(jet.c[1], dtype=float) * np.ones_like(tc)
            exact = f == 0.0
            above = sign * f > 0
            b[idx] = np.where(above, tc, b[idx])
            a[idx] = np.where(above, a[idx], tc)
            with np.errstate(all="ignore"):
                nxt = tc - f / slope
            inside = (a[idx] < nxt) & (nxt < b[idx]) & np.isfinite(nxt)
            nxt = np.where(inside, nxt, 0.5 * (a[idx] + b[idx]))
            nxt = np.where(exact, tc, nxt)
            done = exact | (np.abs(nxt - tc) <= self.tol)
            narrow = (b[idx] - a[idx] <= self.tol) & ~done
            nxt = np.where(narrow, 0.5 * (a[idx] + b[idx]), nxt)
            t[idx] = nxt
            finished = done | narrow
            out[todo[idx[finished]]] = nxt[finished]
            active[idx[finished]] = False
        raise MonotonicityError("time-map inversion did not converge")

    def inverse_map(self) -> "TimeMap":
        if isinstance(self.func, InverseFunction):
            return self.func.time_map
        if self.inverse_expr is not None:
            return TimeMap(self.inverse_expr, self.image, inverse_expr=self.expr)
        return TimeMap(InverseFunction(self), self.image)


class InverseFunction(TimeFunction):
    def __init__(self, time_map: TimeMap):
        self.time_map = time_map

    def jet(self, t, order: int) -> Jet:
        tau = self.time_map.inverse(t)
        return self.time_map.jet(tau, order).revert(tau)

    def describe(self) -> str:
        return f"inverse({self.time_map.func.describe()})"


def _affine_inverse(expr: Expr) -> Expr | None:
    p = _poly(expr)
    if p is None or max(p) != 1:
        return None
    slope, offset = p[1], p.get(0, Const(0))
    return (as_expr("t") - offset) / slope
