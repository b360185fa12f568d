"""Grid certification of closed-form solutions against equation instances."""
from __future__ import annotations

import contextlib
import csv
import os
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .model import EquationInstance
from .solutions import ClosedFormSolution
from .symexpr import Expr, compile_expr, evaluate_mp, nth_derivative

DEFAULT_THRESHOLD = 1e-8
TRANSFORMED_THRESHOLD = 1e-6
TERMS = ("u_t", "A*u_5x", "B*u_3x", "C*u*u_3x", "E*u*u_x", "F*u_x*u_2x", "Q*u")


@dataclass(frozen=True)
class Grid:
    t_range: tuple[float, float] = (0.0, 1.0)
    x_range: tuple[float, float] = (-10.0, 10.0)
    nt: int = 101
    nx: int = 401

    def __post_init__(self):
        if self.nt < 1 or self.nx < 1:
            raise ValueError("grid needs at least one node per axis")
        for lo, hi in (self.t_range, self.x_range):
            if lo > hi:
                raise ValueError(f"bad range [{lo}, {hi}]")

    @property
    def t(self) -> np.ndarray:
        return np.linspace(*self.t_range, self.nt)

    @property
    def x(self) -> np.ndarray:
        return np.linspace(*self.x_range, self.nx)

    def mesh(self):
        return np.meshgrid(self.t, self.x, indexing="ij")

    def to_json(self) -> dict:
        return {"tRange": list(self.t_range), "xRange": list(self.x_range), "nt": self.nt, "nx": self.nx}


@dataclass
class VerificationReport:
    grid: Grid
    max_abs_residual: float
    argmax: tuple[float, float]
    term_magnitudes: dict[str, float]
    threshold: float

    @property
    def passed(self) -> bool:
        return self.max_abs_residual <= self.threshold

    def to_json(self) -> dict:
        return {
            "grid": self.grid.to_json(),
            "maxAbsResidual": self.max_abs_residual,
            "argmax": {"t": self.argmax[0], "x": self.argmax[1]},
            "perTermMagnitudes": dict(self.term_magnitudes),
            "threshold": self.threshold,
            "pass": self.passed,
        }


def default_threshold(sol: ClosedFormSolution) -> float:
    return TRANSFORMED_THRESHOLD if sol.family == "transformed" else DEFAULT_THRESHOLD


def _on(expr: Expr, tt, xx):
    return np.asarray(compile_expr(expr)({"t": tt, "x": xx}), dtype=float) * np.ones_like(tt)


def residual_terms(u: Expr, eq: EquationInstance, tt, xx) -> dict[str, np.ndarray]:
    """The seven left-hand-side terms at the nodes (tt, xx)."""
    d = [_on(nth_derivative(u, "x", k), tt, xx) for k in range(6)]
    ut = _on(nth_derivative(u, "t", 1), tt, xx)
    c = eq.values(tt)
    return {
        "u_t": ut,
        "A*u_5x": c["A"] * d[5],
        "B*u_3x": c["B"] * d[3],
        "C*u*u_3x": c["C"] * d[0] * d[3],
        "E*u*u_x": c["E"] * d[0] * d[1],
        "F*u_x*u_2x": c["F"] * d[1] * d[2],
        "Q*u": c["Q"] * d[0],
    }


def pde_residual(
    sol: ClosedFormSolution, eq: EquationInstance, grid: Grid | None = None, threshold: float | None = None
) -> VerificationReport:
    grid = grid or Grid()
    threshold = default_threshold(sol) if threshold is None else threshold
    if threshold <= 0:
        raise ValueError("threshold must be positive")
    tt, xx = grid.mesh()
    terms = residual_terms(sol.u, eq, tt, xx)
    total = sum(terms.values())
    mag = np.abs(total)
    if not np.all(np.isfinite(mag)):
        i = int(np.argmax(~np.isfinite(mag)))
        return VerificationReport(
            grid, float("inf"), (float(tt.flat[i]), float(xx.flat[i])),
            {k: float(np.max(np.abs(v))) for k, v in terms.items()}, threshold,
        )
    i = int(np.argmax(mag))  # first maximum in row-major order
    return VerificationReport(
        grid,
        float(mag.flat[i]),
        (float(tt.flat[i]), float(xx.flat[i])),
        {k: float(np.max(np.abs(v))) for k, v in terms.items()},
        threshold,
    )


@lru_cache(maxsize=None)
def central_weights(order: int, accuracy: int = 6) -> tuple[list, int]:
    """Central finite-difference weights for the ``order``-th derivative."""
    import mpmath

    p = (order + 1) // 2 - 1 + accuracy // 2
    offsets = list(range(-p, p + 1))
    with mpmath.workdps(60):
        n = len(offsets)
        V = mpmath.matrix(n, n)
        rhs = mpmath.matrix(n, 1)
        for k in range(n):
            for j, o in enumerate(offsets):
                V[k, j] = mpmath.mpf(o) ** k
        rhs[order] = mpmath.factorial(order)
        w = mpmath.lu_solve(V, rhs)
        return [w[j] for j in range(n)], p


def fd_residual(u: Expr, eq: EquationInstance, t: float, x: float, hx: float = 1e-3, ht: float = 1e-4, dps: int = 50):
    """Residual at one node with sixth-order central differences of u evaluated at ``dps`` digits."""
    import mpmath

    with mpmath.workdps(dps):
        hx_, ht_ = mpmath.mpf(hx), mpmath.mpf(ht)

        def diff(order, step, along_x):
            w, p = central_weights(order)
            acc = mpmath.mpf(0)
            for j, wj in zip(range(-p, p + 1), w):
                if wj == 0:
                    continue
                pt = (t, x + j * step) if along_x else (t + j * step, x)
                acc += wj * evaluate_mp(u, t=pt[0], x=pt[1], dps=dps)
            return acc / step**order

        u0 = evaluate_mp(u, t=t, x=x, dps=dps)
        d1, d2, d3, d5 = (diff(k, hx_, True) for k in (1, 2, 3, 5))
        ut = diff(1, ht_, False)
    c = {k: float(v) for k, v in eq.values(np.float64(t)).items()}
    u0, d1, d2, d3, d5, ut = map(float, (u0, d1, d2, d3, d5, ut))
    return (
        ut + c["A"] * d5 + c["B"] * d3 + c["C"] * u0 * d3 + c["E"] * u0 * d1
        + c["F"] * d1 * d2 + c["Q"] * u0
    )


def symbolic_residual_at(u: Expr, eq: EquationInstance, t: float, x: float) -> float:
    terms = residual_terms(u, eq, np.array([t]), np.array([x]))
    return float(sum(terms.values())[0])


def sample_csv(sol: ClosedFormSolution, grid: Grid, path, mask=None) -> None:
    """Write ``t,x,u`` rows, row-major in t then x, 17 significant digits.

    ``mask(tt, xx)`` optionally selects nodes to keep; u is written as 0 elsewhere.
    """
    tt, xx = grid.mesh()
    uu = _on(sol.u, tt, xx)
    if mask is not None:
        uu = np.where(mask(tt, xx), uu, 0.0)
    with open(path, "w", newline="") if isinstance(path, (str, os.PathLike)) else contextlib.nullcontext(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "x", "u"])
        for a, b, c in zip(tt.ravel(), xx.ravel(), uu.ravel()):
            w.writerow([format(a, ".17g"), format(b, ".17g"), format(c, ".17g")])

