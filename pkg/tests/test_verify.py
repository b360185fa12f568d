import io
import math

import numpy as np
import pytest

from kdv5.equivalence import TargetConstants
from kdv5.model import EquationInstance
from kdv5.solutions import ClosedFormSolution, make_kink, make_soliton
from kdv5.symexpr import Const, parse
from kdv5.verify import Grid, central_weights, fd_residual, pde_residual, sample_csv, symbolic_residual_at

ZERO = ClosedFormSolution("exponential", {"c2": 0}, Const(0))


def test_zero_solution():
    eq = EquationInstance.from_exprs((0, 1), "exp(t)", "t", 1, 1, 1, "sin(t)")
    r = pde_residual(ZERO, eq)
    assert r.max_abs_residual == 0 and r.passed


def test_kink_passes():
    m, sol = make_kink(1, 1, 1)
    r = pde_residual(sol, m.instance())
    assert r.max_abs_residual < 1e-8 and r.passed
    assert set(r.term_magnitudes) == {"u_t", "A*u_5x", "B*u_3x", "C*u*u_3x", "E*u*u_x", "F*u_x*u_2x", "Q*u"}


def test_kink_wrong_equation():
    m, sol = make_kink(1, 1, 1)
    bad = TargetConstants.of((m.m1, m.m2 + 0.1, m.m3, m.m4, m.m5))
    r = pde_residual(sol, bad.instance())
    assert r.max_abs_residual > 1e-2 and not r.passed


def test_argmax_deterministic():
    m, sol = make_kink(1, 1, 1)
    bad = TargetConstants.of((m.m1, m.m2 + 0.1, m.m3, m.m4, m.m5)).instance()
    a = pde_residual(sol, bad).to_json()
    b = pde_residual(sol, bad).to_json()
    assert a == b


def test_threshold_validation():
    with pytest.raises(ValueError):
        pde_residual(ZERO, TargetConstants.of((1, 1, 1, 1, 1)).instance(), threshold=0)


def test_central_weights():
    w, p = central_weights(1)
    assert p == 3
    assert [float(v) for v in w] == pytest.approx([-1 / 60, 3 / 20, -3 / 4, 0, 3 / 4, -3 / 20, 1 / 60], abs=1e-15)


@pytest.mark.parametrize(
    "src",
    ["tanh(x - t)^2 + t*x", "sech(x - 2*t)^2*exp(t/3)", "cos(1/2*(x - t))^4 - sin(t)", "exp(-x^2/4)*(1 + t)"],
)
def test_finite_difference_cross_check(src):
    u = parse(src)
    eq = EquationInstance.from_exprs((0, 1), "1 + t", "-1/3", "2", "exp(t)", "-1", "t")
    for t, x in [(0.2, -0.7), (0.5, 0.1), (0.9, 1.3)]:
        assert abs(fd_residual(u, eq, t, x) - symbolic_residual_at(u, eq, t, x)) < 1e-4


class TestCsv:
    def test_single_node(self):
        _, sol = make_soliton(1, 2, 1)
        buf = io.StringIO()
        sample_csv(sol, Grid((0, 0), (0, 0), 1, 1), buf)
        assert buf.getvalue() == "t,x,u\n0,0,1\n"

    def test_zero_grid(self):
        buf = io.StringIO()
        sample_csv(ZERO, Grid((0, 1), (0, 1), 2, 2), buf)
        rows = buf.getvalue().splitlines()
        assert rows == ["t,x,u", "0,0,0", "0,1,0", "1,0,0", "1,1,0"]

    def test_kink_value(self, tmp_path):
        _, sol = make_kink(1, 1, 1)
        path = tmp_path / "k.csv"
        sample_csv(sol, Grid((0, 0), (1, 1), 1, 1), path)
        row = path.read_text().splitlines()[1].split(",")
        assert float(row[2]) == pytest.approx(math.tanh(1) ** 2, rel=1e-16)
        assert row[2].startswith("0.5800256")


def test_grid_validation():
    with pytest.raises(ValueError):
        Grid(nt=0)
    with pytest.raises(ValueError):
        Grid(t_range=(1, 0))
