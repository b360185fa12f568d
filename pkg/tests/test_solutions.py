from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from kdv5.equivalence import TargetConstants, build_transformation, recognize, transformed_instance, undamped_instance
from kdv5.model import PointTransformation
from kdv5.solutions import (
    DegenerateFamilyError,
    compacton_constants,
    kink_constants,
    make,
    make_compacton,
    make_exponential,
    make_kink,
    make_soliton,
    map_solution,
    soliton_constants,
    traveling_wave_residual,
)
from kdv5.symexpr import Const, X, evaluate, nth_derivative, parse, substitute, tanh

F = Fraction
SIGMA = np.linspace(-10, 10, 201)


def profile(sol):
    """U(sigma) as an expression in x: the solution at t = 0."""
    return substitute(sol.u, {"t": Const(0)})


class TestResidualOracle:
    def test_zero_profile(self):
        assert traveling_wave_residual(Const(0), 1, (1, 1, 1, 1, 1)) == 0

    def test_kink(self):
        m = (F(-1, 24), F(-7, 12), F(3, 4), 1, 1)
        assert traveling_wave_residual(tanh(X) ** 2, 1, m, SIGMA) < 1e-9

    def test_perturbed(self):
        m = (F(-1, 24) + F(1, 10), F(-7, 12), F(3, 4), 1, 1)
        assert traveling_wave_residual(tanh(X) ** 2, 1, m, SIGMA) > 1e-2


class TestExponential:
    def test_example(self):
        sol = make_exponential((1, 1, 1, -2, 1), 1)
        assert sol.wave_speed == 2
        assert sol.u == parse("exp(x - 2*t)")

    def test_zero_amplitude(self):
        sol = make_exponential((1, 1, 1, -2, 1), 0)
        assert sol.u == Const(0)

    @pytest.mark.parametrize("m", [(1, 1, 1, 2, 1), (1, 1, 1, -2, -1)])
    def test_preconditions(self, m):
        with pytest.raises(DegenerateFamilyError):
            make_exponential(m)


class TestKink:
    def test_constants(self):
        m, sol = make_kink(1, 1, 1)
        assert m.as_tuple() == (F(-1, 24), F(-7, 12), F(3, 4), 1, 1)
        assert traveling_wave_residual(profile(sol), 1, m, SIGMA) < 1e-9

    def test_degenerate(self):
        with pytest.raises(DegenerateFamilyError, match="m1"):
            make_kink(1, 1, F(-1, 2))

    def test_linearity(self):
        a = kink_constants(F(1, 3), 2, -1)
        b = kink_constants(F(2, 3), 4, -2)
        assert all(y == 2 * x for x, y in zip(a.as_tuple()[:3], b.as_tuple()[:3]))


class TestSoliton:
    def test_constants(self):
        m, sol = make_soliton(1, 2, 1)
        assert m.as_tuple() == (F(1, 72), F(7, 36), F(-1, 12), 2, 1)
        assert traveling_wave_residual(profile(sol), 1, m, SIGMA) < 1e-9

    def test_degenerate(self):
        with pytest.raises(DegenerateFamilyError):
            make_soliton(1, 1, 1)

    def test_profile(self):
        _, sol = make_soliton(1, 2, 1)
        assert sol(0.0, 0.0) == 1.0
        assert sol(0.0, 30.0) < 1e-20


class TestCompacton:
    def test_constants(self):
        m, sol = make_compacton(1, 1)
        assert m.as_tuple() == (F(-1, 64), F(-5, 16), -2, -16, 1)
        assert traveling_wave_residual(profile(sol), 1, m, SIGMA) < 1e-9

    def test_a2(self):
        m = compacton_constants(2, 1)
        assert m.m1 == F(-1, 1024) and m.m2 == F(-5, 64)

    @pytest.mark.parametrize("a, m5", [(0, 1), (1, 0)])
    def test_degenerate(self, a, m5):
        with pytest.raises(DegenerateFamilyError):
            make_compacton(a, m5)

    def test_range(self):
        _, sol = make_compacton(F(3, 2), 1)
        vals = sol(np.zeros(1001), np.linspace(-50, 50, 1001))
        assert vals.min() >= 0 and vals.max() <= 1


def test_make_dispatch():
    m, sol = make("kink", a=1, m4=1, m5=1)
    assert sol.family == "kink"
    with pytest.raises(ValueError):
        make("breather", a=1)
    with pytest.raises(TypeError):
        make("compacton", a=1, m5=1, m4=2)


@pytest.mark.parametrize("family, args", [("kink", (1, 1, 1)), ("soliton", (1, 2, 1))])
def test_derivatives_decay(family, args):
    _, sol = make(family, **dict(zip(("a", "m4", "m5"), args)))
    u = profile(sol)
    for k in range(1, 6):
        d = nth_derivative(u, "x", k)
        assert abs(evaluate(d, x=20.0)) < 1e-10 and abs(evaluate(d, x=-20.0)) < 1e-10


small = st.fractions(F(-3), F(3), max_denominator=8)


@given(small, small, small)
def test_kink_family_property(a, m4, m5):
    try:
        m, sol = make_kink(a, m4, m5)
    except (DegenerateFamilyError, ValueError):
        return
    assert traveling_wave_residual(profile(sol), float(a), m, SIGMA) < 1e-9


@given(small, small, small)
def test_soliton_family_property(a, m4, m5):
    try:
        m, sol = make_soliton(a, m4, m5)
    except (DegenerateFamilyError, ValueError):
        return
    assert traveling_wave_residual(profile(sol), float(a), m, SIGMA) < 1e-9


@given(st.fractions(F(1, 4), F(2), max_denominator=8), st.fractions(F(-2), F(2), max_denominator=8))
def test_compacton_family_property(a, m5):
    try:
        m, sol = make_compacton(a, m5)
    except DegenerateFamilyError:
        return
    assert traveling_wave_residual(profile(sol), 1, m, SIGMA) < 1e-9


class TestMap:
    def test_identity(self):
        _, sol = make_kink(1, 1, 1)
        out = map_solution(sol, PointTransformation.identity())
        t, x = np.linspace(0, 1, 5), np.linspace(-2, 2, 5)
        assert np.allclose(out(t, x), sol(t, x), rtol=0, atol=1e-15)

    def test_exponential_constant_G(self):
        # G = 1 and H = c2 m3/m5: time map is the identity and the u-scale a constant
        m = TargetConstants.of((1, 1, 1, -2, 1))
        c2 = 3
        eq = undamped_instance(Const(1), 1, c2, m, (0, 1))
        T = build_transformation(recognize(eq), m)
        sol = make_exponential(m, 1)
        out = map_solution(sol, T)
        t, x = np.linspace(0, 1, 7), np.linspace(-1, 1, 7)
        want = np.exp(x - 2 * t) * float(m.m3 * 1 / (m.m2 * c2 * m.m3 / m.m5))
        assert np.allclose(out(t, x), want, rtol=1e-14)

    def test_kink_bounded(self):
        m, sol = make_kink(1, 1, 1)
        eq = transformed_instance(parse("1 + t^2"), parse("exp(t/2)"), 2, m, (0, 1))
        out = map_solution(sol, build_transformation(recognize(eq), m))
        vals = out(np.linspace(0, 1, 101), np.zeros(101))
        assert np.all(np.isfinite(vals))

    def test_chain_matches_direct(self):
        m, sol = make_soliton(1, 2, 1)
        eq = transformed_instance(parse("2 + sin(t)"), parse("1 + t"), 3, m, (0, 1))
        out = map_solution(sol, build_transformation(recognize(eq), m, k2=0.7))
        tt, xx = np.meshgrid(np.linspace(0, 1, 11), np.linspace(-5, 5, 11))
        assert np.max(np.abs(out(tt, xx) - out.evaluate_chain(tt, xx))) < 1e-10

    def test_pushforward_direction(self):
        from kdv5.timefunc import TimeMap

        _, sol = make_kink(1, 1, 1)
        T = PointTransformation(TimeMap("2*t + 1", (0, 1)), 0.3, 0.5, parse("exp(t)"))
        out = map_solution(sol, T, "pushforward")
        tt, xx = np.meshgrid(np.linspace(1, 3, 5), np.linspace(-2, 2, 5))
        assert np.max(np.abs(out(tt, xx) - out.evaluate_chain(tt, xx))) < 1e-12
        back = map_solution(out, T, "pullback")
        t0, x0 = np.linspace(0, 1, 5), np.linspace(-1, 1, 5)
        assert np.allclose(back(t0, x0), sol(t0, x0), rtol=1e-13)
