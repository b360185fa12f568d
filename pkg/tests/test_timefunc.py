import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from kdv5.symexpr import parse
from kdv5.timefunc import ExprFunction, Jet, MonotonicityError, OutOfDomainError, TimeMap, compose


def test_jet_arithmetic_matches_symbolic():
    f, g = ExprFunction("exp(t)"), ExprFunction("1 + t^2")
    t0 = 0.3
    prod = f.jet(t0, 4) * g.jet(t0, 4)
    quot = f.jet(t0, 4) / g.jet(t0, 4)
    want_p = ExprFunction(parse("exp(t)*(1 + t^2)")).jet(t0, 4)
    want_q = ExprFunction(parse("exp(t)/(1 + t^2)")).jet(t0, 4)
    assert np.allclose(prod.c, want_p.c, rtol=1e-13)
    assert np.allclose(quot.c, want_q.c, rtol=1e-13)


def test_compose_matches_chain_rule():
    outer, inner = ExprFunction("sin(t)"), ExprFunction("t^2 + t")
    t0 = 0.7
    ji = inner.jet(t0, 5)
    got = outer.jet(ji.value, 5).compose(ji)
    want = ExprFunction("sin(t^2 + t)").jet(t0, 5)
    assert np.allclose(got.c, want.c, rtol=1e-12, atol=1e-14)


@given(st.floats(-1, 1), st.floats(0.5, 3))
def test_revert_inverts(t0, slope):
    f = ExprFunction(parse(f"{slope}*t + t^3/3 + sin(t)/10"))
    j = f.jet(t0, 5)
    back = j.revert(t0)
    # composing f with its inverse jet gives the identity jet
    ident = j.compose(back)
    assert ident.c[0] == pytest.approx(j.value)
    assert ident.c[1] == pytest.approx(1.0, rel=1e-12)
    assert all(abs(c) < 1e-9 for c in ident.c[2:])


def test_jet_order_zero_revert():
    assert Jet([2.0]).revert(1.5).c == [1.5]


class TestTimeMap:
    def test_inverse_round_trip(self):
        lam = TimeMap("t + t^3/3 + sin(t)/4", (0, 2))
        ts = np.linspace(0, 2, 41)
        back = lam.inverse(lam(ts))
        assert np.max(np.abs(back - ts)) < 1e-10

    def test_decreasing(self):
        lam = TimeMap("-2*t - t^3", (0, 1))
        assert not lam.increasing
        assert lam.image == (-3.0, 0.0)
        assert lam.inverse(-3.0) == pytest.approx(1.0)
        roots = np.roots([1, 0, 2, -1.5])
        want = float(roots[np.abs(roots.imag) < 1e-12].real[0])
        assert lam.inverse(-1.5) == pytest.approx(want, rel=1e-10)

    def test_not_monotone(self):
        with pytest.raises(MonotonicityError):
            TimeMap("sin(4*t)", (0, 2))

    def test_out_of_image(self):
        with pytest.raises(OutOfDomainError):
            TimeMap("2*t", (0, 1)).inverse(3.0)

    def test_affine_inverse_detected(self):
        lam = TimeMap("3*t - 1", (0, 1))
        assert lam.inverse_expr is not None
        inv = lam.inverse_map()
        assert inv(2.0) == pytest.approx(1.0)

    def test_inverse_map_derivatives(self):
        lam = TimeMap("exp(t) + t", (0, 1))
        inv = lam.inverse_map()
        y = float(lam(0.4))
        d = inv.derivative(y, 2)
        # (f^-1)'' = -f''/f'^3
        fp, fpp = math.exp(0.4) + 1, math.exp(0.4)
        assert d == pytest.approx(-fpp / fp**3, rel=1e-9)
        assert inv.inverse_map() is lam


def test_compose_symbolic_when_possible():
    h = compose(ExprFunction("exp(t)"), ExprFunction("2*t"))
    assert h.expr == parse("exp(2*t)")
