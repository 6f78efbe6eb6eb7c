"""Tests for the exact polynomial engine."""

from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from lutzplug import polyx as px


def F(a, b=1):
    return Fraction(a, b)


class TestBasics:
    def test_as_fraction_float_is_exact(self):
        assert px.as_fraction(0.5) == F(1, 2)
        assert px.as_fraction(0.1) == Fraction(0.1)  # binary expansion, exact

    def test_as_fraction_rejects_nan(self):
        with pytest.raises(ValueError):
            px.as_fraction(float("nan"))

    def test_poly_trims(self):
        assert px.poly([1, 2, 0, 0]) == (F(1), F(2))
        assert px.poly([0, 0]) == (F(0),)

    def test_eval_horner(self):
        p = px.poly([1, -2, 3])  # 1 - 2x + 3x^2
        assert px.peval(p, F(1, 2)) == 1 - 1 + F(3, 4)

    def test_mul_and_deriv(self):
        p = px.poly([0, 1])      # x
        q = px.poly([-1, 0, 1])  # x^2 - 1
        prod = px.pmul(p, q)     # x^3 - x
        assert prod == px.poly([0, -1, 0, 1])
        assert px.pderiv(prod) == px.poly([-1, 0, 3])

    def test_compose(self):
        p = px.poly([0, 0, 1])          # x^2
        inner = px.poly([1, 2])         # 1 + 2x
        assert px.pcompose(p, inner) == px.poly([1, 4, 4])

    def test_integrate(self):
        p = px.poly([0, 0, 3])  # 3x^2
        assert px.integrate_over(p, 0, 2) == 8


class TestRoots:
    def test_count_roots_cubic(self):
        p = px.poly([0, -1, 0, 1])  # x(x-1)(x+1)
        assert px.count_roots(p, -2, 2) == 3
        assert px.count_roots(p, 0, 2) == 1      # (0, 2] excludes root at 0
        assert px.count_roots_closed(p, 0, 2) == 2

    def test_isolate_roots_separates(self):
        p = px.poly([0, -1, 0, 1])
        boxes = px.isolate_roots(p, -2, 2, F(1, 100))
        assert len(boxes) == 3
        roots = [F(-1), F(0), F(1)]
        for (lo, hi), r in zip(boxes, roots):
            assert lo <= r <= hi
            assert hi - lo <= F(1, 100)

    def test_isolate_exact_hits(self):
        p = px.poly([-1, 0, 1])  # roots at +-1
        boxes = px.isolate_roots(p, -1, 1, F(1, 10))
        assert (F(-1), F(-1)) in boxes
        assert (F(1), F(1)) in boxes

    def test_repeated_root_counts_once(self):
        p = px.poly([1, -2, 1])  # (x-1)^2
        assert px.count_roots(p, 0, 2) == 1

    def test_interval_eval_contains_range(self):
        p = px.poly([1, -3, 0, 2])
        lo, hi = px.interval_eval(p, F(-1), F(2))
        for k in range(-10, 21):
            assert lo <= px.peval(p, F(k, 10)) <= hi


class TestCertification:
    def test_certified_max_parabola(self):
        p = px.poly([0, 2, -1])  # 2x - x^2, max 1 at x=1
        u = px.certified_max(p, 0, 3, F(1, 10**6))
        assert 1 <= u <= 1 + F(1, 10**6)

    def test_certify_negative_true(self):
        p = px.poly([-2, 0, 1])  # x^2 - 2 < 0 on [-1, 1]
        ok, bound = px.certify_negative(p, -1, 1)
        assert ok and bound < 0
        assert bound >= -1  # true max is -1, bound sits just above it

    def test_certify_negative_witness(self):
        p = px.poly([-1, 0, 1])  # zero at +-1
        ok, witness = px.certify_negative(p, 0, 2)
        assert not ok
        assert px.peval(p, witness) >= -F(1, 10**6)

    def test_certify_negative_near_zero_max(self):
        p = px.poly([F(-1, 10**8), 0, -1])  # max -1e-8
        ok, bound = px.certify_negative(p, -1, 1)
        assert ok and bound < 0


class TestGcdFraction:
    def test_known(self):
        assert px.gcd_fraction(F(2, 3), F(1, 2)) == F(1, 6)
        assert px.gcd_fraction(F(1), F(0)) == 1
        assert px.gcd_fraction(F(4), F(6)) == 2

    @given(st.fractions(min_value=-10, max_value=10),
           st.fractions(min_value=-10, max_value=10))
    def test_divides(self, a, b):
        g = px.gcd_fraction(a, b)
        if g == 0:
            assert a == b == 0
        else:
            assert (a / g).denominator == 1
            assert (b / g).denominator == 1


@given(st.lists(st.integers(-9, 9), min_size=1, max_size=6),
       st.lists(st.integers(-9, 9), min_size=1, max_size=6),
       st.fractions(min_value=-3, max_value=3))
def test_mul_matches_eval(ca, cb, x):
    p, q = px.poly(ca), px.poly(cb)
    assert px.peval(px.pmul(p, q), x) == px.peval(p, x) * px.peval(q, x)


@given(st.lists(st.integers(-9, 9), min_size=1, max_size=6),
       st.lists(st.integers(-9, 9), min_size=1, max_size=4),
       st.fractions(min_value=-2, max_value=2))
def test_compose_matches_eval(ca, ci, x):
    p, inner = px.poly(ca), px.poly(ci)
    assert px.peval(px.pcompose(p, inner), x) == px.peval(p, px.peval(inner, x))
