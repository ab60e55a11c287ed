import random
from fractions import Fraction

import mpmath
from hypothesis import given, settings
from hypothesis import strategies as st

from shrinklat.polynomials import (Poly, invert_series, random_poly,
                                   taylor_shift)
from shrinklat.scalars import Rat

coeff = st.fractions(min_value=-4, max_value=4, max_denominator=5)


@settings(max_examples=50)
@given(st.lists(coeff, min_size=1, max_size=6),
       st.fractions(min_value=-3, max_value=3, max_denominator=4))
def test_univariate_eval_matches_horner(coeffs, x):
    p = Poly.univariate(coeffs)
    x_r = Rat(x.numerator, x.denominator)
    acc = Fraction(0)
    for c in reversed(coeffs):
        acc = acc * x + c
    assert p.eval((x_r,)) == Rat(acc.numerator, acc.denominator)


def test_eval_with_mpf_point_returns_mpf():
    p = Poly.univariate([Rat(1, 3), Rat(2)])
    v = p.eval((mpmath.mpf("0.5"),))
    assert isinstance(v, mpmath.mpf)
    assert abs(v - (mpmath.mpf(1) / 3 + 1)) < mpmath.mpf("1e-12")
    assert isinstance(Poly(1).eval((mpmath.mpf(2),)), mpmath.mpf)


def test_diff_product_rule():
    rng = random.Random(3)
    for _ in range(10):
        p = random_poly(2, 3, rng)
        q = random_poly(2, 3, rng)
        for i in range(2):
            lhs = (p * q).diff(i)
            rhs = p.diff(i) * q + p * q.diff(i)
            assert lhs == rhs


@settings(max_examples=30)
@given(st.lists(coeff, min_size=1, max_size=5),
       st.fractions(min_value=-2, max_value=2, max_denominator=3),
       st.fractions(min_value=-2, max_value=2, max_denominator=3))
def test_taylor_shift_evaluates_correctly(coeffs, s, u):
    p = Poly.univariate(coeffs)
    s_r, u_r = Rat(s.numerator, s.denominator), Rat(u.numerator, u.denominator)
    assert taylor_shift(p, s_r).eval((u_r,)) == p.eval((s_r + u_r,))


def test_compose_truncates_total_degree():
    x = Poly.variable(1, 0)
    p = x * x * x
    inner = Poly.univariate([0, 1, 1])  # u + u^2
    full = p.compose([inner])
    cut = p.compose([inner], 4)
    assert full.total_degree() == 6
    assert cut.total_degree() <= 4
    assert cut == full.truncate(4)


def test_invert_series_roundtrip():
    rng = random.Random(5)
    d, order = 2, 4
    for _ in range(10):
        # identity linear part plus random higher-order junk
        maps = []
        for i in range(d):
            junk = random_poly(d, 3, rng)
            junk = junk - Poly.constant(d, junk.coeffs.get((0,) * d, Rat(0)))
            for j in range(d):
                mono = tuple(1 if k == j else 0 for k in range(d))
                junk = junk - Poly(d, {mono: junk.coeffs.get(mono, Rat(0))})
            maps.append(Poly.variable(d, i) + junk)
        u = invert_series(maps, order)
        for i, m in enumerate(maps):
            resid = m.compose(u, order) - Poly.variable(d, i)
            assert resid.truncate(order).is_zero()


def test_univariate_coeff():
    p = Poly.univariate([Rat(5), 0, Rat(-2)])
    assert p.univariate_coeff(0) == 5
    assert p.univariate_coeff(1) == 0
    assert p.univariate_coeff(2) == -2
    assert p.univariate_coeff(9) == 0
