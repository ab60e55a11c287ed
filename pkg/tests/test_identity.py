import random

import pytest

from shrinklat.curves import Jet, builtin_curves, jet_at
from shrinklat.errors import (DegenerateInput, OutOfDomain,
                              PrecisionExhausted, SingularJet)
from shrinklat.identity import (correction_polynomial, decay_fit,
                                identity_residual, limit_element,
                                solve_correction)
from shrinklat.linalg import Mat, det, identity, lower_shift
from shrinklat.scalars import Rat, auto_precision


def _random_jet(rng, n):
    from shrinklat.suites import _random_invertible
    return Jet(s=Rat(0), n=n, rows=_random_invertible(rng, n + 1),
               top_next=None, phi_matrix=None, backend="rational")


def test_correction_row_relations():
    # defining property: (row 0) B = 0 and (row k) B = row k-1
    rng = random.Random(2)
    for _ in range(20):
        n = rng.choice([1, 2, 3])
        j = _random_jet(rng, n)
        B = solve_correction(j).B
        rows = j.rows.rows
        zero = Mat([(Rat(0),) * (n + 1)])
        assert Mat([rows[0]]) * B == zero
        for k in range(1, n + 1):
            assert Mat([rows[k]]) * B == Mat([rows[k - 1]])


def test_correction_rejects_singular_jet():
    j = jet_at(builtin_curves()["affine"], Rat(1))
    with pytest.raises(SingularJet):
        solve_correction(j)


def test_correction_polynomial_is_inverse():
    rng = random.Random(9)
    for _ in range(10):
        n = rng.choice([2, 3])
        corr = solve_correction(_random_jet(rng, n))
        t = Rat(rng.randint(-30, 30), rng.randint(1, 9))
        P = correction_polynomial(corr, t)
        assert (identity(n + 1) - corr.B.scale(t)) * P == identity(n + 1)
        assert det(P) == 1


def test_moment_exact_identity_values():
    c = builtin_curves()["moment"]
    j = jet_at(c, Rat(0))
    corr = solve_correction(j)
    assert corr.B == lower_shift(3)
    xi = limit_element(j, corr)
    assert xi.xi_plus == Mat([(0, 0, 1), (-1, 0, 0), (0, -1, 0)]).to_rational()
    assert xi.xi_minus == Mat([(0, 0, 1), (1, 0, 0), (0, 1, 0)]).to_rational()
    for t in (Rat(10), Rat(100), Rat(-10)):
        rep = identity_residual(c, Rat(0), corr, xi, t)
        expected = Mat([(Rat(0), Rat(0), Rat(0)),
                        (Rat(0), 1 / abs(t), Rat(0)),
                        (Rat(0), Rat(0), 1 / abs(t))])
        assert rep.E == expected
        assert rep.sup_norm == 1 / abs(t)


def test_limit_element_needs_full_jet():
    rng = random.Random(4)
    j = _random_jet(rng, 2)
    corr = solve_correction(j)
    with pytest.raises(DegenerateInput):
        limit_element(j, corr)


def test_residual_rejects_zero_t():
    c = builtin_curves()["moment"]
    j = jet_at(c, Rat(0))
    corr = solve_correction(j)
    xi = limit_element(j, corr)
    with pytest.raises(OutOfDomain):
        identity_residual(c, Rat(0), corr, xi, 0)


def test_float_pipeline_decay():
    c = builtin_curves()["sin-exp"]
    prec = auto_precision(2, 1e5)
    j = jet_at(c, Rat(0), prec=prec)
    corr = solve_correction(j)
    xi = limit_element(j, corr)
    pairs = []
    for t in (100, 1000, 10000, 100000):
        rep = identity_residual(c, Rat(0), corr, xi, t, prec=prec)
        pairs.append((t, rep.sup_norm))
    fit = decay_fit(pairs)
    assert fit.kind == "fit"
    assert -1.15 <= fit.slope <= -0.85


def test_precision_exhaustion_detected():
    # 53 bits cannot survive t^3-sized cancellations at t = 10^5
    c = builtin_curves()["sin-exp"]
    j = jet_at(c, Rat(0), prec=53)
    corr = solve_correction(j)
    xi = limit_element(j, corr)
    with pytest.raises(PrecisionExhausted):
        identity_residual(c, Rat(0), corr, xi, 10 ** 5, prec=53)


def test_decay_fit_recovers_synthetic_slope():
    pairs = [(10 ** k, 5.0 * 10 ** (-2 * k)) for k in range(1, 6)]
    fit = decay_fit(pairs)
    assert abs(fit.slope - (-2.0)) < 1e-9
    assert all(abs(s - (-2.0)) < 1e-9 for s in fit.interval_slopes)


def test_decay_fit_exact_zero_and_errors():
    assert decay_fit([(10, 0), (100, 0), (1000, 0), (10000, 0)]).kind == "exact-zero"
    with pytest.raises(DegenerateInput):
        decay_fit([(10, 1), (100, 1)])
    with pytest.raises(DegenerateInput):
        decay_fit([(10, 1), (5, 1), (100, 1), (1000, 1)])
    with pytest.raises(DegenerateInput):
        decay_fit([(10, 1), (100, 0), (1000, 1), (10000, 1)])
