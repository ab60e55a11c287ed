import math
from math import comb

import mpmath
import pytest

from shrinklat.curves import (CurveSpec, builtin_curves, builtin_graphs,
                              graph_form_at, graph_form_from_F, jet_at,
                              nondegenerate, parse_curve, unipotent)
from shrinklat.errors import (DimensionMismatch, NumericJetUnstable,
                              OutOfDomain, RankDeficient)
from shrinklat.linalg import det
from shrinklat.polynomials import Poly
from shrinklat.scalars import Rat


def test_unipotent_shape():
    u = unipotent((Rat(3), Rat(5)))
    assert u.rows[0] == (Rat(1), Rat(3), Rat(5))
    assert det(u) == 1


def test_moment_jet_closed_form():
    # phi(s) = (1, s, s^2): coefficient rows are binomial coefficients
    c = builtin_curves()["moment"]
    s = Rat(2, 3)
    j = jet_at(c, s)
    for k in range(3):
        expected = tuple(
            comb(m, k) * s ** (m - k) if m >= k else Rat(0)
            for m in range(3))
        assert j.rows.rows[k] == expected
    assert j.top_next == (Rat(0), Rat(0), Rat(0))


def test_jet_rejects_excess_order_and_domain():
    c = builtin_curves()["moment"]
    with pytest.raises(DimensionMismatch):
        jet_at(c, Rat(0), order=5)
    bounded = CurveSpec(name="bounded", d=1, n=2, phi=c.phi,
                        domain=((0.0, 1.0),), top_polys=c.top_polys)
    with pytest.raises(OutOfDomain):
        jet_at(bounded, Rat(2))


def test_analytic_jet_matches_series():
    c = builtin_curves()["sin-exp"]
    j = jet_at(c, Rat(0), prec=120)
    with mpmath.workprec(120):
        # psi = (sin s + 2s, e^s - 1): coefficients at 0 are (3, 1), then
        # (0, 1/2), then (-1/6, 1/6)
        expect = [(1, 0, 0), (0, 3, 1),
                  (0, 0, mpmath.mpf(1) / 2),
                  (0, -mpmath.mpf(1) / 6, mpmath.mpf(1) / 6)]
        rows = list(j.rows.rows) + [j.top_next]
        for got, want in zip(rows, expect):
            for a, b in zip(got, want):
                assert abs(a - b) < mpmath.mpf(2) ** -100


def test_numeric_jet_agrees_with_analytic():
    analytic = builtin_curves()["sin-exp"]
    numeric = CurveSpec(name="sin-exp-numeric", d=1, n=2, phi=analytic.phi)
    ja = jet_at(analytic, Rat(1, 4), prec=200)
    jn = jet_at(numeric, Rat(1, 4), prec=200)
    for ra, rn in zip(list(ja.rows.rows) + [ja.top_next],
                      list(jn.rows.rows) + [jn.top_next]):
        for a, b in zip(ra, rn):
            assert abs(a - b) < mpmath.mpf("1e-7")


def test_central_diff_second_order_convergence():
    from shrinklat.curves import _central_diff
    with mpmath.workprec(200):
        f = lambda x: (mpmath.exp(x),)
        s = mpmath.mpf(1) / 3
        exact = mpmath.exp(s)
        errs = []
        for h in (mpmath.mpf(1) / 64, mpmath.mpf(1) / 128):
            errs.append(abs(_central_diff(f, s, 2, h)[0] - exact))
        slope = mpmath.log(errs[0] / errs[1]) / mpmath.log(2)
        assert slope >= 1.9


def test_numeric_jet_instability_detected():
    # |s| is not differentiable at 0; the two stencils must disagree
    def phi(s):
        return unipotent((abs(s[0]), s[0] ** 2))

    rough = CurveSpec(name="abs", d=1, n=2, phi=phi)
    with pytest.raises(NumericJetUnstable):
        jet_at(rough, 0.0, prec=100)


def test_nondegenerate_flags_affine():
    curves = builtin_curves()
    ok, cert = nondegenerate(jet_at(curves["moment"], Rat(0)))
    assert ok and cert["det"] != 0
    # (s, 2s) lies in a line: the jet matrix is singular
    ok, cert = nondegenerate(jet_at(curves["affine"], Rat(1)))
    assert not ok and cert["det"] == 0


def test_graph_form_of_moment_curve():
    gf = graph_form_at(builtin_curves()["moment"], (Rat(0),))
    assert gf.series_exact
    for eta in (Rat(1, 7), Rat(-2, 5), Rat(3)):
        assert gf.roundtrip_residual((eta,)) == 0
        # the graph point must be the curve point at the inverted parameter
        u = gf.psi_series[0].eval((eta,))
        curve_pt = (Rat(1), u, u * u)
        assert gf.point_at((eta,)) == curve_pt


def test_graph_form_plane_is_flat():
    gf = graph_form_at(builtin_curves()["plane-2d"], (Rat(0), Rat(0)))
    assert all(p.is_zero() for p in gf.F_polys)
    assert gf.series_exact


def test_graph_form_from_F_validations():
    bad_const = [Poly.constant(2, Rat(1))]
    with pytest.raises(RankDeficient):
        graph_form_from_F(2, 2, bad_const)
    bad_lin = [Poly.variable(2, 0)]
    with pytest.raises(RankDeficient):
        graph_form_from_F(2, 2, bad_lin)
    with pytest.raises(DimensionMismatch):
        graph_form_from_F(2, 2, [])


def test_builtin_graphs_are_graph_position():
    for name, g in builtin_graphs().items():
        assert g.base_value == tuple(Rat(1) if i == 0 else Rat(0)
                                     for i in range(g.n + 1))
        assert g.F_at((Rat(0),) * g.d) == (Rat(0),) * (g.n + 1 - g.d)


def test_parse_curve_grammar():
    text = """
    # the moment curve, spelled out
    n = 2
    name = my-moment
    component: 0, 1
    component: 0, 0, 1
    """
    c = parse_curve(text)
    assert c.name == "my-moment"
    assert c.n == 2
    ref = builtin_curves()["moment"]
    s = Rat(5, 7)
    assert c.phi((s,)) == ref.phi((s,))
    assert jet_at(c, s).rows == jet_at(ref, s).rows


def test_parse_curve_errors():
    with pytest.raises(OutOfDomain):
        parse_curve("n = 2\ncomponent: 0, 1\n")  # one component missing
    with pytest.raises(OutOfDomain):
        parse_curve("wat\n")
