"""Fibering shrinking balls into shrinking nondegenerate curves: the twisting
curve, rotated copies, the jet matrix M(g) with its degeneracy locus, the
conjugated correction B(g), and the polar change of variables.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .curves import GraphForm, Jet
from .errors import (BadDimensions, DimensionMismatch, JetDepthInsufficient,
                     OnDegeneracyLocus)
from .identity import NilpotentCorrection, limit_element, solve_correction
from .linalg import Mat, det
from .polynomials import Poly
from .scalars import Rat, rat


def gamma_coords(r, n: int, d: int) -> tuple:
    """The twisting curve in tangent coordinates: (r, r^(n-d+2), ..., r^n)."""
    if d < 2 or d > n:
        raise BadDimensions(f"need 2 <= d <= n, got d={d}, n={n}")
    return (r,) + tuple(r ** (n - d + i) for i in range(2, d + 1))


def gamma_polys(n: int, d: int):
    if d < 2 or d > n:
        raise BadDimensions(f"need 2 <= d <= n, got d={d}, n={n}")
    out = [Poly.univariate([0, 1])]
    for i in range(2, d + 1):
        out.append(Poly(1, {(n - d + i,): Rat(1)}))
    return out


def rotate(g: Mat, coords: Sequence) -> tuple:
    """Apply the rotation to a tangent coordinate vector (matrix times column)."""
    return tuple(sum(g.rows[i][j] * coords[j] for j in range(len(coords)))
                 for i in range(g.dim))


@dataclass(frozen=True)
class TwistedCurve:
    """zeta(r) = phi(s) + g gamma(r) + F(g gamma(r)); coeff_rows[k] is the
    k-th Taylor coefficient of zeta at 0 (ambient coordinates)."""

    graph: GraphForm
    g: Mat
    coeff_rows: tuple

    @property
    def n(self) -> int:
        return self.graph.n

    @property
    def d(self) -> int:
        return self.graph.d


def make_twisted(graph: GraphForm, g: Mat) -> TwistedCurve:
    n, d = graph.n, graph.d
    if g.dim != d:
        raise DimensionMismatch("rotation dimension mismatch")
    if graph.order < n + 1:
        raise JetDepthInsufficient(
            f"graph form carries jets to order {graph.order}, need {n + 1}")
    gam = gamma_polys(n, d)
    coord_polys = [sum((gam[j].scale(g.rows[i][j]) for j in range(d)),
                       Poly(1)) for i in range(d)]
    coeff_rows = _curve_coeff_rows(graph, coord_polys)
    return TwistedCurve(graph=graph, g=g, coeff_rows=coeff_rows)


def _curve_coeff_rows(graph: GraphForm, coord_polys) -> tuple:
    """Taylor coefficients (orders 0..n+1) of phi(s) + c(r) + F(c(r)) for a
    polynomial tangent path c(r) with c(0) = 0."""
    n = graph.n
    order = n + 1
    width = n + 1
    amb = [Poly(1) for _ in range(width)]
    for a in range(width):
        amb[a] = amb[a] + Poly.constant(1, graph.base_value[a])
    for i, cp in enumerate(coord_polys):
        row = graph.tangent_frame[i]
        for a in range(width):
            if row[a] != 0:
                amb[a] = amb[a] + cp.scale(row[a])
    for m, fp in enumerate(graph.F_polys):
        comp = fp.compose(coord_polys, order)
        row = graph.comp_frame[m]
        for a in range(width):
            if row[a] != 0:
                amb[a] = amb[a] + comp.scale(row[a])
    return tuple(tuple(amb[a].univariate_coeff(k) for a in range(width))
                 for k in range(order + 1))


def radial_curve(graph: GraphForm, w_coords: Sequence) -> TwistedCurve:
    """rho_w(r) = phi(s) + r w + F(r w): the straight-line section."""
    lin = [Poly.univariate([0, rat(c)]) for c in w_coords]
    coeff_rows = _curve_coeff_rows(graph, lin)
    return TwistedCurve(graph=graph, g=Mat([[Rat(1)]]), coeff_rows=coeff_rows)


def jet_matrix(tc: TwistedCurve) -> Mat:
    """M(g): row k is the k-th Taylor coefficient of the twisted curve."""
    return Mat(tc.coeff_rows[:tc.n + 1])


def twisted_jet(tc: TwistedCurve, *, validate: bool = True) -> Jet:
    """Jet of the twisted curve at r = 0, with the structural relations of the
    twisting construction checked exactly when requested."""
    if validate:
        check_twist_relations(tc)
    return Jet(s=Rat(0), n=tc.n, rows=jet_matrix(tc),
               top_next=tc.coeff_rows[tc.n + 1],
               phi_matrix=tc.graph.phi_matrix, backend="rational")


def check_twist_relations(tc: TwistedCurve):
    """The two derivative relations of the twisting trick, checked exactly:
    low orders agree with the straight section along g e_1, and order n-d+i
    reduces to g e_i modulo the complement plus the g e_1 line."""
    n, d = tc.n, tc.d
    g = tc.g
    ge = [rotate(g, tuple(Rat(1) if j == i else Rat(0) for j in range(d)))
          for i in range(d)]
    rho = radial_curve(tc.graph, ge[0])
    for k in range(0, n - d + 2):
        if tc.coeff_rows[k] != rho.coeff_rows[k]:
            raise OnDegeneracyLocus(
                f"order-{k} coefficient does not match the radial section")
    ge1_amb = tc.graph.embed_tangent(ge[0])
    sub = [tuple(r) for r in tc.graph.comp_frame] + [ge1_amb]
    for i in range(2, d + 1):
        k = n - d + i
        target = tc.graph.embed_tangent(ge[i - 1])
        resid = tuple(a - b for a, b in zip(tc.coeff_rows[k], target))
        if not _in_span(resid, sub):
            raise OnDegeneracyLocus(
                f"order-{k} coefficient is not g e_{i} modulo the subspace")


def _in_span(vec, rows) -> bool:
    base = Mat(rows)
    extended = Mat(tuple(rows) + (tuple(vec),))
    return _rank(extended) == _rank(base)


def _rank(m: Mat) -> int:
    a = [[rat(x) for x in r] for r in m.rows]
    nr, nc = len(a), len(a[0])
    rank = 0
    for col in range(nc):
        piv = None
        for r in range(rank, nr):
            if a[r][col] != 0:
                piv = r
                break
        if piv is None:
            continue
        a[rank], a[piv] = a[piv], a[rank]
        p = a[rank][col]
        a[rank] = [x / p for x in a[rank]]
        for r in range(nr):
            if r != rank and a[r][col] != 0:
                f = a[r][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[rank])]
        rank += 1
    return rank


def on_degeneracy_locus(tc: TwistedCurve, *, tol=None) -> bool:
    d = det(jet_matrix(tc))
    if tol is None:
        return d == 0
    return abs(d) <= tol


def twisted_limit(tc: TwistedCurve):
    """(B(g), xi_s(g)) for a twisted curve off the degeneracy locus, plus the
    commuting span generated by the powers of B(g)."""
    if on_degeneracy_locus(tc):
        raise OnDegeneracyLocus("det M(g) = 0")
    j = twisted_jet(tc)
    corr = solve_correction(j)
    xi = limit_element(j, corr)
    return corr, xi


def correction_span(corr: NilpotentCorrection) -> tuple:
    """Basis {B^k : 0 <= k <= n} of the conjugated abelian algebra."""
    dim = corr.B.dim
    out = []
    power = None
    for k in range(corr.n + 1):
        if k == 0:
            from .linalg import identity
            power = identity(dim)
        else:
            power = power * corr.B
        out.append(power)
    return tuple(out)


def haar_rotation(d: int, rng: np.random.Generator) -> Mat:
    """Haar-uniform SO(d) via QR of a Gaussian frame (entries become exact
    dyadic rationals downstream)."""
    z = rng.standard_normal((d, d))
    q, r = np.linalg.qr(z)
    q = q @ np.diag(np.sign(np.diag(r)))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return Mat(tuple(tuple(rat(float(x)) for x in row) for row in q))


def rational_rotation_2d(tau) -> Mat:
    """Pythagorean parametrization of SO(2): exactly orthogonal, rational."""
    tau = rat(tau)
    den = 1 + tau * tau
    c = (1 - tau * tau) / den
    s = 2 * tau / den
    return Mat([[c, s], [-s, c]])


def random_rational_rotation(d: int, rng) -> Mat:
    """Rational rotation from a product of coordinate-plane Pythagorean turns."""
    from .linalg import identity
    g = identity(d)
    for i in range(d):
        for j in range(i + 1, d):
            tau = Rat(rng.randint(-999, 999), 1000)
            r2 = rational_rotation_2d(tau)
            rows = [[Rat(1) if a == b else Rat(0) for b in range(d)]
                    for a in range(d)]
            rows[i][i], rows[i][j] = r2.rows[0][0], r2.rows[0][1]
            rows[j][i], rows[j][j] = r2.rows[1][0], r2.rows[1][1]
            g = g * Mat(rows)
    return g


@dataclass(frozen=True)
class LocusProbeReport:
    samples: int
    seed: int
    degenerate_fraction: float
    records: tuple  # (sample_index, det_Mg, in_Zs)


def degeneracy_locus_probe(graph: GraphForm, samples: int, seed: int, *,
                           rational: bool = False, tol=None) -> LocusProbeReport:
    """Sample rotations and report how often det M(g) vanishes."""
    if samples < 1:
        raise BadDimensions("need at least one sample")
    rng = np.random.default_rng(seed)
    records = []
    hits = 0
    for idx in range(samples):
        if rational:
            import random as _random
            g = random_rational_rotation(graph.d,
                                         _random.Random((seed, idx)))
        else:
            g = haar_rotation(graph.d, rng)
        tc = make_twisted(graph, g)
        dm = det(jet_matrix(tc))
        in_locus = (dm == 0) if tol is None else (abs(dm) <= tol)
        hits += in_locus
        records.append((idx, dm, in_locus))
    return LocusProbeReport(samples=samples, seed=seed,
                            degenerate_fraction=hits / samples,
                            records=tuple(records))


def polar_map(t, g: Mat, r, n: int, d: int) -> tuple:
    """T_t(g, r) = t g gamma(r / t) in tangent coordinates."""
    t, r = rat(t), rat(r)
    if t < 1:
        raise BadDimensions("polar map needs t >= 1")
    coords = tuple(t * c for c in gamma_coords(r / t, n, d))
    return rotate(g, coords)


def radial_sup(g: Mat, t, n: int, d: int, contains, *, hi=None,
               iters: int = 60) -> float:
    """r_(g,t) = sup{r >= 0 : T_t(g,r) in C1}, by bisection for convex C1."""
    t = rat(t)
    if hi is None:
        hi = 4.0
    lo_f, hi_f = 0.0, float(hi)
    while contains(polar_map(t, g, rat(hi_f), n, d)):
        hi_f *= 2
        if hi_f > 1e9:
            return math.inf
    for _ in range(iters):
        mid = (lo_f + hi_f) / 2
        if contains(polar_map(t, g, rat(mid), n, d)):
            lo_f = mid
        else:
            hi_f = mid
    return (lo_f + hi_f) / 2


def radial_limit(g: Mat, contains, *, hi=4.0, iters: int = 60) -> float:
    """r_g = sup{r >= 0 : r g e_1 in C1}."""
    ge1 = rotate(g, (Rat(1),) + (Rat(0),) * (g.dim - 1))
    lo_f, hi_f = 0.0, float(hi)
    while contains(tuple(rat(hi_f) * c for c in ge1)):
        hi_f *= 2
        if hi_f > 1e9:
            return math.inf
    for _ in range(iters):
        mid = (lo_f + hi_f) / 2
        if contains(tuple(rat(mid) * c for c in ge1)):
            lo_f = mid
        else:
            hi_f = mid
    return (lo_f + hi_f) / 2


def unit_ball_contains(coords) -> bool:
    return sum(float(c) ** 2 for c in coords) <= 1.0
