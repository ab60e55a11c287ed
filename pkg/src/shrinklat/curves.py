"""Curves and submanifolds mapped into SL(n+1): jets, nondegeneracy tests,
and graph-over-tangent forms.

A curve is carried as a map s -> Phi(s) into SL(n+1,R) whose top row is the
point phi(s) in R^(n+1); everything downstream (corrections, limits, twisted
curves) consumes the Taylor data computed here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from math import comb, factorial
from typing import Callable, Optional, Sequence

import mpmath

from .errors import (DimensionMismatch, NumericJetUnstable, OutOfDomain,
                     RankDeficient)
from .linalg import Mat, det, exact_inverse, identity
from .polynomials import Poly, invert_series, taylor_shift
from .scalars import Rat, rat, rat_to_mpf

DEFAULT_NUMERIC_H = Rat(1, 2 ** 16)


def unipotent(z: Sequence) -> Mat:
    """u(z): identity with the vector z in the top row."""
    z = tuple(z)
    n = len(z)
    top = (Rat(1),) + z
    rest = tuple(tuple(Rat(1) if j == i else Rat(0) for j in range(n + 1))
                 for i in range(1, n + 1))
    return Mat((top,) + rest)


@dataclass(frozen=True)
class CurveSpec:
    """A map Phi from an open domain in R^d into SL(n+1,R).

    Exactly one jet source must be usable: polynomial top-row data
    (top_polys), closed-form derivatives (deriv_fn), or plain evaluation for
    central-difference jets.
    """

    name: str
    d: int
    n: int
    phi: Callable[[Sequence], Mat]
    domain: tuple = ((-math.inf, math.inf),)
    top_polys: Optional[Sequence[Poly]] = None
    deriv_fn: Optional[Callable[[object, int], tuple]] = None

    def top(self, s: Sequence) -> tuple:
        return self.phi(s).rows[0]

    def in_domain(self, s: Sequence) -> bool:
        for x, (lo, hi) in zip(s, self.domain):
            if not (lo < float(x) < hi):
                return False
        return True


@dataclass(frozen=True)
class Jet:
    """Taylor data of the top row at a base point (d = 1 curves).

    rows[k] = phi^(k)(s) / k! for 0 <= k <= n; top_next is the (n+1)-st
    coefficient, kept apart because only the limit element needs it.
    """

    s: object
    n: int
    rows: Mat
    top_next: Optional[tuple]
    phi_matrix: Optional[Mat]
    backend: str = "rational"
    prec: Optional[int] = None


def jet_at(c: CurveSpec, s, order: Optional[int] = None, *,
           backend: str = "auto", prec: int = 256,
           h=DEFAULT_NUMERIC_H) -> Jet:
    """Jet of the top row of c at s, to derivative order `order` (default n+1)."""
    if c.d != 1:
        raise DimensionMismatch("jets at a point are for d = 1 curves")
    if order is None:
        order = c.n + 1
    if order > c.n + 1:
        raise DimensionMismatch(f"order {order} exceeds n+1 = {c.n + 1}")
    if not c.in_domain((s,)):
        raise OutOfDomain(f"{s} outside domain of {c.name}")

    if backend == "auto":
        backend = "rational" if c.top_polys is not None else "float"

    if c.top_polys is not None and backend == "rational":
        coeff_rows = _poly_jet(c, rat(s), order)
        phi_m = c.phi((rat(s),))
    elif c.deriv_fn is not None:
        coeff_rows, phi_m = _analytic_jet(c, s, order, prec)
    else:
        coeff_rows, phi_m = _numeric_jet(c, s, order, prec, h)

    rows = list(coeff_rows[:c.n + 1])
    while len(rows) < c.n + 1:
        rows.append(tuple(Rat(0) for _ in range(c.n + 1)))
    top_next = coeff_rows[c.n + 1] if order >= c.n + 1 else None
    return Jet(s=s, n=c.n, rows=Mat(rows), top_next=top_next,
               phi_matrix=phi_m, backend=backend,
               prec=None if backend == "rational" else prec)


def _poly_jet(c: CurveSpec, s, order: int):
    shifted = [taylor_shift(p, s) for p in c.top_polys]
    return [tuple(p.univariate_coeff(k) for p in shifted)
            for k in range(order + 1)]


def _analytic_jet(c: CurveSpec, s, order: int, prec: int):
    with mpmath.workprec(prec):
        s_f = _to_mpf(s, prec)
        rows = [tuple(x / mpmath.mpf(factorial(k)) for x in c.deriv_fn(s_f, k))
                for k in range(order + 1)]
        phi_m = c.phi((s_f,)).to_float(prec)
    return rows, phi_m


def _numeric_jet(c: CurveSpec, s, order: int, prec: int, h):
    with mpmath.workprec(prec):
        s_f = _to_mpf(s, prec)
        h_f = _to_mpf(h, prec)

        def top(x):
            return c.phi((x,)).to_float(prec).rows[0]

        rows = [top(s_f)]
        for k in range(1, order + 1):
            d_h = _central_diff(top, s_f, k, h_f)
            d_h2 = _central_diff(top, s_f, k, h_f / 2)
            rich = tuple((4 * b - a) / 3 for a, b in zip(d_h, d_h2))
            scale = max(mpmath.mpf(1), max(abs(x) for x in rich))
            if max(abs(b - a) for a, b in zip(d_h, d_h2)) > scale * mpmath.mpf("1e-3"):
                raise NumericJetUnstable(
                    f"order-{k} difference estimates disagree at h = {h_f}")
            rows.append(tuple(x / mpmath.mpf(factorial(k)) for x in rich))
        phi_m = c.phi((s_f,)).to_float(prec)
    return rows, phi_m


def _central_diff(f, s, k, h):
    """k-th derivative by the central difference on half-step offsets; O(h^2)."""
    dim = None
    acc = None
    for i in range(k + 1):
        w = (-1) ** i * comb(k, i)
        pt = s + (mpmath.mpf(k) / 2 - i) * h
        val = f(pt)
        dim = len(val)
        term = tuple(w * x for x in val)
        acc = term if acc is None else tuple(a + b for a, b in zip(acc, term))
    return tuple(x / h ** k for x in acc[:dim])


def _to_mpf(x, prec):
    if isinstance(x, mpmath.mpf):
        return +x
    return rat_to_mpf(rat(x), prec)


def nondegenerate(j: Jet, *, tol=None):
    """Definition-style test: the jet rows span R^(n+1).

    Returns (flag, certificate) where the certificate carries the determinant
    of the jet matrix and a Hadamard-style condition estimate.
    """
    d = det(j.rows)
    hadamard = 1
    for r in j.rows.rows:
        norm_sq = sum(x * x for x in r)
        hadamard *= norm_sq
    cert = {"det": d, "hadamard_sq": hadamard}
    if j.backend == "rational":
        return d != 0, cert
    if tol is None:
        tol = mpmath.mpf(2) ** (-(j.prec or 53) // 4)
    return abs(d) > tol, cert


@dataclass(frozen=True)
class GraphForm:
    """The manifold written as a graph over its tangent at a base point:
    phi(Psi(eta)) = phi(s) + eta + F(eta), with F mapping into the chosen
    complement.

    tangent_frame rows are orthonormal; comp_frame is a basis of the
    complement containing the base value direction. F_polys give the
    complement coordinates of F as a truncated series in the tangent
    coordinates, valid through total degree `order`.
    """

    n: int
    d: int
    base_s: tuple
    base_value: tuple
    tangent_frame: tuple
    comp_frame: tuple
    F_polys: tuple
    order: int
    phi_matrix: Mat
    psi_series: Optional[tuple] = None
    series_exact: bool = False

    def embed_tangent(self, coords) -> tuple:
        return _frame_combine(coords, self.tangent_frame, self.n + 1)

    def embed_comp(self, coords) -> tuple:
        return _frame_combine(coords, self.comp_frame, self.n + 1)

    def F_at(self, eta_coords) -> tuple:
        return tuple(p.eval(tuple(eta_coords)) for p in self.F_polys)

    def point_at(self, eta_coords) -> tuple:
        """phi(s) + eta + F(eta) in ambient coordinates."""
        eta = self.embed_tangent(eta_coords)
        fc = self.F_at(eta_coords)
        fv = self.embed_comp(fc)
        return tuple(b + e + f for b, e, f in zip(self.base_value, eta, fv))

    def roundtrip_residual(self, eta_coords):
        """sup-norm of phi(Psi(eta)) - (phi(s) + eta + F(eta)) via the
        Psi series; identically zero whenever the series terminated exactly."""
        if self.psi_series is None:
            raise RankDeficient("no Psi series attached")
        u = tuple(p.eval(tuple(eta_coords)) for p in self.psi_series)
        lhs = self._phi_value(u)
        rhs = self.point_at(eta_coords)
        return max(abs(a - b) for a, b in zip(lhs, rhs))

    def _phi_value(self, u):
        if getattr(self, "_phi_polys", None) is None:
            raise RankDeficient("no exact evaluator attached")
        return tuple(p.eval(u) for p in self._phi_polys)


def _frame_combine(coords, frame, width):
    out = [Rat(0)] * width
    for c, row in zip(coords, frame):
        for i, x in enumerate(row):
            out[i] = out[i] + c * x
    return tuple(out)


def graph_form_at(c: CurveSpec, s: Sequence) -> GraphForm:
    """Graph form of a polynomial curve/submanifold at s.

    Requires top_polys (the exact path: series inversion of the tangent
    coordinates, valid through total degree n+1).
    """
    if c.top_polys is None:
        raise RankDeficient("graph form needs polynomial top-row data")
    s = tuple(rat(x) for x in s)
    if len(s) != c.d:
        raise DimensionMismatch("base point dimension mismatch")
    n, d = c.n, c.d
    order = n + 1

    # phi(s+u) - phi(s) as Polys in u (d variables)
    shift = [Poly.variable(d, i) + Poly.constant(d, s[i]) for i in range(d)]
    phi_shift = [p.compose(shift) for p in c.top_polys]
    base_value = tuple(p.eval(s) for p in c.top_polys)
    delta = [phi_shift[i] - Poly.constant(d, base_value[i])
             for i in range(n + 1)]

    # rows of D phi(s): d x (n+1)
    dphi = [tuple(c.top_polys[j].diff(i).eval(s) for j in range(n + 1))
            for i in range(d)]
    tangent_frame = _orthonormal_frame(dphi)
    if tangent_frame is None:
        raise RankDeficient(f"D phi has rank < {d} at {s}")

    comp_frame = _complement_frame(tangent_frame, base_value, n + 1)
    basis = Mat(tuple(tangent_frame) + tuple(comp_frame))
    binv = exact_inverse(basis)

    # coordinates of phi(s+u) - phi(s) in the (tangent, complement) basis
    coords = [sum((delta[j].scale(binv.rows[j][i]) for j in range(n + 1)),
                  Poly(d)) for i in range(n + 1)]
    tangent_coords = coords[:d]
    psi_series = invert_series(tangent_coords, order)
    F_polys = tuple(coords[d + m].compose(psi_series, order)
                    for m in range(n + 1 - d))

    # the series is exact iff re-expanding the tangent coordinates returns eta
    exact = all(
        (tc.compose(psi_series) - Poly.variable(d, i)).is_zero()
        for i, tc in enumerate(tangent_coords))

    gf = GraphForm(n=n, d=d, base_s=s, base_value=base_value,
                   tangent_frame=tuple(tangent_frame),
                   comp_frame=tuple(comp_frame), F_polys=F_polys,
                   order=order, phi_matrix=c.phi(s),
                   psi_series=tuple(psi_series), series_exact=exact)
    object.__setattr__(gf, "_phi_polys", tuple(phi_shift))
    return gf


def graph_form_from_F(n: int, d: int, F_polys: Sequence[Poly],
                      phi_matrix: Optional[Mat] = None) -> GraphForm:
    """Builtin graph-position form: base value e_0, tangent span(e_1..e_d),
    complement span(e_0, e_(d+1)..e_n); F maps into the complement with
    F(0) = 0 and DF(0) = 0."""
    if not 1 <= d <= n:
        raise DimensionMismatch("need 1 <= d <= n")
    if len(F_polys) != n + 1 - d:
        raise DimensionMismatch("F must have n+1-d components")
    e = identity(n + 1).rows
    for p in F_polys:
        if p.coeffs.get((0,) * d, Rat(0)) != 0:
            raise RankDeficient("F(0) must vanish")
        for i in range(d):
            if p.coeffs.get(tuple(1 if j == i else 0 for j in range(d)),
                            Rat(0)) != 0:
                raise RankDeficient("DF(0) must vanish")
    comp = (e[0],) + tuple(e[d + 1 + i] for i in range(n - d))
    return GraphForm(n=n, d=d, base_s=(Rat(0),) * d, base_value=e[0],
                     tangent_frame=tuple(e[1 + i] for i in range(d)),
                     comp_frame=comp,
                     F_polys=tuple(p.truncate(n + 1) for p in F_polys),
                     order=n + 1,
                     phi_matrix=phi_matrix or identity(n + 1),
                     psi_series=tuple(Poly.variable(d, i) for i in range(d)),
                     series_exact=all(p.total_degree() <= n + 1
                                      for p in F_polys))


def _orthonormal_frame(rows):
    """Gram-Schmidt over exact rationals; returns None when rank deficient.

    Frames are exact when every Gram-Schmidt norm is a rational square, which
    holds for all builtin data; otherwise the deferred square roots would
    leave the exact path, so we refuse (callers fall back to float frames)."""
    frame = []
    for r in rows:
        v = [rat(x) for x in r]
        for q in frame:
            c = sum(a * b for a, b in zip(v, q))
            v = [a - c * b for a, b in zip(v, q)]
        nsq = sum(a * a for a in v)
        if nsq == 0:
            return None
        root = _rational_sqrt(nsq)
        if root is None:
            raise RankDeficient(
                "tangent frame norm is not a rational square; "
                "supply the manifold in graph position instead")
        frame.append(tuple(a / root for a in v))
    return frame


def _rational_sqrt(q):
    num, den = int(q.numerator), int(q.denominator)
    rn, rd = math.isqrt(num), math.isqrt(den)
    if rn * rn == num and rd * rd == den:
        return Rat(rn, rd)
    return None


def _complement_frame(tangent_frame, base_value, width):
    """Basis of a complement L with base_value in L: the base value itself
    plus the part of the orthogonal complement of (tangent + base)."""
    rows = [tuple(rat(x) for x in base_value)]
    span = [list(r) for r in tangent_frame] + [list(rows[0])]
    # orthogonalize the span to project candidates
    ortho = []
    for v in span:
        w = list(v)
        for q in ortho:
            nq = sum(a * a for a in q)
            cscale = sum(a * b for a, b in zip(w, q)) / nq
            w = [a - cscale * b for a, b in zip(w, q)]
        if any(x != 0 for x in w):
            ortho.append(w)
    for i in range(width):
        cand = [Rat(1) if j == i else Rat(0) for j in range(width)]
        for q in ortho:
            nq = sum(a * a for a in q)
            cscale = sum(a * b for a, b in zip(cand, q)) / nq
            cand = [a - cscale * b for a, b in zip(cand, q)]
        if any(x != 0 for x in cand):
            rows.append(tuple(cand))
            ortho.append(cand)
        if len(rows) == width - len(tangent_frame):
            break
    if len(rows) != width - len(tangent_frame):
        raise RankDeficient("could not complete complement frame")
    return rows


# --- builtin catalog ---------------------------------------------------------

def _moment_curve(n: int) -> CurveSpec:
    polys = [Poly.univariate([1])] + [
        Poly(1, {(k,): Rat(1)}) for k in range(1, n + 1)]

    def phi(s):
        return unipotent(tuple(s[0] ** k for k in range(1, n + 1)))

    return CurveSpec(name=f"moment-{n}", d=1, n=n, phi=phi, top_polys=polys)


def _affine_curve() -> CurveSpec:
    polys = [Poly.univariate([1]), Poly.univariate([0, 1]),
             Poly.univariate([0, 2])]

    def phi(s):
        return unipotent((s[0], 2 * s[0]))

    return CurveSpec(name="affine", d=1, n=2, phi=phi, top_polys=polys)


def _sin_exp_curve() -> CurveSpec:
    """psi(s) = (sin s + 2s, exp(s) - 1); analytic jets in closed form."""

    def phi(s):
        x = s[0]
        return unipotent((mpmath.sin(x) + 2 * x, mpmath.exp(x) - 1))

    def deriv(s, k):
        if k == 0:
            return (mpmath.mpf(1), mpmath.sin(s) + 2 * s, mpmath.exp(s) - 1)
        first = mpmath.sin(s + k * mpmath.pi / 2) + (2 if k == 1 else 0)
        return (mpmath.mpf(0), first, mpmath.exp(s))

    return CurveSpec(name="sin-exp", d=1, n=2, phi=phi, deriv_fn=deriv)


def _plane_2d() -> CurveSpec:
    polys = [Poly.constant(2, 1), Poly.variable(2, 0), Poly.variable(2, 1)]

    def phi(s):
        return unipotent((s[0], s[1]))

    return CurveSpec(name="plane-2d", d=2, n=2, phi=phi, top_polys=polys)


def builtin_curves() -> dict:
    return {
        "line": _moment_curve(1),
        "moment": _moment_curve(2),
        "moment-3": _moment_curve(3),
        "affine": _affine_curve(),
        "sin-exp": _sin_exp_curve(),
        "plane-2d": _plane_2d(),
    }


def builtin_graphs() -> dict:
    """Graph-position submanifolds used by the twisting experiments."""
    s1, s2 = Poly.variable(2, 0), Poly.variable(2, 1)
    quad = s1 * s1 + s1 * s2 + s2 * s2
    zero = Poly(2)
    return {
        "graph-flat-22": graph_form_from_F(2, 2, [zero]),
        "graph-quad-22": graph_form_from_F(2, 2, [quad]),
        "graph-32": graph_form_from_F(
            3, 2, [(s1 * s1).scale(Rat(1, 2)) + (s2 * s2).scale(Rat(1, 3)),
                   quad + s1 * s1 * s1]),
    }


def parse_curve(text: str) -> CurveSpec:
    """Parse the declarative curve grammar.

    Lines: `n=<int>`, optional `name=<str>`, and one `component: c0,c1,...`
    per coordinate of psi (rational coefficients, ascending powers of s).
    The curve is the unipotent lift u(psi(s)); d = 1.
    """
    n = None
    name = "user-curve"
    comps = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("component:"):
            coeffs = [rat(tok.strip()) for tok in
                      line.split(":", 1)[1].split(",")]
            comps.append(coeffs)
        elif "=" in line:
            key, val = (p.strip() for p in line.split("=", 1))
            if key == "n":
                n = int(val)
            elif key == "name":
                name = val
            else:
                raise OutOfDomain(f"unknown key {key!r} on line {lineno}")
        else:
            raise OutOfDomain(f"cannot parse line {lineno}: {raw!r}")
    if n is None:
        n = len(comps)
    if len(comps) != n:
        raise OutOfDomain(f"expected {n} components, got {len(comps)}")
    psi_polys = [Poly.univariate(cs) for cs in comps]
    polys = [Poly.univariate([1])] + psi_polys

    def phi(s):
        return unipotent(tuple(p.eval((s[0],)) for p in psi_polys))

    return CurveSpec(name=name, d=1, n=n, phi=phi, top_polys=polys)
