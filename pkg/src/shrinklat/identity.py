"""The nilpotent correction, the limit element, and residual checks for the
factorization of expanding translates of a shrinking curve.

Everything here is the d = 1 pipeline: given the jet of the top row at s,
there is a unique rank-n nilpotent B_s killing the positive powers of t in
the Taylor-expanded translate; the translate then splits as a bounded error
times the limit element times the polynomial one-parameter family
(I - t B_s)^{-1}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import mpmath

from .curves import CurveSpec, Jet, nondegenerate
from .errors import (DegenerateInput, NotUnimodular, OutOfDomain,
                     PrecisionExhausted, SingularJet)
from .linalg import (DiagonalFlow, Mat, det, exact_inverse, flow_apply,
                     identity, lower_shift, solve_right)
from .scalars import rat


@dataclass(frozen=True)
class NilpotentCorrection:
    """B with rank n, B^(n+1) = 0, satisfying the row relations against the
    generating jet matrix M: (row 0)B = 0, (row k)B = row k-1."""

    B: Mat
    M: Mat
    n: int


@dataclass(frozen=True)
class LimitElement:
    xi1: tuple
    xi2: tuple  # rows 1..n
    xi_plus: Mat
    xi_minus: Mat

    def at_sign(self, sigma: int) -> Mat:
        return self.xi_plus if sigma > 0 else self.xi_minus


def solve_correction(j: Jet, *, tol=None) -> NilpotentCorrection:
    """Unique B with M B = S M (S the lower shift), computed two ways.

    Both the direct linear solve and the conjugation M^{-1} S M are formed
    and must agree; in rational mode the agreement is entrywise exact.
    """
    ok, cert = nondegenerate(j, tol=tol)
    if not ok:
        raise SingularJet(f"jet matrix is singular (det = {cert['det']})")
    M = j.rows
    S = lower_shift(M.dim)
    if j.backend == "rational":
        direct = solve_right(M, S * M)
        conj = exact_inverse(M) * (S * M)
        if direct != conj:
            raise SingularJet("direct solve and conjugation disagree")
    else:
        prec = j.prec or 53
        with mpmath.workprec(prec):
            S = S.to_float(prec)
            direct = solve_right(M, S * M)
            conj = exact_inverse(M) * (S * M)
            scale = max(mpmath.mpf(1), direct.sup_norm())
            if (direct - conj).sup_norm() > scale * mpmath.mpf(2) ** (-prec // 2):
                raise SingularJet(
                    "direct solve and conjugation disagree beyond tolerance")
    return NilpotentCorrection(B=direct, M=M, n=j.n)


def correction_polynomial(corr: NilpotentCorrection, t) -> Mat:
    """P(t) = I + sum t^k B^k = (I - tB)^{-1}; determinant 1."""
    B = corr.B
    out = identity(B.dim)
    if isinstance(t, mpmath.mpf):
        out = out.to_float(mpmath.mp.prec)
    power = B
    for k in range(1, corr.n + 1):
        out = out + power.scale(t ** k)
        power = power * B
    return out


def limit_element(j: Jet, corr: NilpotentCorrection, *, tol=None) -> LimitElement:
    """Assemble xi1, xi2 and the limit matrices at both signs, with the
    determinant-one membership check."""
    if j.top_next is None:
        raise DegenerateInput("jet lacks the (n+1)-st derivative row")
    if j.phi_matrix is None:
        raise DegenerateInput("jet lacks the full curve matrix")
    if j.backend != "rational":
        with mpmath.workprec(j.prec or 53):
            return _limit_element_impl(j, corr, tol)
    return _limit_element_impl(j, corr, tol)


def _limit_element_impl(j: Jet, corr: NilpotentCorrection, tol) -> LimitElement:
    n = j.n
    B = corr.B
    row_n = Mat([j.rows.rows[n]])
    row_next = Mat([j.top_next])
    xi1 = (row_n - row_next * B).rows[0]

    lower = Mat(j.phi_matrix.rows[1:])  # rows 1..n of Phi(s)
    xi2 = tuple((-(lower * B)).rows)

    def assemble(sigma: int) -> Mat:
        sn = sigma ** n
        top = tuple(sn * x for x in xi1)
        rest = tuple(tuple(sigma * x for x in r) for r in xi2)
        return Mat((top,) + rest)

    xi_p, xi_m = assemble(1), assemble(-1)
    for m in (xi_p, xi_m):
        d = det(m)
        if j.backend == "rational":
            if d != 1:
                raise NotUnimodular(f"det(xi) = {d}, expected 1")
        else:
            if tol is None:
                tol = mpmath.mpf(2) ** (-(j.prec or 53) // 4)
            if abs(d - 1) > tol:
                raise NotUnimodular(f"det(xi) = {d} beyond tolerance {tol}")
    return LimitElement(xi1=xi1, xi2=xi2, xi_plus=xi_p, xi_minus=xi_m)


@dataclass(frozen=True)
class ResidualReport:
    t: object
    sigma: int
    E: Mat
    sup_norm: object
    backend: str
    prec: Optional[int]


def identity_residual(c: CurveSpec, s, corr: NilpotentCorrection,
                      xi: LimitElement, t, *, prec: Optional[int] = None) -> ResidualReport:
    """E(t) = a(|t|) Phi(s + 1/t)(I - t B) - xi(sign t), with its sup-norm."""
    if t == 0:
        raise OutOfDomain("t must be nonzero")
    backend = "rational" if prec is None else "float"
    if backend == "rational":
        t_r = rat(t)
        s_shift = rat(s) + 1 / t_r
        if not c.in_domain((s_shift,)):
            raise OutOfDomain(f"s + 1/t = {s_shift} outside domain")
        sigma = 1 if t_r > 0 else -1
        phi_m = c.phi((s_shift,))
        a = DiagonalFlow(c.n, abs(t_r))
        factor = identity(c.n + 1) - corr.B.scale(t_r)
        E = flow_apply(a, phi_m) * factor - xi.at_sign(sigma)
        return ResidualReport(t=t_r, sigma=sigma, E=E, sup_norm=E.sup_norm(),
                              backend=backend, prec=None)
    with mpmath.workprec(prec):
        t_f = +mpmath.mpf(float(t)) if not isinstance(t, mpmath.mpf) else +t
        s_f = mpmath.mpf(float(s)) if not isinstance(s, mpmath.mpf) else +s
        s_shift = s_f + 1 / t_f
        if not c.in_domain((s_shift,)):
            raise OutOfDomain(f"s + 1/t = {s_shift} outside domain")
        sigma = 1 if t_f > 0 else -1
        phi_m = c.phi((s_shift,)).to_float(prec)
        a = DiagonalFlow(c.n, abs(t_f))
        factor = identity(c.n + 1).to_float(prec) - corr.B.to_float(prec).scale(t_f)
        prod = flow_apply(a, phi_m) * factor
        E = prod - xi.at_sign(sigma).to_float(prec)
        norm = E.sup_norm()
        # the product has entries of size up to t^(n+1) before cancellation
        cancel_scale = max(mpmath.mpf(1), prod.sup_norm(),
                           abs(t_f) ** (c.n + 1))
        if norm < cancel_scale * mpmath.mpf(2) ** (-prec) * 16:
            raise PrecisionExhausted(
                f"residual {norm} is below the cancellation noise floor at "
                f"{prec} bits")
        return ResidualReport(t=t_f, sigma=sigma, E=E, sup_norm=norm,
                              backend=backend, prec=prec)


@dataclass(frozen=True)
class DecayFit:
    kind: str  # "fit" or "exact-zero"
    slope: Optional[float]
    intercept: Optional[float]
    interval_slopes: tuple


def decay_fit(residuals: Sequence[tuple]) -> DecayFit:
    """Least-squares slope of log||E|| against log t.

    residuals: (t, norm) pairs with t strictly increasing. All-zero norms are
    reported as an exactly-zero residual rather than an error.
    """
    if len(residuals) < 4:
        raise DegenerateInput("need at least 4 residual points")
    ts = [float(t) for t, _ in residuals]
    norms = [float(v) for _, v in residuals]
    if any(b <= a for a, b in zip(ts, ts[1:])):
        raise DegenerateInput("t values must be strictly increasing")
    if all(v == 0 for v in norms):
        return DecayFit(kind="exact-zero", slope=None, intercept=None,
                        interval_slopes=())
    if any(v <= 0 for v in norms):
        raise DegenerateInput("mixed zero and nonzero residual norms")
    xs = [math.log(t) for t in ts]
    ys = [math.log(v) for v in norms]
    m = len(xs)
    xbar, ybar = sum(xs) / m, sum(ys) / m
    sxx = sum((x - xbar) ** 2 for x in xs)
    sxy = sum((x - xbar) * (y - ybar) for x, y in zip(xs, ys))
    slope = sxy / sxx
    intercept = ybar - slope * xbar
    pairwise = tuple((ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i])
                     for i in range(m - 1))
    return DecayFit(kind="fit", slope=slope, intercept=intercept,
                    interval_slopes=pairwise)
