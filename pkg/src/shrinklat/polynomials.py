"""Small multivariate polynomials with exact rational coefficients.

Monomials are exponent tuples; everything here is desk-scale (few variables,
total degree <= n+1), so a dict representation is plenty.
"""

from __future__ import annotations

from itertools import product

import mpmath

from .scalars import Rat, rat


class Poly:
    """Polynomial in `nvars` variables, coefficients mpq."""

    __slots__ = ("nvars", "coeffs")

    def __init__(self, nvars: int, coeffs=None):
        self.nvars = nvars
        self.coeffs = {}
        if coeffs:
            for mono, c in dict(coeffs).items():
                c = rat(c)
                if c != 0:
                    self.coeffs[tuple(mono)] = c

    @classmethod
    def constant(cls, nvars: int, c) -> "Poly":
        return cls(nvars, {(0,) * nvars: rat(c)})

    @classmethod
    def variable(cls, nvars: int, i: int) -> "Poly":
        mono = tuple(1 if j == i else 0 for j in range(nvars))
        return cls(nvars, {mono: Rat(1)})

    @classmethod
    def univariate(cls, coeff_list) -> "Poly":
        """Polynomial in one variable from the list [c0, c1, ...]."""
        return cls(1, {(k,): rat(c) for k, c in enumerate(coeff_list)})

    def __eq__(self, other) -> bool:
        return (isinstance(other, Poly) and self.nvars == other.nvars
                and self.coeffs == other.coeffs)

    def __repr__(self) -> str:
        if not self.coeffs:
            return "Poly(0)"
        terms = [f"{c}*x^{m}" for m, c in sorted(self.coeffs.items())]
        return "Poly(" + " + ".join(terms) + ")"

    def is_zero(self) -> bool:
        return not self.coeffs

    def total_degree(self) -> int:
        return max((sum(m) for m in self.coeffs), default=0)

    def __add__(self, other: "Poly") -> "Poly":
        out = dict(self.coeffs)
        for m, c in other.coeffs.items():
            out[m] = out.get(m, Rat(0)) + c
        return Poly(self.nvars, out)

    def __sub__(self, other: "Poly") -> "Poly":
        return self + other.scale(Rat(-1))

    def scale(self, a) -> "Poly":
        a = rat(a)
        return Poly(self.nvars, {m: a * c for m, c in self.coeffs.items()})

    def __mul__(self, other: "Poly") -> "Poly":
        out = {}
        for m1, c1 in self.coeffs.items():
            for m2, c2 in other.coeffs.items():
                m = tuple(a + b for a, b in zip(m1, m2))
                out[m] = out.get(m, Rat(0)) + c1 * c2
        return Poly(self.nvars, out)

    def truncate(self, max_total_degree: int) -> "Poly":
        return Poly(self.nvars, {m: c for m, c in self.coeffs.items()
                                 if sum(m) <= max_total_degree})

    def diff(self, i: int) -> "Poly":
        out = {}
        for m, c in self.coeffs.items():
            if m[i] == 0:
                continue
            m2 = tuple(e - 1 if j == i else e for j, e in enumerate(m))
            out[m2] = out.get(m2, Rat(0)) + c * m[i]
        return Poly(self.nvars, out)

    def eval(self, point):
        """Evaluate at a point; works for rational and float scalars alike."""
        point = tuple(point)
        # mpq and mpf do not interoperate; lift coefficients to mpf as needed
        lift = any(isinstance(x, mpmath.mpf) for x in point)
        acc = None
        for m, c in self.coeffs.items():
            if lift:
                c = mpmath.mpf(int(c.numerator)) / mpmath.mpf(int(c.denominator))
            term = c if all(e == 0 for e in m) else c * _monomial(point, m)
            acc = term if acc is None else acc + term
        if acc is None:
            return mpmath.mpf(0) if lift else Rat(0)
        return acc

    def compose(self, args, max_total_degree=None) -> "Poly":
        """Substitute args[i] (a Poly in a common variable set) for variable i."""
        nv = args[0].nvars
        acc = Poly(nv)
        for m, c in self.coeffs.items():
            term = Poly.constant(nv, c)
            for i, e in enumerate(m):
                for _ in range(e):
                    term = term * args[i]
                    if max_total_degree is not None:
                        term = term.truncate(max_total_degree)
            acc = acc + term
        if max_total_degree is not None:
            acc = acc.truncate(max_total_degree)
        return acc

    def univariate_coeff(self, k: int):
        """Coefficient of x^k for 1-variable polynomials."""
        if self.nvars != 1:
            raise ValueError("not univariate")
        return self.coeffs.get((k,), Rat(0))


def _monomial(point, m):
    acc = None
    for x, e in zip(point, m):
        if e == 0:
            continue
        f = x ** e if e > 1 else x
        acc = f if acc is None else acc * f
    return acc


def taylor_shift(p: Poly, s) -> Poly:
    """Univariate p(s + u) as a polynomial in u."""
    if p.nvars != 1:
        raise ValueError("not univariate")
    u_plus_s = Poly(1, {(0,): rat(s), (1,): Rat(1)})
    return p.compose([u_plus_s])


def invert_series(maps, max_total_degree: int):
    """Invert a polynomial map T: R^d -> R^d with T(0)=0 and invertible
    linear part, as a truncated power series.

    maps: list of d Polys in d variables. Returns list of d Polys u(eta) with
    T(u(eta)) = eta up to total degree max_total_degree.
    """
    from .linalg import Mat, exact_inverse

    d = len(maps)
    lin = Mat(tuple(tuple(maps[i].coeffs.get(
        tuple(1 if k == j else 0 for k in range(d)), Rat(0))
        for j in range(d)) for i in range(d)))
    lin_inv = exact_inverse(lin)

    def apply_lin_inv(vec_polys):
        # row convention not relevant here; plain matrix-vector action
        return [sum((vec_polys[j].scale(lin_inv.rows[i][j]) for j in range(d)),
                    Poly(d)) for i in range(d)]

    eta = [Poly.variable(d, i) for i in range(d)]
    u = apply_lin_inv(eta)
    for _ in range(max_total_degree):
        tu = [m.compose(u, max_total_degree) for m in maps]
        nonlin = [tu[i] - sum((u[j].scale(lin.rows[i][j]) for j in range(d)),
                              Poly(d)) for i in range(d)]
        rhs = [eta[i] - nonlin[i] for i in range(d)]
        u = [p.truncate(max_total_degree) for p in apply_lin_inv(rhs)]
    return u


def random_poly(nvars: int, degree: int, rng, *, denom=8) -> Poly:
    coeffs = {}
    for m in product(range(degree + 1), repeat=nvars):
        if sum(m) > degree:
            continue
        coeffs[m] = Rat(rng.randint(-4, 4), rng.randint(1, denom))
    return Poly(nvars, coeffs)
