"""Square-matrix arithmetic over both scalar backends, the diagonal flow a(t),
and exact LLL basis reduction.

Convention used everywhere: row vectors act on the RIGHT of matrices, so the
k-th row of g is e_k * g and the top row of a curve matrix is the curve point
itself.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import mpmath
from gmpy2 import mpq

from .errors import DimensionMismatch, SingularMatrix
from .scalars import Rat, rat

LLL_DELTA = mpq(3, 4)


class Mat:
    """Immutable square (or rectangular) matrix; entries are mpq or mpf."""

    __slots__ = ("rows",)

    def __init__(self, rows: Iterable[Iterable]):
        self.rows = tuple(tuple(r) for r in rows)
        if not self.rows:
            raise DimensionMismatch("empty matrix")
        w = len(self.rows[0])
        if any(len(r) != w for r in self.rows):
            raise DimensionMismatch("ragged rows")

    @property
    def nrows(self) -> int:
        return len(self.rows)

    @property
    def ncols(self) -> int:
        return len(self.rows[0])

    @property
    def dim(self) -> int:
        if self.nrows != self.ncols:
            raise DimensionMismatch("not square")
        return self.nrows

    def __eq__(self, other) -> bool:
        return isinstance(other, Mat) and self.rows == other.rows

    def __hash__(self):
        return hash(self.rows)

    def __repr__(self) -> str:
        body = "; ".join(", ".join(str(x) for x in r) for r in self.rows)
        return f"Mat[{body}]"

    def __add__(self, other: "Mat") -> "Mat":
        self._check_same_shape(other)
        return Mat(tuple(a + b for a, b in zip(ra, rb))
                   for ra, rb in zip(self.rows, other.rows))

    def __sub__(self, other: "Mat") -> "Mat":
        self._check_same_shape(other)
        return Mat(tuple(a - b for a, b in zip(ra, rb))
                   for ra, rb in zip(self.rows, other.rows))

    def __neg__(self) -> "Mat":
        return Mat(tuple(-a for a in r) for r in self.rows)

    def __mul__(self, other: "Mat") -> "Mat":
        if self.ncols != other.nrows:
            raise DimensionMismatch(f"{self.ncols} != {other.nrows}")
        bt = tuple(zip(*other.rows))
        return Mat(tuple(_dot(r, c) for c in bt) for r in self.rows)

    def scale(self, a) -> "Mat":
        return Mat(tuple(a * x for x in r) for r in self.rows)

    def transpose(self) -> "Mat":
        return Mat(zip(*self.rows))

    def row(self, k: int) -> tuple:
        return self.rows[k]

    def sup_norm(self):
        return max(abs(x) for r in self.rows for x in r)

    def to_rational(self) -> "Mat":
        return Mat(tuple(rat(x) for x in r) for r in self.rows)

    def to_float(self, prec: int) -> "Mat":
        with mpmath.workprec(prec):
            return Mat(tuple(_as_mpf(x) for x in r) for r in self.rows)

    def _check_same_shape(self, other: "Mat"):
        if self.nrows != other.nrows or self.ncols != other.ncols:
            raise DimensionMismatch("shape mismatch")


def _dot(u, v):
    acc = u[0] * v[0]
    for a, b in zip(u[1:], v[1:]):
        acc += a * b
    return acc


def _as_mpf(x):
    if isinstance(x, mpmath.mpf):
        return +x
    q = rat(x)
    return mpmath.mpf(int(q.numerator)) / mpmath.mpf(int(q.denominator))


def identity(dim: int) -> Mat:
    return Mat(tuple(Rat(1) if i == j else Rat(0) for j in range(dim))
               for i in range(dim))


def diag(entries) -> Mat:
    entries = tuple(entries)
    dim = len(entries)
    return Mat(tuple(entries[i] if i == j else Rat(0) for j in range(dim))
               for i in range(dim))


def lower_shift(dim: int) -> Mat:
    """The matrix S with e_0 S = 0 and e_k S = e_(k-1) for k >= 1."""
    return Mat(tuple(Rat(1) if (i >= 1 and j == i - 1) else Rat(0)
                     for j in range(dim)) for i in range(dim))


@dataclass(frozen=True)
class DiagonalFlow:
    """a(t) = diag(t^n, t^-1, ..., t^-1) acting on (n+1)x(n+1) matrices."""

    n: int
    t: object

    def __post_init__(self):
        if self.n < 1:
            raise DimensionMismatch("n must be >= 1")
        if not self.t > 0:
            raise ValueError("t must be positive")

    def matrix(self) -> Mat:
        t = self.t
        return diag((t ** self.n,) + tuple(1 / t for _ in range(self.n)))


def flow_apply(a: DiagonalFlow, g: Mat) -> Mat:
    """a(t) * g: the top row scaled by t^n, the rest by 1/t."""
    if a.n + 1 != g.dim:
        raise DimensionMismatch(f"flow on dim {a.n + 1}, matrix dim {g.dim}")
    t = a.t
    top = tuple(t ** a.n * x for x in g.rows[0])
    rest = tuple(tuple(x / t for x in r) for r in g.rows[1:])
    return Mat((top,) + rest)


def det(g: Mat):
    """Determinant by Gaussian elimination (exact for rational entries)."""
    n = g.dim
    a = [list(r) for r in g.rows]
    result = a[0][0] - a[0][0] + 1  # one of the right scalar type
    sign = 1
    for col in range(n):
        piv = _pick_pivot(a, col, n)
        if piv is None:
            return result * 0
        if piv != col:
            a[col], a[piv] = a[piv], a[col]
            sign = -sign
        p = a[col][col]
        result = result * p
        for r in range(col + 1, n):
            f = a[r][col] / p
            if f == 0:
                continue
            for c in range(col, n):
                a[r][c] -= f * a[col][c]
    return result if sign > 0 else -result


def _pick_pivot(a, col, n):
    best, best_abs = None, None
    for r in range(col, n):
        v = abs(a[r][col])
        if v != 0 and (best_abs is None or v > best_abs):
            best, best_abs = r, v
    return best


def exact_inverse(g: Mat, *, tol=None) -> Mat:
    """Inverse by Gauss-Jordan elimination with partial pivoting.

    tol, when given, declares pivots with |pivot| <= tol singular (float mode).
    """
    n = g.dim
    has_mpf = any(isinstance(x, mpmath.mpf) for r in g.rows for x in r)
    one = mpmath.mpf(1) if has_mpf else Rat(1)
    zero = mpmath.mpf(0) if has_mpf else Rat(0)
    a = [list(r) + [one if i == j else zero for j in range(n)]
         for i, r in enumerate(g.rows)]
    for col in range(n):
        piv = _pick_pivot(a, col, n)
        if piv is None or (tol is not None and abs(a[piv][col]) <= tol):
            raise SingularMatrix(f"no usable pivot in column {col}")
        if piv != col:
            a[col], a[piv] = a[piv], a[col]
        p = a[col][col]
        a[col] = [x / p for x in a[col]]
        for r in range(n):
            if r == col:
                continue
            f = a[r][col]
            if f == 0:
                continue
            a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return Mat(tuple(row[n:]) for row in a)


def solve_right(m: Mat, rhs: Mat) -> Mat:
    """Solve m * X = rhs by elimination (no explicit inverse)."""
    n = m.dim
    a = [list(r) + list(t) for r, t in zip(m.rows, rhs.rows)]
    w = len(a[0])
    for col in range(n):
        piv = _pick_pivot(a, col, n)
        if piv is None:
            raise SingularMatrix("singular system")
        if piv != col:
            a[col], a[piv] = a[piv], a[col]
        p = a[col][col]
        a[col] = [x / p for x in a[col]]
        for r in range(n):
            if r == col:
                continue
            f = a[r][col]
            if f == 0:
                continue
            a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    del w
    return Mat(tuple(row[n:]) for row in a)


@dataclass(frozen=True)
class ReducedBasis:
    """LLL output: reduced basis, the unimodular row transform, and the
    Gram-Schmidt norms that certify enumeration bounds (basis = transform * original)."""

    basis: Mat
    transform: Mat
    gs_norms_sq: tuple


def reduce_basis(b: Mat) -> ReducedBasis:
    """LLL with delta = 3/4 and exact rational Gram-Schmidt.

    Float input is converted exactly (floats are dyadic rationals), so the
    reduction is always exact; the transform is integral with det +-1.
    """
    m = b.to_rational()
    n = m.dim
    basis = [list(r) for r in m.rows]
    u = [[Rat(1) if i == j else Rat(0) for j in range(n)] for i in range(n)]

    def gso(rows):
        star, mu, norms = [], [], []
        for i in range(n):
            v = list(rows[i])
            mu_i = []
            for j in range(i):
                if norms[j] == 0:
                    raise SingularMatrix("linearly dependent basis")
                c = _dot(rows[i], star[j]) / norms[j]
                mu_i.append(c)
                v = [x - c * y for x, y in zip(v, star[j])]
            star.append(v)
            mu.append(mu_i)
            norms.append(_dot(v, v))
            if norms[i] == 0:
                raise SingularMatrix("linearly dependent basis")
        return star, mu, norms

    k = 1
    while k < n:
        for j in range(k - 1, -1, -1):
            _, mu, _ = gso(basis)
            c = mu[k][j]
            r = int((2 * c.numerator + c.denominator) // (2 * c.denominator))
            if r != 0:
                basis[k] = [x - r * y for x, y in zip(basis[k], basis[j])]
                u[k] = [x - r * y for x, y in zip(u[k], u[j])]
        star, mu, norms = gso(basis)
        lhs = norms[k]
        rhs = (LLL_DELTA - mu[k][k - 1] ** 2) * norms[k - 1]
        if lhs < rhs:
            basis[k], basis[k - 1] = basis[k - 1], basis[k]
            u[k], u[k - 1] = u[k - 1], u[k]
            star, mu, norms = gso(basis)
            k = max(k - 1, 1)
        else:
            k += 1
    return ReducedBasis(Mat(basis), Mat(u), tuple(norms))
