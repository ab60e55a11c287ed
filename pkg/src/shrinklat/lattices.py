"""Unimodular lattices, exact point counting in boxes, and the Monte Carlo
equidistribution experiments that compare trajectory/translate averages
against the mean-value oracle (the Haar average of a box count equals the
box volume).
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .curves import CurveSpec
from .errors import (DimensionMismatch, EnumerationBudgetExceeded,
                     NotUnimodular)
from .linalg import DiagonalFlow, Mat, det, flow_apply, reduce_basis
from .scalars import Rat, rat

DEFAULT_BUDGET = 10 ** 7


@dataclass(frozen=True)
class Box:
    """Axis box: closed intervals per coordinate, rational endpoints."""

    intervals: tuple

    def __post_init__(self):
        ivs = tuple((rat(a), rat(b)) for a, b in self.intervals)
        object.__setattr__(self, "intervals", ivs)
        for a, b in ivs:
            if not a < b:
                raise DimensionMismatch(f"empty interval [{a}, {b}]")

    @classmethod
    def cube(cls, radius, dim: int) -> "Box":
        r = rat(radius)
        return cls(tuple((-r, r) for _ in range(dim)))

    @property
    def dim(self) -> int:
        return len(self.intervals)

    def volume(self):
        v = Rat(1)
        for a, b in self.intervals:
            v *= (b - a)
        return v

    def contains(self, point) -> bool:
        return all(a <= x <= b for x, (a, b) in zip(point, self.intervals))

    def on_boundary(self, point) -> bool:
        return any(x == a or x == b
                   for x, (a, b) in zip(point, self.intervals))

    def corner_radii(self) -> tuple:
        return tuple(max(abs(a), abs(b)) for a, b in self.intervals)


@dataclass(frozen=True)
class UnimodularLattice:
    """Lattice generated by the rows of `basis` (right-action convention)."""

    basis: Mat

    def __post_init__(self):
        d = det(self.basis.to_rational())
        if abs(d) != 1:
            # dyadic float entries make |det| exactly 1 only for exact inputs;
            # allow a small slack for rounded data
            if abs(float(abs(d)) - 1.0) > 1e-9:
                raise NotUnimodular(f"|det| = {d}")

    @property
    def dim(self) -> int:
        return self.basis.dim


def _gso_rows(rows):
    m = len(rows)
    star, mu, norms = [], [], []
    for i in range(m):
        v = [rat(x) for x in rows[i]]
        mu_i = [Rat(0)] * m
        for j in range(i):
            c = sum(a * b for a, b in zip(rows[i], star[j])) / norms[j]
            mu_i[j] = c
            v = [a - c * b for a, b in zip(v, star[j])]
        star.append(v)
        mu.append(mu_i)
        norms.append(sum(a * a for a in v))
    return star, mu, norms


def enumerate_ball(rows, rho_sq, budget: int = DEFAULT_BUDGET):
    """All nonzero integer combinations of the rows with squared Euclidean
    norm <= rho_sq, by Fincke-Pohst recursion over the Gram-Schmidt
    triangularization. Yields (coeffs, point). Exact rational arithmetic."""
    m = len(rows)
    _, mu, norms = _gso_rows(rows)
    rho_sq = rat(rho_sq)
    visited = 0
    coeffs = [0] * m

    def recurse(i, rem):
        nonlocal visited
        if i < 0:
            if any(coeffs):
                c = tuple(coeffs)
                point = tuple(
                    sum(c[k] * rows[k][a] for k in range(m))
                    for a in range(len(rows[0])))
                yield c, point
            return
        center = sum(mu[j][i] * coeffs[j] for j in range(i + 1, m))
        half_width = math.sqrt(float(rem / norms[i])) + 2
        lo = math.ceil(float(-center) - half_width)
        hi = math.floor(float(-center) + half_width)
        for ci in range(lo, hi + 1):
            visited += 1
            if visited > budget:
                raise EnumerationBudgetExceeded(
                    f"enumeration exceeded {budget} nodes")
            contrib = (ci + center) ** 2 * norms[i]
            if contrib > rem:
                continue
            coeffs[i] = ci
            yield from recurse(i - 1, rem - contrib)
        coeffs[i] = 0

    yield from recurse(m - 1, rho_sq)


@dataclass(frozen=True)
class BoxCount:
    count: int
    boundary_hits: int
    points: Optional[tuple] = None


def count_in_box_detail(L: UnimodularLattice, box: Box, *,
                        budget: int = DEFAULT_BUDGET,
                        keep_points: bool = False) -> BoxCount:
    """Exact count of nonzero lattice points inside the box (reduce, then
    enumerate a circumscribing ball with proven bounds)."""
    if box.dim != L.dim:
        raise DimensionMismatch("box/lattice dimension mismatch")
    red = reduce_basis(L.basis)
    rho_sq = sum(r * r for r in box.corner_radii())
    count = 0
    boundary = 0
    pts = []
    for coeffs, point in enumerate_ball(red.basis.rows, rho_sq, budget):
        if box.contains(point):
            count += 1
            boundary += box.on_boundary(point)
            if keep_points:
                orig = tuple(
                    sum(coeffs[k] * red.transform.rows[k][j]
                        for k in range(len(coeffs)))
                    for j in range(L.dim))
                pts.append((orig, point))
    return BoxCount(count=count, boundary_hits=boundary,
                    points=tuple(pts) if keep_points else None)


def count_in_box(L: UnimodularLattice, box: Box, *,
                 budget: int = DEFAULT_BUDGET) -> int:
    return count_in_box_detail(L, box, budget=budget).count


def shortest_vector(L: UnimodularLattice, *, budget: int = DEFAULT_BUDGET):
    """Sup-norm-shortest nonzero vector; ties broken lexicographically."""
    red = reduce_basis(L.basis)
    bound = min(max(abs(x) for x in r) for r in red.basis.rows)
    rho_sq = rat(L.dim) * bound * bound
    best = None
    for _, point in enumerate_ball(red.basis.rows, rho_sq, budget):
        key = (max(abs(x) for x in point), point)
        if best is None or key < best:
            best = key
    return best[1], best[0]


def haar_oracle(box: Box):
    """Mean number of nonzero lattice points in the box over Haar-random
    unimodular lattices: exactly the box volume (mean value theorem)."""
    return box.volume()


def mc_haar_oracle_2d(box: Box, samples: int, seed: int, *,
                      budget: int = DEFAULT_BUDGET) -> "ExperimentReport":
    """Independent Monte Carlo check of the 2d oracle: sample Haar on the
    space of unimodular planar lattices (fundamental-domain rejection with
    the hyperbolic weight, plus a uniform frame rotation) and average the
    box count."""
    rng = np.random.default_rng(seed)
    y_min = math.sqrt(3) / 2
    values = []
    for _ in range(samples):
        while True:
            x = rng.uniform(-0.5, 0.5)
            y = y_min / (1 - rng.uniform())
            if x * x + y * y >= 1:
                break
        theta = rng.uniform(0, 2 * math.pi)
        c, s = math.cos(theta), math.sin(theta)
        sy = math.sqrt(y)
        rows = [(1 / sy, 0.0), (x / sy, y / sy)]
        rot = [(rat(a * c - b * s), rat(a * s + b * c)) for a, b in rows]
        L = UnimodularLattice(Mat(rot))
        values.append(count_in_box(L, box, budget=budget))
    return _make_report("mc-haar-2d", values, oracle=float(box.volume()),
                        seed=seed, t=None, precision=None)


@dataclass(frozen=True)
class ExperimentReport:
    observable: str
    samples: int
    t: Optional[float]
    mean: float
    variance: float
    stderr: float
    oracle: Optional[float]
    deviation_sigmas: Optional[float]
    seed: Optional[int]
    precision: Optional[int]
    wall_time: float
    records: tuple = field(default=(), repr=False)

    def to_json(self) -> str:
        d = {k: getattr(self, k) for k in
             ("observable", "samples", "t", "mean", "variance", "stderr",
              "oracle", "deviation_sigmas", "seed", "precision", "wall_time")}
        return json.dumps(d, sort_keys=True)


def _make_report(name, values, *, oracle, seed, t, precision,
                 records=(), wall_time=0.0) -> ExperimentReport:
    m = len(values)
    mean = sum(values) / m
    var = (sum((v - mean) ** 2 for v in values) / (m - 1)) if m > 1 else 0.0
    stderr = math.sqrt(var / m) if m > 1 else 0.0
    dev = None
    if oracle is not None:
        dev = (mean - oracle) / stderr if stderr > 0 else math.inf * (
            1 if mean != oracle else 0)
        if mean == oracle:
            dev = 0.0
    return ExperimentReport(observable=name, samples=m, t=t, mean=mean,
                            variance=var, stderr=stderr, oracle=oracle,
                            deviation_sigmas=dev, seed=seed,
                            precision=precision, wall_time=wall_time,
                            records=tuple(records))


def _sample_point(body, seed: int, index: int) -> tuple:
    """Deterministic uniform sample from a product body, keyed by
    (seed, index) through a counter-based generator; the draw is converted
    to an exact dyadic rational."""
    gen = np.random.Generator(np.random.Philox(key=[seed, index]))
    return tuple(rat(float(gen.uniform(float(a), float(b))))
                 for a, b in body)


def shrinking_ball_average(c: CurveSpec, s, t, body, n_samples: int,
                           observable, seed: int, *,
                           budget: int = DEFAULT_BUDGET,
                           keep_records: bool = False) -> ExperimentReport:
    """Empirical mean of the observable over the flow-expanded translates of
    the shrinking ball s + C/t on the curve; paired with the Haar oracle.

    body: per-coordinate intervals of the convex neighborhood C of 0.
    observable: a Box (count observable) or the string "const".
    """
    t = rat(t)
    s = tuple(rat(x) for x in (s if isinstance(s, (tuple, list)) else (s,)))
    started = time.monotonic()
    if observable == "const":
        f = lambda L: 1
        name, oracle = "const", 1.0
    else:
        box = observable
        f = lambda L: count_in_box(L, box, budget=budget)
        name, oracle = f"count{[tuple(map(float, iv)) for iv in box.intervals]}", float(box.volume())
    a = DiagonalFlow(c.n, t)
    values = []
    records = []
    for idx in range(n_samples):
        eta = _sample_point(body, seed, idx)
        pt = tuple(x + e / t for x, e in zip(s, eta))
        # rows generate the lattice, so the translate a(t) Phi (a column
        # convention product) enters through its transpose
        basis = flow_apply(a, c.phi(pt)).transpose()
        v = f(UnimodularLattice(basis))
        values.append(v)
        if keep_records:
            records.append((idx, tuple(float(e) for e in eta), v))
    rep = _make_report(name, values, oracle=oracle, seed=seed, t=float(t),
                       precision=None, records=records,
                       wall_time=time.monotonic() - started)
    return rep


def trajectory_average(Q: Callable, x: UnimodularLattice, T, f: Callable,
                       grid: int = 1000, *, oracle=None,
                       name: str = "trajectory") -> ExperimentReport:
    """(1/T) integral of f(Q(t)x) dt by midpoint quadrature on the grid."""
    if grid < 1:
        raise DimensionMismatch("grid must be positive")
    T = rat(T)
    started = time.monotonic()
    q0 = Q(Rat(0))
    if q0 != Mat(tuple(tuple(Rat(1) if i == j else Rat(0)
                             for j in range(q0.dim)) for i in range(q0.dim))):
        raise DimensionMismatch("trajectory must start at the identity")
    values = []
    for i in range(grid):
        ti = T * Rat(2 * i + 1, 2 * grid)
        basis = x.basis * Q(ti).transpose()
        values.append(f(UnimodularLattice(basis)))
    return _make_report(name, values,
                        oracle=None if oracle is None else float(oracle),
                        seed=None, t=float(T), precision=None,
                        wall_time=time.monotonic() - started)
