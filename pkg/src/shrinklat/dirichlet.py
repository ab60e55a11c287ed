"""Dirichlet-improvability scans: direct integer enumeration of the two
solvability conditions, the equivalent lattice-point criterion obtained by
scaling the associated lattice with the diagonal flow, exact minimal
improvement factors, and solvability densities along finite ranges of N.

Mode A asks for integers q (a vector) and p with
    |q . z - p| <= lambda / N^n  and  0 < max|q_i| <= lambda N;
mode B for integers q (a scalar) and p (a vector) with
    max|q z_i - p_i| <= lambda / N  and  0 < |q| <= lambda N^n.
Boundary equalities count as solvable (the inequalities are non-strict).
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Optional, Sequence

from .errors import BudgetExceeded, ConfigInvalid
from .lattices import (Box, DEFAULT_BUDGET, UnimodularLattice,
                       count_in_box_detail)
from .linalg import Mat
from .scalars import Rat, floor_rat, rat

ENUM_CAP = 10 ** 7


@dataclass(frozen=True)
class DirichletQuery:
    z: tuple
    N: int
    lam: object
    mode: str  # "A" or "B"

    def __post_init__(self):
        object.__setattr__(self, "z", tuple(rat(x) for x in self.z))
        object.__setattr__(self, "lam", rat(self.lam))
        if self.mode not in ("A", "B"):
            raise ConfigInvalid(f"mode must be A or B, got {self.mode!r}")
        if not (0 < self.lam <= 1):
            raise ConfigInvalid("lambda must lie in (0, 1]")
        if self.N < 1:
            raise ConfigInvalid("N must be >= 1")

    @property
    def n(self) -> int:
        return len(self.z)


def _nearest_int_error(x):
    """(p, |x - p|) with p the nearest integer to x."""
    p = floor_rat(x)
    below, above = x - p, p + 1 - x
    return (p, below) if below <= above else (p + 1, above)


def solvable_direct(q: DirichletQuery, *, cap: int = ENUM_CAP):
    """Decide by exhaustive integer enumeration; returns (flag, witness)."""
    z, N, lam, n = q.z, q.N, q.lam, q.n
    if q.mode == "A":
        qmax = floor_rat(lam * N)
        if (2 * qmax + 1) ** n > cap:
            raise BudgetExceeded("mode A enumeration range too large")
        err_bound = lam / Rat(N) ** n
        for vec in product(range(-qmax, qmax + 1), repeat=n):
            if all(v == 0 for v in vec):
                continue
            dot = sum(v * zi for v, zi in zip(vec, z))
            p, err = _nearest_int_error(dot)
            if err <= err_bound:
                return True, (vec, p)
        return False, None
    qmax = floor_rat(lam * Rat(N) ** n)
    if 2 * qmax > cap:
        raise BudgetExceeded("mode B enumeration range too large")
    err_bound = lam / N
    for qq in range(1, qmax + 1):
        for sign in (1, -1):
            qs = sign * qq
            ps, errs = zip(*(_nearest_int_error(qs * zi) for zi in z)) if z else ((), ())
            if max(errs) <= err_bound:
                return True, (qs, ps)
        # the two signs give mirrored errors; one check suffices, but the
        # second costs little and keeps the witness convention simple
    return False, None


def _dani_basis(z: tuple, mode: str) -> Mat:
    """Basis of the lattice of Diophantine error vectors.

    Mode A rows generate points (q.z - p, q_1, ..., q_n); mode B the
    transpose arrangement (q z_1 - p_1, ..., q z_n - p_n, q)."""
    n = len(z)
    if mode == "A":
        rows = [tuple([Rat(1)] + [Rat(0)] * n)]
        for i in range(n):
            rows.append(tuple([z[i]] + [Rat(1) if j == i else Rat(0)
                                        for j in range(n)]))
        return Mat(rows)
    rows = []
    for i in range(n):
        rows.append(tuple([Rat(-1) if j == i else Rat(0) for j in range(n)]
                          + [Rat(0)]))
    rows.append(tuple(list(z) + [Rat(1)]))
    return Mat(rows)


def solvable_lattice(q: DirichletQuery, *, budget: int = DEFAULT_BUDGET) -> bool:
    """The flow-scaled lattice criterion: solvable iff the scaled error
    lattice meets the lambda-cube in a point with nonzero q-part."""
    z, N, lam, n = q.z, q.N, q.lam, q.n
    basis = _dani_basis(z, q.mode)
    NN = Rat(N)
    if q.mode == "A":
        scale = tuple([NN ** n] + [1 / NN] * n)
        q_indices = range(1, n + 1)
    else:
        scale = tuple([NN] * n + [NN ** -n])
        q_indices = (n,)
    scaled = Mat(tuple(tuple(x * scale[j] for j, x in enumerate(r))
                       for r in basis.rows))
    cube = Box.cube(lam, n + 1)
    detail = count_in_box_detail(UnimodularLattice(scaled), cube,
                                 budget=budget, keep_points=True)
    for orig_coeffs, _ in detail.points:
        if any(orig_coeffs[i] != 0 for i in q_indices):
            return True
    return False


@dataclass(frozen=True)
class MinLambda:
    value: object
    boundary: bool  # the only witnesses sit exactly at lambda = 1
    witness: tuple


def min_lambda(z: Sequence, N: int, mode: str, *, cap: int = ENUM_CAP) -> MinLambda:
    """Exact smallest lambda in (0, 1] making the condition solvable:
    minimum over integer witnesses of the larger of their two constraint
    ratios. Dirichlet's theorem guarantees the result is <= 1."""
    z = tuple(rat(x) for x in z)
    n = len(z)
    NN = Rat(N)
    best = None
    if mode == "A":
        qmax = N  # lambda <= 1 forces max|q_i| <= N
        if (2 * qmax + 1) ** n > cap:
            raise BudgetExceeded("enumeration range too large")
        for vec in product(range(-qmax, qmax + 1), repeat=n):
            if all(v == 0 for v in vec):
                continue
            dot = sum(v * zi for v, zi in zip(vec, z))
            p, err = _nearest_int_error(dot)
            need = max(Rat(max(abs(v) for v in vec)) / NN, err * NN ** n)
            if best is None or need < best[0]:
                best = (need, (vec, p))
    elif mode == "B":
        qmax = N ** n
        if 2 * qmax > cap:
            raise BudgetExceeded("enumeration range too large")
        for qq in range(1, qmax + 1):
            ps, errs = zip(*(_nearest_int_error(qq * zi) for zi in z))
            need = max(Rat(qq) / NN ** n, max(errs) * NN)
            if best is None or need < best[0]:
                best = (need, (qq, ps))
    else:
        raise ConfigInvalid(f"mode must be A or B, got {mode!r}")
    value, witness = best
    if value > 1:
        raise BudgetExceeded(
            f"no witness at lambda <= 1 for z={z}, N={N} (violates Dirichlet)")
    return MinLambda(value=value, boundary=(value == 1), witness=witness)


@dataclass(frozen=True)
class DensityReport:
    z: tuple
    mode: str
    lam: object
    N_lo: int
    N_hi: int
    solvable: int
    total: int
    density: float
    unsolvable_witnesses: tuple  # up to 100 unsolvable N


def density_scan(z: Sequence, N_set: Sequence[int], lam, mode: str, *,
                 use_lattice: bool = True, keep: int = 100,
                 stop_after: Optional[int] = None) -> DensityReport:
    """Fraction of N in N_set for which the condition is solvable.

    A finite N_set is only the empirical shadow of the "infinitely many N"
    statements; the report keeps unsolvable witnesses for inspection.
    stop_after, when set, ends the scan early once that many unsolvable N
    have been found (the density then refers to the scanned prefix).
    """
    z = tuple(rat(x) for x in z)
    lam = rat(lam)
    N_list = sorted(set(int(N) for N in N_set))
    solv = 0
    total = 0
    witnesses = []
    for N in N_list:
        query = DirichletQuery(z=z, N=N, lam=lam, mode=mode)
        ok = (solvable_lattice(query) if use_lattice
              else solvable_direct(query)[0])
        total += 1
        if ok:
            solv += 1
        else:
            if len(witnesses) < keep:
                witnesses.append(N)
            if stop_after is not None and len(witnesses) >= stop_after:
                break
    return DensityReport(z=z, mode=mode, lam=lam, N_lo=N_list[0],
                         N_hi=N_list[len(N_list) - 1] if stop_after is None else N,
                         solvable=solv, total=total,
                         density=solv / total,
                         unsolvable_witnesses=tuple(witnesses))
