"""Randomized verification suites shared by the acceptance tests and the
`check` subcommand.

Each suite draws reproducible random cases, checks an exact property, and
returns a small report; a nonempty failure list means the property is broken,
never that the sampling was unlucky.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .curves import Jet, builtin_graphs
from .dirichlet import (DirichletQuery, density_scan, min_lambda,
                        solvable_direct, solvable_lattice)
from .errors import ConfigInvalid
from .identity import correction_polynomial, solve_correction
from .linalg import Mat, det, exact_inverse, identity, lower_shift
from .scalars import Rat
from .twisting import (check_twist_relations, jet_matrix, make_twisted,
                       radial_curve, random_rational_rotation, rotate)


@dataclass(frozen=True)
class SuiteReport:
    suite: str
    cases: int
    seed: int
    failures: tuple = field(default=())

    @property
    def ok(self) -> bool:
        return not self.failures


def _random_rat(rng, num=9, den=9):
    return Rat(rng.randint(-num, num), rng.randint(1, den))


def _random_invertible(rng, dim: int) -> Mat:
    while True:
        m = Mat(tuple(tuple(_random_rat(rng) for _ in range(dim))
                      for _ in range(dim)))
        if det(m) != 0:
            return m


def nilpotency_suite(cases: int, seed: int, *, n_max: int = 3,
                     t_draws: int = 20) -> SuiteReport:
    """Random nondegenerate jets: the direct solve equals the conjugation
    M^-1 S M, B^(n+1) = 0, B^n != 0, det(I - tB) = 1, all exact."""
    rng = random.Random(seed)
    failures = []
    for idx in range(cases):
        n = rng.randint(1, n_max)
        M = _random_invertible(rng, n + 1)
        j = Jet(s=Rat(0), n=n, rows=M, top_next=None, phi_matrix=None,
                backend="rational")
        corr = solve_correction(j)
        B = corr.B
        try:
            conj_ref = exact_inverse(M) * (lower_shift(n + 1) * M)
            if B != conj_ref:
                failures.append((idx, "direct != conjugation"))
                continue
            power = identity(n + 1)
            for _ in range(n):
                power = power * B
            if all(x == 0 for r in power.rows for x in r):
                failures.append((idx, "B^n = 0"))
                continue
            if any(x != 0 for r in (power * B).rows for x in r):
                failures.append((idx, "B^(n+1) != 0"))
                continue
            for _ in range(t_draws):
                t = _random_rat(rng, num=50, den=7)
                if det(identity(n + 1) - B.scale(t)) != 1:
                    failures.append((idx, f"det(I - tB) != 1 at t = {t}"))
                    break
                if det(correction_polynomial(corr, t)) != 1:
                    failures.append((idx, f"det P(t) != 1 at t = {t}"))
                    break
        except Exception as e:  # a raised invariant is a failure, not a crash
            failures.append((idx, f"{type(e).__name__}: {e}"))
    return SuiteReport("nilpotency", cases, seed, tuple(failures))


def twist_suite(rotations: int, seed: int, *,
                graph_names=("graph-quad-22", "graph-32")) -> SuiteReport:
    """Rational rotations on builtin graph forms: the structural derivative
    relations hold exactly, and a nondegenerate radial section forces
    det M(g) != 0."""
    graphs = builtin_graphs()
    rng = random.Random(seed)
    failures = []
    cases = 0
    for name in graph_names:
        g = graphs[name]
        for idx in range(rotations):
            cases += 1
            rot = random_rational_rotation(g.d, rng)
            tc = make_twisted(g, rot)
            try:
                check_twist_relations(tc)
            except Exception as e:
                failures.append(((name, idx), f"relations: {e}"))
                continue
            ge1 = rotate(rot, (Rat(1),) + (Rat(0),) * (g.d - 1))
            rho = radial_curve(g, ge1)
            radial_nondeg = det(Mat(rho.coeff_rows[:g.n + 1])) != 0
            if radial_nondeg and det(jet_matrix(tc)) == 0:
                failures.append(((name, idx), "radial nondegenerate but "
                                 "det M(g) = 0"))
    return SuiteReport("twist", cases, seed, tuple(failures))


def cross_oracle_suite(cases: int, seed: int, *, n_max: int = 2,
                       N_max: int = 50) -> SuiteReport:
    """solvable_direct and solvable_lattice must agree on every query."""
    rng = random.Random(seed)
    failures = []
    for idx in range(cases):
        n = rng.randint(1, n_max)
        z = tuple(_random_rat(rng, num=30, den=30) for _ in range(n))
        N = rng.randint(1, N_max)
        lam = Rat(rng.randint(1, 16), 16)
        mode = rng.choice(("A", "B"))
        q = DirichletQuery(z=z, N=N, lam=lam, mode=mode)
        d_flag = solvable_direct(q)[0]
        l_flag = solvable_lattice(q)
        if d_flag != l_flag:
            failures.append((idx, f"z={z} N={N} lam={lam} mode={mode}: "
                             f"direct={d_flag} lattice={l_flag}"))
    return SuiteReport("cross-oracle", cases, seed, tuple(failures))


def min_lambda_threshold_suite(cases: int, seed: int, *, n_max: int = 2,
                               N_max: int = 20) -> SuiteReport:
    """min_lambda is sharp: solvable at the threshold, unsolvable at any
    lambda strictly below it."""
    rng = random.Random(seed)
    failures = []
    for idx in range(cases):
        n = rng.randint(1, n_max)
        z = tuple(_random_rat(rng, num=30, den=30) for _ in range(n))
        N = rng.randint(1, N_max)
        mode = rng.choice(("A", "B"))
        ml = min_lambda(z, N, mode)
        at = solvable_direct(DirichletQuery(z=z, N=N, lam=ml.value,
                                            mode=mode))[0]
        if not at:
            failures.append((idx, f"unsolvable at threshold {ml.value}"))
            continue
        if ml.value > Rat(1, 10 ** 6):
            below = ml.value * Rat(999999, 1000000)
            if solvable_direct(DirichletQuery(z=z, N=N, lam=below,
                                              mode=mode))[0]:
                failures.append((idx, f"solvable below threshold {ml.value}"))
    return SuiteReport("min-lambda-threshold", cases, seed, tuple(failures))


def dirichlet_bound_suite(cases: int, seed: int, *, n_max: int = 2,
                          N_max: int = 20) -> SuiteReport:
    """Dirichlet's theorem: min_lambda <= 1 always (boundary allowed)."""
    rng = random.Random(seed)
    failures = []
    for idx in range(cases):
        n = rng.randint(1, n_max)
        z = tuple(_random_rat(rng, num=50, den=50) for _ in range(n))
        N = rng.randint(1, N_max)
        mode = rng.choice(("A", "B"))
        try:
            ml = min_lambda(z, N, mode)
        except Exception as e:
            failures.append((idx, f"{type(e).__name__}: {e}"))
            continue
        if ml.value > 1:
            failures.append((idx, f"min_lambda = {ml.value} > 1"))
    return SuiteReport("dirichlet-bound", cases, seed, tuple(failures))


def davenport_schmidt_suite(num_s: int, seed: int, *, lam=Rat(1, 4),
                            N_lo: int = 2, N_hi: int = 2000) -> SuiteReport:
    """Improvability along the parabola: for each random s in [1, 2] the
    mode A condition on (s, s^2) at lambda = 1/4 fails for at least one N
    in the scanned window (the finite shadow of "infinitely many N")."""
    rng = random.Random(seed)
    failures = []
    for idx in range(num_s):
        s = 1 + Rat(rng.randint(0, 2 ** 24), 2 ** 24)
        z = (s, s * s)
        rep = density_scan(z, range(N_lo, N_hi + 1), lam, "A", stop_after=1)
        if not rep.unsolvable_witnesses:
            failures.append((idx, f"s = {s}: solvable for every scanned N"))
    return SuiteReport("davenport-schmidt", num_s, seed, tuple(failures))


SUITES = {
    "nilpotency": nilpotency_suite,
    "twist": twist_suite,
    "cross-oracle": cross_oracle_suite,
    "min-lambda-threshold": min_lambda_threshold_suite,
    "dirichlet-bound": dirichlet_bound_suite,
    "davenport-schmidt": davenport_schmidt_suite,
}


def run_suite(name: str, cases: int, seed: int) -> SuiteReport:
    if name not in SUITES:
        raise ConfigInvalid(f"unknown suite {name!r}; options: {sorted(SUITES)}")
    return SUITES[name](cases, seed)
