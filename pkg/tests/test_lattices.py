import math
import random
from itertools import product

import pytest
from conftest import random_unimodular

from shrinklat.curves import builtin_curves
from shrinklat.errors import (DimensionMismatch, EnumerationBudgetExceeded,
                              NotUnimodular)
from shrinklat.lattices import (Box, UnimodularLattice, count_in_box,
                                count_in_box_detail, enumerate_ball,
                                haar_oracle, mc_haar_oracle_2d,
                                shortest_vector, shrinking_ball_average,
                                trajectory_average)
from shrinklat.linalg import Mat, diag, identity
from shrinklat.scalars import Rat, rat


def test_box_basics():
    b = Box.cube(Rat(3, 2), 2)
    assert b.volume() == 9
    assert b.contains((Rat(1), Rat(-1)))
    assert not b.contains((Rat(2), Rat(0)))
    assert b.on_boundary((Rat(3, 2), Rat(0)))
    assert b.corner_radii() == (Rat(3, 2), Rat(3, 2))
    with pytest.raises(DimensionMismatch):
        Box(((Rat(1), Rat(1)),))


def test_unimodular_check():
    with pytest.raises(NotUnimodular):
        UnimodularLattice(diag((Rat(2), Rat(1))))
    UnimodularLattice(diag((Rat(2), Rat(1, 2))))  # det 1 is fine


def _brute_count(basis_rows, box, coeff_range):
    n = len(basis_rows)
    hits = 0
    for c in product(range(-coeff_range, coeff_range + 1), repeat=n):
        if all(x == 0 for x in c):
            continue
        pt = tuple(sum(c[k] * basis_rows[k][j] for k in range(n))
                   for j in range(n))
        hits += box.contains(pt)
    return hits


def test_count_matches_bruteforce_oracle():
    rng = random.Random(6)
    for _ in range(15):
        n = rng.choice([2, 3])
        # random unimodular integer basis: same lattice as Z^n
        b = random_unimodular(rng, n)
        box = Box.cube(Rat(rng.randint(2, 5), 2), n)
        got = count_in_box(UnimodularLattice(b), box)
        # Z^n oracle: integer points in the box, origin excluded
        r = box.intervals[0][1]
        want = _brute_count(identity(n).rows, box, int(r) + 1)
        assert got == want


def test_count_invariant_under_unimodular_change():
    rng = random.Random(13)
    basis = Mat([(Rat(1, 3), Rat(1, 5)), (Rat(0), Rat(3))])
    box = Box.cube(Rat(2), 2)
    base_count = count_in_box(UnimodularLattice(basis), box)
    for _ in range(10):
        u = random_unimodular(rng, 2)
        assert count_in_box(UnimodularLattice(u * basis), box) == base_count


def test_count_keep_points_coeffs_refer_to_original_basis():
    basis = Mat([(Rat(1), Rat(1, 2)), (Rat(0), Rat(1))])
    detail = count_in_box_detail(UnimodularLattice(basis),
                                 Box.cube(Rat(1), 2), keep_points=True)
    for coeffs, pt in detail.points:
        rebuilt = tuple(sum(coeffs[k] * basis.rows[k][j] for k in range(2))
                        for j in range(2))
        assert rebuilt == pt


def test_enumerate_ball_against_bruteforce():
    rows = ((Rat(1), Rat(1, 3)), (Rat(1, 2), Rat(2)))
    rho_sq = Rat(9)
    got = sorted(pt for _, pt in enumerate_ball(rows, rho_sq))
    want = []
    for c in product(range(-8, 9), repeat=2):
        if c == (0, 0):
            continue
        pt = tuple(c[0] * rows[0][j] + c[1] * rows[1][j] for j in range(2))
        if pt[0] ** 2 + pt[1] ** 2 <= rho_sq:
            want.append(pt)
    assert got == sorted(want)


def test_enumeration_budget():
    with pytest.raises(EnumerationBudgetExceeded):
        list(enumerate_ball(identity(2).rows, Rat(10 ** 6), budget=10))


def test_shortest_vector():
    L = UnimodularLattice(diag((Rat(1, 3), Rat(3))))
    v, norm = shortest_vector(L)
    assert norm == Rat(1, 3)
    assert v in ((Rat(1, 3), Rat(0)), (Rat(-1, 3), Rat(0)))


def test_haar_oracle_is_volume():
    box = Box.cube(Rat(5, 4), 3)
    assert haar_oracle(box) == box.volume()


def test_mc_haar_oracle_agrees_with_siegel():
    box = Box.cube(Rat(3, 2), 2)
    rep = mc_haar_oracle_2d(box, 800, seed=21)
    assert abs(rep.deviation_sigmas) < 4  # volume 9; generous 4 sigma gate


def test_const_observable_is_exactly_one():
    c = builtin_curves()["line"]
    rep = shrinking_ball_average(c, (Rat(1, 3),), Rat(50),
                                 ((Rat(-1), Rat(1)),), 40, "const", seed=0)
    assert rep.mean == 1.0
    assert rep.deviation_sigmas == 0.0


def test_shrinking_ball_deterministic():
    c = builtin_curves()["line"]
    box = Box.cube(Rat(1), 2)
    a = shrinking_ball_average(c, (rat(math.sqrt(2)),), Rat(100),
                               ((Rat(-1), Rat(1)),), 50, box, seed=7,
                               keep_records=True)
    b = shrinking_ball_average(c, (rat(math.sqrt(2)),), Rat(100),
                               ((Rat(-1), Rat(1)),), 50, box, seed=7,
                               keep_records=True)
    assert a.records == b.records
    assert a.mean == b.mean


def test_trajectory_average_requires_identity_start():
    L = UnimodularLattice(identity(2))
    bad_Q = lambda t: Mat([(Rat(2), Rat(0)), (Rat(0), Rat(1, 2))])
    with pytest.raises(DimensionMismatch):
        trajectory_average(bad_Q, L, Rat(10), lambda x: 1, grid=4)


def test_trajectory_average_constant_observable():
    from shrinklat.identity import correction_polynomial, solve_correction
    from shrinklat.curves import jet_at
    c = builtin_curves()["moment"]
    corr = solve_correction(jet_at(c, Rat(0)))
    L = UnimodularLattice(identity(3))
    rep = trajectory_average(lambda t: correction_polynomial(corr, t), L,
                             Rat(5), lambda x: 1, grid=16, oracle=1)
    assert rep.mean == 1.0
