"""Scalar backends: exact rationals (gmpy2.mpq) and arbitrary-precision floats (mpmath).

Exact rationals are the default for polynomial curve data; high-precision
floats are used for transcendental curves, with the mantissa sized so that the
large cancellations in the identity checks (terms of size t^(n+1) cancelling
down to O(1)) still leave a comfortable number of accurate bits.
"""

from __future__ import annotations

import math
from fractions import Fraction

import gmpy2
import mpmath
from gmpy2 import mpq

Rat = mpq

#: Guard bits left over after the worst expected cancellation.
GUARD_BITS = 64


def rat(x) -> mpq:
    """Coerce x to an exact rational.

    Accepts ints, strings like "3/4" or "-2", Fractions, floats (converted
    exactly, floats are dyadic), and mpmath.mpf (also exact).
    """
    if isinstance(x, mpq):
        return x
    if isinstance(x, (int, str, Fraction)):
        return mpq(x)
    if isinstance(x, float):
        n, d = x.as_integer_ratio()
        return mpq(n, d)
    if isinstance(x, mpmath.mpf):
        return mpf_to_rat(x)
    if isinstance(x, type(gmpy2.mpz(0))):
        return mpq(x)
    raise TypeError(f"cannot coerce {type(x).__name__} to rational")


def mpf_to_rat(x: mpmath.mpf) -> mpq:
    """Exact dyadic value of an mpmath float."""
    sign, man, exp, _ = x._mpf_
    if man == 0:
        if x == 0:
            return mpq(0)
        raise ValueError("cannot convert infinite/nan float to rational")
    q = mpq(man)
    q = q * mpq(2) ** exp if exp >= 0 else q / (mpq(2) ** (-exp))
    return -q if sign else q


def rat_to_mpf(q, prec: int) -> mpmath.mpf:
    """Round an exact rational to an mpf with the given mantissa bits."""
    with mpmath.workprec(prec):
        return mpmath.mpf(int(q.numerator)) / mpmath.mpf(int(q.denominator))


def is_rational(x) -> bool:
    return isinstance(x, (mpq, int))


def floor_rat(q) -> int:
    q = rat(q)
    return int(q.numerator // q.denominator)


def round_nearest(q) -> int:
    """Nearest integer to a rational; ties round toward +infinity."""
    return floor_rat(rat(q) + mpq(1, 2))


def auto_precision(n: int, t_max) -> int:
    """Mantissa bits needed for identity pipelines with flow parameter up to t_max.

    With t <= 10^T the cancelling terms reach size t^(n+1); we budget
    ceil(3.33*(n+2)*T) bits for them plus GUARD_BITS accurate bits.
    """
    T = max(1.0, math.log10(float(t_max)))
    return int(math.ceil(3.33 * (n + 2) * T)) + GUARD_BITS
