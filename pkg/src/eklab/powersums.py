"""Partial sums of i**-s in O(1) time via Euler-Maclaurin."""

from __future__ import annotations

import math
from fractions import Fraction

_HEAD = 64
_TERMS = 6
# B_2k / (2k)! for k = 1..6
_BERNOULLI = [Fraction(1, 6), Fraction(-1, 30), Fraction(1, 42), Fraction(-1, 30),
              Fraction(5, 66), Fraction(-691, 2730)]
_COEF = [float(b / math.factorial(2 * k)) for k, b in enumerate(_BERNOULLI, start=1)]


def _head_sum(m: int, s: float) -> float:
    return math.fsum(math.exp(-s * math.log(i)) for i in range(1, m + 1))


def power_partial_sum(m: int, s: float) -> float:
    """sum_{i=1}^{m} i**(-s) for s > 0 and integer m >= 0.

    Exact summation for m < 64; beyond that the tail from 64 to m is the
    Euler-Maclaurin expansion with six Bernoulli corrections, whose
    truncation error is far below double precision for every s > 0.
    """
    m = int(m)
    if m <= 0:
        return 0.0
    if m < _HEAD:
        return _head_sum(m, s)
    a = _HEAD
    log_ratio = math.log(m / a)
    one_minus_s = 1.0 - s
    if one_minus_s == 0.0:
        integral = log_ratio
    else:
        integral = math.exp(one_minus_s * math.log(a)) * math.expm1(one_minus_s * log_ratio) / one_minus_s

    def f(t):
        return math.exp(-s * math.log(t))

    terms = [_head_sum(a - 1, s), integral, 0.5 * (f(a) + f(m))]
    # f^(j)(t) = (-1)^j (s)_j t^(-s-j), (s)_j the rising factorial
    rising = s
    for k, coef in enumerate(_COEF, start=1):
        j = 2 * k - 1
        if k > 1:
            rising *= (s + j - 2) * (s + j - 1)
        dm = -rising * math.exp(-(s + j) * math.log(m))
        da = -rising * math.exp(-(s + j) * math.log(a))
        terms.append(coef * (dm - da))
    return math.fsum(terms)


def harmonic_number(m: int) -> float:
    return power_partial_sum(m, 1.0)
