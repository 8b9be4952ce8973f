"""Independent oracles shared by the test modules.

Nothing here imports eklab: trial division, exact rationals and mpmath are
the reference implementations the package is checked against.
"""

import itertools
import math
from fractions import Fraction

import mpmath


def trial_division_omega(m):
    count, q = 0, 2
    while q * q <= m:
        if m % q == 0:
            count += 1
            while m % q == 0:
                m //= q
        q += 1
    return count + (1 if m > 1 else 0)


def trial_primes(limit):
    return [q for q in range(2, limit + 1) if all(q % r for r in range(2, math.isqrt(q) + 1))]


def exact_weights(kind, n, s=None, alpha=None):
    """Unnormalized weights as Fractions (parameters must be exact rationals)."""
    if kind == "uniform":
        return [Fraction(1)] * n
    if kind == "harmonic":
        return [Fraction(1, i) for i in range(1, n + 1)]
    if kind == "zipf":
        return [Fraction(1, i**s) for i in range(1, n + 1)]
    if kind == "geometric":
        return [s**i for i in range(1, n + 1)]
    if kind == "logarithmic":
        return [s**i / i for i in range(1, n + 1)]
    if kind == "logzeta":
        return [s**i / Fraction(i**alpha) for i in range(1, n + 1)]
    raise ValueError(kind)


def exact_pmf(weights):
    z = sum(weights)
    return [w / z for w in weights]


def exact_multiple_sum(pmf, d):
    return sum(pmf[d - 1 :: d])


def mp_pmf(n, s, alpha=0.0, log_base=None, dps=40):
    """mpmath PMF proportional to base**i / i**s (base = 1 when None)."""
    with mpmath.workdps(dps):
        base = mpmath.mpf(1) if log_base is None else mpmath.mpf(log_base)
        w = [base**i / mpmath.power(i, s) for i in range(1, n + 1)]
        z = mpmath.fsum(w)
        return [x / z for x in w]


def enumerate_bernoulli_moments(primes, r_max):
    """E(S^r) by summing over all 2^k outcomes, in exact rationals."""
    out = [Fraction(0)] * r_max
    for bits in itertools.product((0, 1), repeat=len(primes)):
        prob = Fraction(1)
        for b, p in zip(bits, primes):
            prob *= Fraction(1, p) if b else 1 - Fraction(1, p)
        total = sum(bits)
        for r in range(1, r_max + 1):
            out[r - 1] += prob * total**r
    return out


def erf_series_cdf(x, dps=40):
    """Phi(x) from the Maclaurin series of erf, summed in mpmath."""
    with mpmath.workdps(dps):
        z = mpmath.mpf(x) / mpmath.sqrt(2)
        term, total, k = z, mpmath.mpf(0), 0
        while True:
            add = term / (2 * k + 1)
            total += add
            if abs(add) < mpmath.mpf(10) ** (-dps + 5):
                break
            k += 1
            term *= -z * z / k
        return float(mpmath.mpf(1) / 2 + total / mpmath.sqrt(mpmath.pi))


def log_series_mass(s, d, terms=None):
    """Sum_l (-1/ln(1-s)) s^(dl)/(dl) by direct series summation in mpmath."""
    with mpmath.workdps(40):
        s = mpmath.mpf(s)
        c = -1 / mpmath.log(1 - s)
        return float(c * mpmath.nsum(lambda l: s ** (d * l) / (d * l), [1, mpmath.inf]))


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
