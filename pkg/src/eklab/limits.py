"""Sequence-indexed studies: prime zeta means, Zeta(1 + 1/a_j) schedules,
logarithmic dependence gaps, logzeta passage to the limit, and the
zeroed-at-a-prime negative control."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import mpmath
import numpy as np

from .constraints import SLACK, C6Trend, check_c4, check_c5, check_c6
from .errors import DomainError
from .families import FamilySpec, _is_prime, make_pmf
from .moments import mass_by_value, mean_omega, standardized_cdf
from .primes import OmegaTable, build_omega_table, sieve_primes
from .summation import csum

PRIME_ZETA_CUTOFF = 1000
DEFAULT_N_CAP = 10**7


def _mobius(k: int) -> int:
    result, m, q = 1, k, 2
    while q * q <= m:
        if m % q == 0:
            m //= q
            if m % q == 0:
                return 0
            result = -result
        q += 1
    return -result if m > 1 else result


def prime_zeta_tail_bound(cutoff: int, s: float) -> float:
    """Upper bound on sum_{p > cutoff} p**-s, from the integral of t**-s / ln t."""
    if s <= 1:
        raise DomainError(f"tail diverges for s <= 1, got s={s}")
    return cutoff ** (1.0 - s) / ((s - 1.0) * math.log(cutoff))


def prime_zeta_direct(s: float, cutoff: int):
    """(sum_{p <= cutoff} p**-s, bound on the omitted tail)."""
    ps = sieve_primes(cutoff).primes.astype(np.float64)
    return csum(np.exp(-s * np.log(ps))), prime_zeta_tail_bound(cutoff, s)


def prime_zeta(s: float, abs_tol: float = 1e-10, cutoff: int = PRIME_ZETA_CUTOFF) -> float:
    """P(s) = sum over primes of p**-s, for real s > 1, to within ``abs_tol``.

    The primes up to ``cutoff`` are summed directly. The remaining tail is
    P_N(s) = sum_k mu(k)/k * log zeta_N(k s), where zeta_N is zeta with its
    Euler factors for p <= cutoff removed; the k-series is cut once the bound
    |log zeta_N(t)| <= N**(1-t) / ((t-1)(1 - N**-t)) makes the rest negligible.
    """
    s = float(s)
    if not s > 1:
        raise DomainError(f"prime zeta diverges for s <= 1, got s={s}")
    if abs_tol < 1e-12:
        raise DomainError(f"abs_tol must be >= 1e-12, got {abs_tol}")
    N = int(cutoff)
    primes = sieve_primes(N).primes.tolist()
    with mpmath.workdps(40):
        head = mpmath.fsum(mpmath.power(p, -s) for p in primes)

        def log_zeta_tail(t):
            return mpmath.log(mpmath.zeta(t)) + mpmath.fsum(
                mpmath.log1p(-mpmath.power(p, -t)) for p in primes)

        def bound(t):
            return N ** (1.0 - t) / ((t - 1.0) * (1.0 - N ** (-t)))

        tail = mpmath.mpf(0)
        k = 1
        while True:
            t = k * s
            mu = _mobius(k)
            if mu:
                tail += mpmath.mpf(mu) / k * log_zeta_tail(t)
            # every later term is at most bound((k+1)s)/(k+1), shrinking geometrically
            rest = bound((k + 1) * s) / (k + 1) / (1.0 - N ** (-s))
            if rest < abs_tol * 1e-3:
                break
            k += 1
        return float(head + tail)


@dataclass
class SequencePoint:
    j: int
    s: float
    alpha: Optional[float]
    mu: float
    mu_kind: str
    n_j: int
    capped: bool
    minimal_C: Optional[float] = None
    minimal_D: Optional[float] = None
    eps_sum_p: Optional[float] = None
    ks: Optional[float] = None
    mean_ratio: Optional[float] = None
    mu_n: Optional[float] = None
    mean_gap: Optional[float] = None
    notes: list = field(default_factory=list)

    def row(self) -> dict:
        return {"j": self.j, "s": self.s, "alpha": self.alpha, "mu": self.mu,
                "n_j": self.n_j, "capped": self.capped, "minimal_C": self.minimal_C,
                "minimal_D": self.minimal_D, "eps_sum_p": self.eps_sum_p,
                "ks": self.ks, "mean_ratio": self.mean_ratio}


@dataclass
class SequenceStudy:
    p: int
    n_cap: int
    points: list

    def rows(self):
        return [pt.row() for pt in self.points]


def double_exp_n(mu: float, n_cap: int):
    """(max(floor(e^(e^mu)), 2) capped at n_cap, whether the cap applied)."""
    if math.exp(mu) >= math.log(n_cap):
        return int(n_cap), True
    return max(int(math.floor(math.exp(math.exp(mu)))), 2), False


def _study_point(point: SequencePoint, spec: FamilySpec, p: int, max_k: int) -> SequencePoint:
    n = point.n_j
    if n < 3:
        point.notes.append(f"n_j={n} < 3: log log n_j <= 0, checks skipped")
        return point
    pmf = make_pmf(spec, n)
    point.minimal_C = check_c4(pmf, 1.0).minimal_C
    point.minimal_D = check_c5(pmf, 1.0, max_k).minimal_D
    if p <= n:
        point.eps_sum_p = pmf.epsilon_multiple_sum(p)
    omega = build_omega_table(n)
    masses = mass_by_value(pmf, omega)
    point.ks = standardized_cdf(pmf, omega, masses=masses).ks
    lln = math.log(math.log(n))
    point.mu_n = mean_omega(pmf, omega, masses)
    point.mean_ratio = point.mu_n / lln
    point.mean_gap = point.mu / math.sqrt(lln) - math.sqrt(lln)
    return point


def zeta_sequence_study(a_schedule: Sequence[float], n_cap: int = DEFAULT_N_CAP,
                        p: int = 2, max_k: int = 4) -> SequenceStudy:
    """Zeta(1 + 1/a_j) along an increasing a schedule.

    mu_j is the prime zeta value at s_j (the mean of omega under the
    untruncated law) and n_j = max(floor(e^(e^mu_j)), 2), capped at n_cap.
    At each n_j the Zipf truncation is checked with C = D = 1, and the KS
    distance and mean ratio E_{n_j}(omega)/log log n_j are recorded.
    ``mean_gap`` is mu_j/sqrt(log log n_j) - sqrt(log log n_j).
    """
    a = [float(x) for x in a_schedule]
    if not a or any(x <= 0 for x in a) or any(y <= x for x, y in zip(a, a[1:])):
        raise DomainError(f"a schedule must be positive and increasing: {a}")
    if n_cap < 1000:
        raise DomainError(f"n_cap must be >= 1000, got {n_cap}")
    points = []
    for j, aj in enumerate(a, start=1):
        s = 1.0 + 1.0 / aj
        mu = prime_zeta(s, 1e-8)
        n, capped = double_exp_n(mu, n_cap)
        pt = SequencePoint(j, s, None, mu, "prime zeta", n, capped)
        points.append(_study_point(pt, FamilySpec.zipf(s), p, max_k))
    return SequenceStudy(p, int(n_cap), points)


@dataclass(frozen=True)
class DependenceGap:
    s: float
    p: int
    q: int
    marginal_p: float
    marginal_q: float
    joint: float

    @property
    def gap(self) -> float:
        return self.joint - self.marginal_p * self.marginal_q


def log_divisible_mass(s: float, d: int) -> float:
    """Mass of the multiples of d under the logarithmic law: (1/d) log(1 - s^d)/log(1 - s)."""
    return math.log1p(-(s**d)) / math.log1p(-s) / d


def log_dependence(s: float, p: int, q: int) -> DependenceGap:
    """Divisibility by p and by q under Logarithmic(s): marginals, joint, and the gap."""
    if not 0 < s < 1:
        raise DomainError(f"s must lie in (0, 1), got {s}")
    if not (_is_prime(p) and _is_prime(q)) or p == q:
        raise DomainError(f"p and q must be distinct primes, got {p}, {q}")
    return DependenceGap(float(s), int(p), int(q), log_divisible_mass(s, p),
                         log_divisible_mass(s, q), log_divisible_mass(s, p * q))


def logzeta_limit(s: float, alpha: float, p: int) -> Optional[float]:
    """n -> infinity limit of the eps sum at p for LZ(s, alpha); None at s = alpha = 1.

    For s = 1 this is p**-alpha - 1/p. For s < 1 both series converge
    geometrically and are summed until s**i/(1 - s) drops below 1e-18 of the total.
    """
    if s == 1.0:
        if alpha == 1.0:
            return None
        return p ** (-alpha) - 1.0 / p
    log_s = math.log(s)
    length = int(math.ceil((math.log(1e-18) + math.log1p(-s)) / log_s)) + 1
    i = np.arange(1, length + 1, dtype=np.float64)
    w = np.exp(i * log_s - alpha * np.log(i))
    return csum(w[p - 1 :: p]) / csum(w) - 1.0 / p


@dataclass
class LZPoint:
    s: float
    alpha: float
    n: int
    p: int
    eps_sum: float
    limit: Optional[float]
    bound_alpha: float
    bound_ok: bool
    ks: float
    truncated_mean: float
    mean_ratio: float

    def row(self) -> dict:
        return {"s": self.s, "alpha": self.alpha, "n": self.n, "p": self.p,
                "eps_sum_p": self.eps_sum, "limit": self.limit,
                "bound": self.bound_alpha, "bound_ok": self.bound_ok, "ks": self.ks,
                "truncated_mean": self.truncated_mean, "mean_ratio": self.mean_ratio}


def lz_limit_study(path: Sequence[tuple], n: int, p: int = 2,
                   omega: Optional[OmegaTable] = None) -> list:
    """Truncated logzeta laws along a path of (s, alpha) points.

    Records the eps sum at p, checks eps_sum <= p**-alpha <= 1/p, and the
    standardized KS distance. The mean of omega is the truncated mean at n
    (no closed form for the untruncated mean is used).
    """
    n = int(n)
    if n < 1000:
        raise DomainError(f"n must be >= 1000, got {n}")
    if omega is None:
        omega = build_omega_table(n)
    out = []
    for s, alpha in path:
        spec = FamilySpec.logzeta(s, alpha)
        pmf = make_pmf(spec, n)
        eps = pmf.epsilon_multiple_sum(p)
        bound = p ** (-spec.alpha)
        masses = mass_by_value(pmf, omega)
        mu_n = mean_omega(pmf, omega, masses)
        out.append(LZPoint(spec.s, spec.alpha, n, p, eps, logzeta_limit(spec.s, spec.alpha, p),
                           bound, eps <= bound + SLACK and bound <= 1.0 / p + SLACK,
                           standardized_cdf(pmf, omega, masses=masses).ks,
                           mu_n, mu_n / math.log(math.log(n))))
    return out


def nonexample_control(n_schedule: Sequence[int], p: int = 2) -> C6Trend:
    """Eps-sum trend at p for the PMF that zeroes the multiples of p; expected tail -1/p."""
    return check_c6(FamilySpec.zeroed([p]), p, n_schedule)
