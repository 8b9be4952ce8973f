"""Finite-n checks of the three divisibility constraints on eps sums.

* large primes: sum_{l <= n/p} eps_{lp} <= C/p for primes alpha_n < p <= n
* squarefree products d = p1...pk of distinct primes <= alpha_n, d <= n:
  sum_{l <= n/d} eps_{ld} <= D/n
* fixed prime p: the eps sum tends to 0 as n grows (observed as a trend)

All inequalities are tested with an absolute slack of ``SLACK``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Iterable, Optional, Sequence

from .errors import DomainError
from .families import FamilySpec, TruncatedPmf, make_pmf
from .primes import PrimeTable, alpha_n, sieve_primes

SLACK = 1e-12
DEFAULT_MAX_ENTRIES = 10**6
TREND_TOL = 1e-2
VERDICT_RULE = (
    "converging-to-zero: |value| strictly decreasing over the last three points "
    "(or already exactly zero) and |last| <= tol; nonvanishing: last three values "
    "within 10% of their nonzero mean; otherwise inconclusive"
)


@dataclass(frozen=True)
class C4Entry:
    p: int
    eps_sum: float
    bound: float
    passed: bool


@dataclass
class C4Report:
    n: int
    alpha: float
    C: float
    entries: list
    minimal_C: float
    all_primes: bool = False

    @property
    def failures(self) -> list:
        return [e for e in self.entries if not e.passed]

    @property
    def passed(self) -> bool:
        return not self.failures

    def rows(self):
        for e in self.entries:
            yield {"n": self.n, "d_or_p": e.p, "k": 1, "eps_sum": e.eps_sum,
                   "bound": e.bound, "pass": e.passed}

    def summary(self) -> dict:
        return {"n": self.n, "alpha": self.alpha, "C": self.C, "minimal_C": self.minimal_C,
                "primes_checked": len(self.entries), "failures": len(self.failures),
                "all_primes": self.all_primes}


@dataclass(frozen=True)
class C5Entry:
    d: int
    k: int
    factors: tuple
    eps_sum: float
    bound: float
    passed: bool


@dataclass
class C5Report:
    n: int
    alpha: float
    D: float
    max_k: int
    entries: list
    minimal_D: float
    truncated: bool
    capped: bool = False

    @property
    def failures(self) -> list:
        return [e for e in self.entries if not e.passed]

    @property
    def passed(self) -> bool:
        return not self.failures

    def rows(self):
        for e in self.entries:
            yield {"n": self.n, "d_or_p": e.d, "k": e.k, "eps_sum": e.eps_sum,
                   "bound": e.bound, "pass": e.passed}

    def summary(self) -> dict:
        return {"n": self.n, "alpha": self.alpha, "D": self.D, "max_k": self.max_k,
                "minimal_D": self.minimal_D, "divisors_checked": len(self.entries),
                "failures": len(self.failures), "truncated": self.truncated,
                "entry_cap_hit": self.capped}


@dataclass
class C6Trend:
    p: int
    schedule: list
    values: list
    tail_magnitude: float
    verdict: str
    tol: float = TREND_TOL
    rule: str = VERDICT_RULE

    def summary(self) -> dict:
        return asdict(self)


def _primes_for(n: int, primes: Optional[PrimeTable]) -> PrimeTable:
    if primes is None or primes.limit < n:
        return sieve_primes(n)
    return primes.upto(n)


def check_c4(pmf: TruncatedPmf, C: float = 1.0, *, all_primes: bool = False,
             primes: Optional[PrimeTable] = None) -> C4Report:
    """Large-prime bound: one entry per prime in (alpha_n, n].

    ``all_primes=True`` scans every prime <= n, for diagnostics only.
    """
    n = pmf.n
    if n < 3:
        raise DomainError(f"n must be >= 3, got {n}")
    alpha = alpha_n(n)
    ps = _primes_for(n, primes).primes.tolist()
    entries = []
    minimal = 0.0
    for p in ps:
        if not all_primes and p <= alpha:
            continue
        value = pmf.epsilon_multiple_sum(p)
        bound = C / p
        entries.append(C4Entry(p, value, bound, value <= bound + SLACK))
        minimal = max(minimal, p * value)
    return C4Report(n, alpha, float(C), entries, minimal, all_primes)


def squarefree_products(small_primes: Sequence[int], n: int, max_k: int,
                        max_entries: int = DEFAULT_MAX_ENTRIES):
    """Depth-first list of (d, factors) with d <= n a product of distinct primes.

    Returns ``(products, truncated, capped)``: ``truncated`` is set when some
    product with ``max_k`` factors could be extended without exceeding n, and
    ``capped`` when the entry cap stopped the walk.
    """
    ps = sorted(small_primes)
    out = []
    truncated = capped = False

    def walk(start, d, factors):
        nonlocal truncated, capped
        for idx in range(start, len(ps)):
            p = ps[idx]
            nd = d * p
            if nd > n:
                break
            if len(factors) == max_k:
                truncated = True
                return
            if len(out) >= max_entries:
                capped = True
                return
            f = factors + (p,)
            out.append((nd, f))
            walk(idx + 1, nd, f)
            if capped:
                return

    walk(0, 1, ())
    out.sort()
    return out, truncated or capped, capped


def check_c5(pmf: TruncatedPmf, D: float = 1.0, max_k: int = 4, *,
             max_entries: int = DEFAULT_MAX_ENTRIES,
             primes: Optional[PrimeTable] = None) -> C5Report:
    """Small-prime squarefree bound over products of at most ``max_k`` primes <= alpha_n."""
    n = pmf.n
    if n < 3:
        raise DomainError(f"n must be >= 3, got {n}")
    if max_k < 1:
        raise DomainError(f"max_k must be >= 1, got {max_k}")
    alpha = alpha_n(n)
    small = [p for p in _primes_for(n, primes).primes.tolist() if p <= alpha]
    products, truncated, capped = squarefree_products(small, n, max_k, max_entries)
    bound = D / n
    entries = []
    minimal = 0.0
    for d, factors in products:
        value = pmf.epsilon_multiple_sum(d)
        entries.append(C5Entry(d, len(factors), factors, value, bound, value <= bound + SLACK))
        minimal = max(minimal, n * value)
    return C5Report(n, alpha, float(D), max_k, entries, minimal, truncated, capped)


def trend_verdict(values: Sequence[float], tol: float = TREND_TOL) -> str:
    last = [abs(v) for v in values[-3:]]
    shrinking = all(b < a or b == 0.0 for a, b in zip(last, last[1:]))
    if shrinking and last[-1] <= tol:
        return "converging-to-zero"
    mean = math.fsum(values[-3:]) / 3.0
    if mean != 0.0 and all(abs(v - mean) <= 0.1 * abs(mean) for v in values[-3:]):
        return "nonvanishing"
    return "inconclusive"


def check_c6(spec: FamilySpec, p: int, schedule: Sequence[int], tol: float = TREND_TOL) -> C6Trend:
    """Trend of the eps sum at a fixed prime p along an increasing n schedule."""
    schedule = [int(n) for n in schedule]
    if len(schedule) < 3:
        raise DomainError(f"schedule needs at least 3 points, got {len(schedule)}")
    if any(b <= a for a, b in zip(schedule, schedule[1:])):
        raise DomainError(f"schedule must be strictly increasing: {schedule}")
    if schedule[0] < p:
        raise DomainError(f"every n must be >= p={p}")
    values = [make_pmf(spec, n).epsilon_multiple_sum(p) for n in schedule]
    return C6Trend(int(p), schedule, values, abs(values[-1]), trend_verdict(values, tol), tol)


@dataclass
class ScanPoint:
    j: object
    n: int
    minimal_C: float
    minimal_D: float
    c4_passed: Optional[bool]
    c5_passed: Optional[bool]
    c5_truncated: bool
    eps_sums: dict


@dataclass
class UniformScan:
    points: list
    sup_C: float
    sup_D: float
    C: Optional[float]
    D: Optional[float]
    dominated: Optional[bool]
    thresholds: dict
    limit_table: dict
    partial: bool = False
    notes: list = field(default_factory=list)

    def summary(self) -> dict:
        return {"sup_minimal_C": self.sup_C, "sup_minimal_D": self.sup_D,
                "C": self.C, "D": self.D, "dominated": self.dominated,
                "thresholds": {str(k): v for k, v in self.thresholds.items()},
                "partial": self.partial, "points": len(self.points)}


def uniform_scan(family: Callable[[object], FamilySpec], j_schedule: Iterable,
                 n_schedule: Iterable[int], max_k: int = 4, *, C: Optional[float] = None,
                 D: Optional[float] = None, trend_primes: Sequence[int] = (2,),
                 max_points: int = 10_000) -> UniformScan:
    """Run the large-prime and squarefree checks on a (j, n) grid.

    ``family(j)`` gives the j-th member of the sequence. Reports the sup of the
    minimal constants over the grid and, when C and D are given, whether that
    single pair covers every point. ``thresholds[n]`` is the first j (in
    schedule order) from which every later j passes at that n, i.e. the
    empirical index beyond which the uniform-in-j bounds hold; None if even
    the last j fails. ``limit_table[p][j]`` lists the eps sums at p along the
    n schedule; its last entry is the large-n proxy for the inner limit.
    """
    js = list(j_schedule)
    ns = [int(n) for n in n_schedule]
    if not js or not ns:
        raise DomainError("schedules must be nonempty")
    primes = sieve_primes(max(ns))
    points = []
    partial = False
    for j in js:
        spec = family(j)
        for n in ns:
            if len(points) >= max_points:
                partial = True
                break
            pmf = make_pmf(spec, n)
            r4 = check_c4(pmf, 1.0 if C is None else C, primes=primes)
            r5 = check_c5(pmf, 1.0 if D is None else D, max_k, primes=primes)
            sums = {p: pmf.epsilon_multiple_sum(p) for p in trend_primes if p <= n}
            points.append(ScanPoint(j, n, r4.minimal_C, r5.minimal_D,
                                    r4.passed if C is not None else None,
                                    r5.passed if D is not None else None,
                                    r5.truncated, sums))
    sup_C = max(pt.minimal_C for pt in points)
    sup_D = max(pt.minimal_D for pt in points)
    asserted = C is not None or D is not None
    dominated = None
    thresholds = {}
    if asserted:
        def ok(pt):
            return (pt.c4_passed is not False) and (pt.c5_passed is not False)

        dominated = all(ok(pt) for pt in points)
        for n in ns:
            row = [pt for pt in points if pt.n == n]
            first = None
            for idx in range(len(row) - 1, -1, -1):
                if not ok(row[idx]):
                    break
                first = row[idx].j
            thresholds[n] = first
    limit_table = {p: {} for p in trend_primes}
    for pt in points:
        for p, v in pt.eps_sums.items():
            limit_table[p].setdefault(pt.j, []).append(v)
    return UniformScan(points, sup_C, sup_D, C, D, dominated, thresholds, limit_table, partial)
