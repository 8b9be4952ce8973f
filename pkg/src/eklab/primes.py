"""Prime tables, distinct-prime-factor counts, and prime reciprocal sums."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DomainError, ResourceError
from .summation import csum

DEFAULT_MEMORY_BUDGET = 2 * 1024**3
SEGMENT_THRESHOLD = 10**7
DEFAULT_SEGMENT = 1 << 22
# primes below this are struck with strided slices; above it, by grouped
# fancy indexing over the multiplier l
SMALL_PRIME_LIMIT = 1 << 16


@dataclass(frozen=True)
class PrimeTable:
    limit: int
    primes: np.ndarray

    @property
    def count(self) -> int:
        return int(self.primes.size)

    def upto(self, bound: int) -> "PrimeTable":
        """Primes <= bound, as a new table (bound is clamped to ``limit``)."""
        bound = min(int(bound), self.limit)
        k = int(np.searchsorted(self.primes, bound, side="right"))
        return PrimeTable(max(bound, 1), self.primes[:k])

    def __len__(self):
        return self.count

    def __iter__(self):
        return iter(self.primes.tolist())


@dataclass(frozen=True)
class OmegaTable:
    """Per-integer count of distinct prime factors, optionally only p <= cutoff.

    ``counts`` has length ``limit + 1`` so that ``counts[m]`` is the value for
    ``m``; ``counts[0]`` is unused and zero.
    """

    limit: int
    cutoff: Optional[int]
    counts: np.ndarray

    def __getitem__(self, m):
        return self.counts[m]

    @property
    def values(self) -> np.ndarray:
        """Counts for 1..limit (a view)."""
        return self.counts[1:]


@dataclass(frozen=True)
class PrimeSums:
    cutoff: int
    b: float
    a2: float


def _check_budget(what: str, required: int, budget: Optional[int]) -> None:
    budget = DEFAULT_MEMORY_BUDGET if budget is None else budget
    if required > budget:
        raise ResourceError(what, required, budget)


def sieve_primes(limit: int, memory_budget: Optional[int] = None) -> PrimeTable:
    """All primes <= limit by an odd-only sieve of Eratosthenes."""
    limit = int(limit)
    if limit < 1:
        raise DomainError(f"limit must be >= 1, got {limit}")
    # odd flags + an upper estimate of the int64 prime list
    est_primes = int(1.3 * limit / math.log(limit)) + 10 if limit > 2 else 2
    _check_budget(f"prime sieve to {limit}", limit // 2 + 1 + 8 * est_primes, memory_budget)
    if limit < 2:
        return PrimeTable(limit, np.zeros(0, dtype=np.int64))
    # index i stands for 2*i + 1
    odd = np.ones((limit + 1) // 2, dtype=bool)
    odd[0] = False
    for i in range(1, (math.isqrt(limit) - 1) // 2 + 1):
        if odd[i]:
            p = 2 * i + 1
            odd[p * p // 2 :: p] = False
    primes = np.concatenate(([2], 2 * np.flatnonzero(odd) + 1)).astype(np.int64)
    primes.flags.writeable = False
    return PrimeTable(limit, primes)


def _strike_segment(lo: int, hi: int, small: np.ndarray, large: np.ndarray) -> np.ndarray:
    """Counts for integers in [lo, hi)."""
    seg = np.zeros(hi - lo, dtype=np.uint8)
    for p in small.tolist():
        start = -(-lo // p) * p
        if start < hi:
            seg[start - lo :: p] += 1
    if large.size:
        # a large prime p has multiple l*p in [lo, hi) iff lo/l <= p < hi/l
        for l in range(1, (hi - 1) // int(large[0]) + 1):
            a = np.searchsorted(large, -(-lo // l), side="left")
            b = np.searchsorted(large, (hi - 1) // l, side="right")
            if a < b:
                seg[large[a:b] * l - lo] += 1
    return seg


def build_omega_table(
    limit: int,
    cutoff: Optional[int] = None,
    *,
    primes: Optional[PrimeTable] = None,
    segment_size: Optional[int] = None,
    threads: int = 1,
    memory_budget: Optional[int] = None,
) -> OmegaTable:
    """Count distinct prime factors (only those <= cutoff, if given) of 1..limit.

    Every prime p <= min(cutoff, limit) adds one to each of its multiples.
    Limits above 10**7 are processed in independent segments; the result does
    not depend on the segmentation or the thread count.
    """
    limit = int(limit)
    if limit < 1:
        raise DomainError(f"limit must be >= 1, got {limit}")
    if cutoff is not None:
        cutoff = int(cutoff)
        if cutoff < 1:
            raise DomainError(f"cutoff must be >= 1, got {cutoff}")
    bound = limit if cutoff is None else min(cutoff, limit)
    _check_budget(f"omega table to {limit}", limit + 1 + limit // 2, memory_budget)

    if primes is None or primes.limit < bound:
        primes = sieve_primes(bound, memory_budget=memory_budget)
    ps = primes.upto(bound).primes
    split = int(np.searchsorted(ps, SMALL_PRIME_LIMIT, side="left"))
    small, large = ps[:split], ps[split:]

    if segment_size is None:
        segment_size = limit + 1 if limit <= SEGMENT_THRESHOLD else DEFAULT_SEGMENT
    counts = np.zeros(limit + 1, dtype=np.uint8)
    bounds = [(lo, min(lo + segment_size, limit + 1)) for lo in range(1, limit + 1, segment_size)]

    def work(span):
        lo, hi = span
        counts[lo:hi] = _strike_segment(lo, hi, small, large)

    if threads > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(work, bounds))
    else:
        for span in bounds:
            work(span)
    counts.flags.writeable = False
    return OmegaTable(limit, cutoff, counts)


def alpha_n(n) -> float:
    """The small/large prime threshold n**(1/log log n)."""
    if n <= 2:
        raise DomainError(f"alpha_n needs n >= 3 so that log log n > 0, got {n}")
    ln = math.log(n)
    return math.exp(ln / math.log(ln))


def small_prime_cutoff(n: int) -> int:
    """floor(alpha_n), clamped to n (alpha_n exceeds n for small n)."""
    return min(int(math.floor(alpha_n(n))), int(n))


def prime_reciprocal_sums(cutoff: int, primes: Optional[PrimeTable] = None) -> PrimeSums:
    """b = sum 1/p and a2 = sum (1/p)(1 - 1/p) over primes p <= cutoff."""
    cutoff = int(cutoff)
    if cutoff < 1:
        raise DomainError(f"cutoff must be >= 1, got {cutoff}")
    if primes is None or primes.limit < cutoff:
        primes = sieve_primes(cutoff)
    ps = primes.upto(cutoff).primes.astype(np.float64)
    if ps.size == 0:
        return PrimeSums(cutoff, 0.0, 0.0)
    return PrimeSums(cutoff, csum(1.0 / ps), csum((ps - 1.0) / (ps * ps)))
