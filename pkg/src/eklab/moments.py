"""Moments of the independent Bernoulli model versus weighted moments of g_n,
and the standardized distribution of omega compared with the normal law."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from .errors import DomainError
from .families import FamilySpec, TruncatedPmf, make_pmf
from .primes import (OmegaTable, PrimeTable, alpha_n, build_omega_table,
                     prime_reciprocal_sums, sieve_primes, small_prime_cutoff)
from .summation import csum

R_MAX = 16
_SQRT2 = math.sqrt(2.0)


def normal_cdf(x: float) -> float:
    """Standard normal CDF, via the complementary error function."""
    return 0.5 * math.erfc(-x / _SQRT2)


def _check_r(r_max: int) -> int:
    r_max = int(r_max)
    if not 1 <= r_max <= R_MAX:
        raise DomainError(f"r_max must lie in [1, {R_MAX}], got {r_max}")
    return r_max


def bernoulli_model_moments(primes: Iterable[int], r_max: int) -> list:
    """E(S^r), r = 1..r_max, for S = sum of independent X_p with P(X_p = 1) = 1/p.

    Adds one prime at a time: E((S+X)^r) = E(S^r) + (1/p) sum_{k<r} C(r,k) E(S^k),
    since every positive power of a 0/1 variable has mean 1/p.
    """
    r_max = _check_r(r_max)
    binom = [[math.comb(r, k) for k in range(r + 1)] for r in range(r_max + 1)]
    m = [1.0] + [0.0] * r_max
    for p in primes:
        inv = 1.0 / int(p)
        new = [1.0]
        for r in range(1, r_max + 1):
            cross = math.fsum(binom[r][k] * m[k] for k in range(r))
            new.append(math.fsum((m[r], inv * cross)))
        m = new
    return m[1:]


def mass_by_value(pmf: TruncatedPmf, table: OmegaTable) -> np.ndarray:
    """mass[w] = total pmf mass on integers m with table[m] == w."""
    if table.limit != pmf.n:
        raise DomainError(f"table limit {table.limit} != pmf n {pmf.n}")
    counts = table.values
    values = pmf.values
    top = int(counts.max()) if counts.size else 0
    return np.array([csum(values[counts == w]) for w in range(top + 1)])


def weighted_g_moments(pmf: TruncatedPmf, g: OmegaTable, r_max: int,
                       masses: Optional[np.ndarray] = None) -> list:
    """E_n(g^r) = sum_m pmf(m) g(m)^r for r = 1..r_max."""
    r_max = _check_r(r_max)
    if masses is None:
        masses = mass_by_value(pmf, g)
    return [math.fsum(float(mass) * w**r for w, mass in enumerate(masses)) for r in range(1, r_max + 1)]


@dataclass
class MomentTable:
    n: int
    cutoff: int
    alpha: float
    b: float
    a2: float
    model_moments: list
    weighted_moments: list
    gaps: list
    prime_count: int

    @property
    def orders(self):
        return list(range(1, len(self.gaps) + 1))

    @property
    def b_le_alpha(self) -> bool:
        return self.b <= self.alpha

    def rows(self):
        for r, em, ew, gap in zip(self.orders, self.model_moments, self.weighted_moments, self.gaps):
            yield {"n": self.n, "cutoff": self.cutoff, "r": r, "model": em,
                   "weighted": ew, "gap": gap}


def moment_table(pmf: TruncatedPmf, r_max: int, primes: Optional[PrimeTable] = None,
                 g: Optional[OmegaTable] = None) -> MomentTable:
    n = pmf.n
    cutoff = small_prime_cutoff(n)
    if primes is None or primes.limit < cutoff:
        primes = sieve_primes(cutoff)
    small = primes.upto(cutoff)
    if g is None:
        g = build_omega_table(n, cutoff, primes=small)
    elif g.cutoff != cutoff:
        raise DomainError(f"g table has cutoff {g.cutoff}, expected {cutoff}")
    model = bernoulli_model_moments(small, r_max)
    weighted = weighted_g_moments(pmf, g, r_max)
    sums = prime_reciprocal_sums(cutoff, small)
    gaps = [abs(a - b) for a, b in zip(model, weighted)]
    return MomentTable(n, cutoff, alpha_n(n), sums.b, sums.a2, model, weighted, gaps, small.count)


def moment_gap_study(spec: FamilySpec, n_schedule: Sequence[int], r_max: int = 3) -> list:
    """One MomentTable per n, with g_n counting primes <= floor(alpha_n)."""
    ns = [int(n) for n in n_schedule]
    if any(b <= a for a, b in zip(ns, ns[1:])):
        raise DomainError(f"schedule must be increasing: {ns}")
    r_max = _check_r(r_max)
    primes = sieve_primes(max(small_prime_cutoff(n) for n in ns))
    return [moment_table(make_pmf(spec, n), r_max, primes) for n in ns]


def ks_distance(xs: Sequence[float], masses: Sequence[float],
                ref: Callable[[float], float] = normal_cdf,
                ref_left: Optional[Callable[[float], float]] = None) -> float:
    """sup_x |F(x) - G(x)| for the step CDF F with atoms ``masses`` at sorted ``xs``.

    The sup is attained at a jump, from the left or the right; ``ref_left``
    gives G(x-) when G itself jumps (defaults to G).
    """
    ref_left = ref_left or ref
    cum = 0.0
    worst = 0.0
    for x, m in zip(xs, masses):
        before = cum
        cum = before + m
        worst = max(worst, abs(cum - ref(x)), abs(before - ref_left(x)))
    return worst


@dataclass
class StandardizedStudy:
    n: int
    center: float
    scale: float
    mode: str
    values: list  # attained omega values
    masses: list
    xs: list
    cdf: list
    ks: float
    notes: list = field(default_factory=list)

    def rows(self):
        for x, f in zip(self.xs, self.cdf):
            phi = normal_cdf(x)
            yield {"x": x, "empirical_cdf": f, "normal_cdf": phi, "diff": f - phi}


def standardized_cdf(pmf: TruncatedPmf, omega: OmegaTable, mode: str = "loglog",
                     masses: Optional[np.ndarray] = None) -> StandardizedStudy:
    """CDF of (omega - center)/scale under ``pmf`` and its KS distance to the normal.

    mode ``"loglog"`` centers and scales by log log n; mode ``"model"`` uses
    the Bernoulli model's mean b and standard deviation sqrt(a2) over primes
    <= floor(alpha_n) (pair it with a g_n table for the statistic the moment
    argument controls).
    """
    n = pmf.n
    if n < 3:
        raise DomainError(f"n must be >= 3, got {n}")
    if omega.limit != n:
        raise DomainError(f"omega table limit {omega.limit} != pmf n {n}")
    if mode == "loglog":
        center = math.log(math.log(n))
        scale = math.sqrt(center)
    elif mode == "model":
        sums = prime_reciprocal_sums(small_prime_cutoff(n))
        if sums.a2 <= 0:
            raise DomainError(f"model variance is zero at n={n}")
        center, scale = sums.b, math.sqrt(sums.a2)
    else:
        raise DomainError(f"unknown centering mode {mode!r}")
    if masses is None:
        masses = mass_by_value(pmf, omega)
    ws = [w for w, m in enumerate(masses) if m > 0]
    ms = [float(masses[w]) for w in ws]
    xs = [(w - center) / scale for w in ws]
    cdf = np.cumsum(ms).tolist()
    ks = ks_distance(xs, ms)
    return StandardizedStudy(n, center, scale, mode, ws, ms, xs, cdf, ks)


def mean_omega(pmf: TruncatedPmf, omega: OmegaTable, masses: Optional[np.ndarray] = None) -> float:
    if masses is None:
        masses = mass_by_value(pmf, omega)
    return math.fsum(w * float(m) for w, m in enumerate(masses))


def mean_ratio(pmf: TruncatedPmf, omega: OmegaTable, masses: Optional[np.ndarray] = None) -> float:
    """E_n(omega) / log log n."""
    n = pmf.n
    if n < 3:
        raise DomainError(f"n must be >= 3, got {n}")
    return mean_omega(pmf, omega, masses) / math.log(math.log(n))


def write_gnuplot(csv_path, script_path, title: str = "") -> Path:
    """Plain-text gnuplot script plotting empirical vs normal CDF from a CDF CSV."""
    csv_path, script_path = Path(csv_path), Path(script_path)
    script = "\n".join([
        "set datafile separator ','",
        "set key left top",
        f"set title '{title}'",
        "set xlabel 'standardized omega'",
        "set ylabel 'CDF'",
        f"plot '{csv_path.name}' using 1:2 skip 1 with steps title 'empirical', \\",
        f"     '{csv_path.name}' using 1:3 skip 1 with linespoints title 'normal'",
        "",
    ])
    script_path.write_text(script)
    return script_path
