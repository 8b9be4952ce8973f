"""Truncated distributions on [n] written as 1/n + eps_i.

Every family exposes its PMF as a read-only array plus the strided sums
sum_{l <= n/d} pmf(l*d) that the divisibility constraints are built from.
Families with a closed form for those sums (uniform, harmonic, zipf,
geometric, and the s = 1 edge of logzeta) use it; all others, and the
``generic=True`` path, sum the strided slice directly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import DomainError, PreconditionError
from .powersums import power_partial_sum
from .summation import csum

WEIGHT_TOL = 1e-12

KINDS = (
    "uniform", "harmonic", "zipf", "logarithmic", "geometric", "logzeta",
    "convex", "reflection", "zeroed", "pushforward", "custom",
)


def _is_prime(p: int) -> bool:
    if p < 2:
        return False
    return all(p % q for q in range(2, math.isqrt(p) + 1))


@dataclass(frozen=True)
class FamilySpec:
    """Which distribution, with its parameters.

    Use the classmethod constructors; ``kind`` selects which of the other
    fields are meaningful.
    """

    kind: str
    s: Optional[float] = None
    alpha: Optional[float] = None
    parts: tuple = ()
    base: Optional["FamilySpec"] = None
    primes: tuple = ()
    density: Optional[Callable] = field(default=None, compare=False)
    points_per_unit: int = 16

    def __post_init__(self):
        kind, s, alpha = self.kind, self.s, self.alpha
        if kind not in KINDS:
            raise DomainError(f"unknown family {kind!r}")
        if kind == "zipf" and not (s is not None and s > 0):
            raise DomainError(f"zipf needs s > 0, got s={s}")
        if kind in ("logarithmic", "geometric") and not (s is not None and 0 < s < 1):
            raise DomainError(f"{kind} needs 0 < s < 1, got s={s}")
        if kind == "logzeta":
            if not (s is not None and 0 < s <= 1):
                raise DomainError(f"logzeta needs 0 < s <= 1, got s={s}")
            if not (alpha is not None and alpha >= 1):
                raise DomainError(f"logzeta needs alpha >= 1, got alpha={alpha}")
        if kind == "convex":
            if not self.parts:
                raise DomainError("convex needs at least one part")
            weights = [w for w, _ in self.parts]
            if any(w < 0 for w in weights):
                raise DomainError(f"convex weights must be >= 0, got {weights}")
            if abs(math.fsum(weights) - 1.0) > WEIGHT_TOL:
                raise DomainError(f"convex weights must sum to 1, got {math.fsum(weights)!r}")
        if kind == "reflection" and self.base is None:
            raise DomainError("reflection needs a base family")
        if kind == "zeroed":
            if not self.primes:
                raise DomainError("zeroed needs a nonempty prime set")
            bad = [p for p in self.primes if not _is_prime(int(p))]
            if bad:
                raise DomainError(f"zeroed set contains non-primes {bad}")
        if kind == "pushforward":
            if self.density is None:
                raise DomainError("pushforward needs a density")
            k = self.points_per_unit
            if k < 16 or k % 2:
                raise DomainError(f"points_per_unit must be even and >= 16, got {k}")

    @classmethod
    def uniform(cls):
        return cls("uniform")

    @classmethod
    def harmonic(cls):
        return cls("harmonic")

    @classmethod
    def zipf(cls, s):
        return cls("zipf", s=float(s))

    @classmethod
    def logarithmic(cls, s):
        return cls("logarithmic", s=float(s))

    @classmethod
    def geometric(cls, s):
        return cls("geometric", s=float(s))

    @classmethod
    def logzeta(cls, s, alpha):
        return cls("logzeta", s=float(s), alpha=float(alpha))

    @classmethod
    def convex(cls, parts):
        return cls("convex", parts=tuple((float(w), spec) for w, spec in parts))

    @classmethod
    def reflection(cls, base):
        return cls("reflection", base=base)

    @classmethod
    def zeroed(cls, primes):
        return cls("zeroed", primes=tuple(sorted({int(p) for p in primes})))

    @classmethod
    def pushforward(cls, density, points_per_unit=16):
        return cls("pushforward", density=density, points_per_unit=int(points_per_unit))


class TruncatedPmf:
    """A PMF on {1, ..., n}; index i of ``values`` holds pmf(i + 1)."""

    def __init__(self, spec: FamilySpec, n: int, values=None, normalizer: float = 1.0,
                 closed: Optional[Callable[[int, int], float]] = None):
        self.spec = spec
        self.n = int(n)
        self.normalizer = normalizer
        self._closed = closed
        if values is not None:
            values = np.asarray(values, dtype=np.float64)
            values.flags.writeable = False
            self.__dict__["values"] = values

    @cached_property
    def values(self) -> np.ndarray:
        raise NotImplementedError

    @classmethod
    def from_values(cls, values, spec: Optional[FamilySpec] = None) -> "TruncatedPmf":
        values = np.array(values, dtype=np.float64)
        if values.ndim != 1 or values.size < 2:
            raise DomainError("need a 1-D array with at least 2 entries")
        if (values < 0).any():
            raise DomainError(f"negative mass at i={int(np.argmax(values < 0)) + 1}")
        if abs(csum(values) - 1.0) > 1e-9:
            raise DomainError(f"mass sums to {csum(values)!r}, not 1")
        return cls(spec or FamilySpec("custom"), values.size, values)

    def _check_index(self, i: int, what: str = "i") -> int:
        i = int(i)
        if not 1 <= i <= self.n:
            raise DomainError(f"{what}={i} outside [1, {self.n}]")
        return i

    def pmf(self, i: int) -> float:
        return float(self.values[self._check_index(i) - 1])

    def epsilon(self, i: int) -> float:
        return self.pmf(i) - 1.0 / self.n

    def epsilons(self) -> np.ndarray:
        return self.values - 1.0 / self.n

    def total(self) -> float:
        return csum(self.values)

    def multiple_pmf_sum(self, d: int, generic: bool = False) -> float:
        """sum over l <= n/d of pmf(l*d)."""
        d = self._check_index(d, "d")
        if self._closed is not None and not generic:
            return self._closed(d, self.n // d)
        return self._generic_multiple_sum(d)

    def _generic_multiple_sum(self, d: int) -> float:
        return csum(self.values[d - 1 :: d])

    def epsilon_multiple_sum(self, d: int, generic: bool = False) -> float:
        """sum over l <= n/d of eps(l*d), i.e. the multiple sum minus floor(n/d)/n."""
        return self.multiple_pmf_sum(d, generic) - (self.n // self._check_index(d, "d")) / self.n

    def __repr__(self):
        return f"TruncatedPmf({self.spec.kind}, n={self.n})"


class ConvexPmf(TruncatedPmf):
    """Weighted mixture; components stay intact so their closed forms still apply."""

    def __init__(self, parts: Sequence[tuple], spec: Optional[FamilySpec] = None):
        parts = [(float(w), p) for w, p in parts]
        ns = {p.n for _, p in parts}
        if len(ns) != 1:
            raise DomainError(f"convex parts must share n, got {sorted(ns)}")
        own = FamilySpec.convex([(w, p.spec) for w, p in parts])
        super().__init__(spec or own, ns.pop())
        self.parts = parts

    @cached_property
    def values(self) -> np.ndarray:
        out = np.zeros(self.n)
        for w, part in self.parts:
            if w:
                out += w * part.values
        out.flags.writeable = False
        return out

    def multiple_pmf_sum(self, d: int, generic: bool = False) -> float:
        d = self._check_index(d, "d")
        if generic:
            return self._generic_multiple_sum(d)
        return math.fsum(w * part.multiple_pmf_sum(d) for w, part in self.parts if w)


class ReflectedPmf(TruncatedPmf):
    """pmf*(i) = 1/n - eps_i, i.e. 2/n - pmf(i)."""

    def __init__(self, base: TruncatedPmf, spec: Optional[FamilySpec] = None):
        super().__init__(spec or FamilySpec.reflection(base.spec), base.n)
        self.base = base

    @cached_property
    def values(self) -> np.ndarray:
        out = 2.0 / self.n - self.base.values
        # rounding can dip below zero where the base sits at 2/n
        np.maximum(out, 0.0, out=out)
        out.flags.writeable = False
        return out

    def multiple_pmf_sum(self, d: int, generic: bool = False) -> float:
        d = self._check_index(d, "d")
        if generic:
            return self._generic_multiple_sum(d)
        return 2.0 * (self.n // d) / self.n - self.base.multiple_pmf_sum(d)


def _index_logs(n: int) -> np.ndarray:
    return np.log(np.arange(1, n + 1, dtype=np.float64))


def _power_weights(n: int, exponent: float, log_s: float = 0.0) -> np.ndarray:
    # s**i / i**exponent as exp(i ln s - exponent ln i)
    x = -exponent * _index_logs(n)
    if log_s:
        x += log_s * np.arange(1, n + 1, dtype=np.float64)
    return np.exp(x)


def _zipf_pmf(spec, n, s):
    weights = _power_weights(n, s)
    z = csum(weights)

    def closed(d, m):
        return power_partial_sum(m, s) / (math.exp(s * math.log(d)) * z)

    return TruncatedPmf(spec, n, weights / z, z, closed)


def _geometric_pmf(spec, n, s):
    log_s = math.log(s)
    # sum_{j<=n} s^j = s (1 - s^n) / (1 - s)
    z = s * math.expm1(n * log_s) / math.expm1(log_s)
    values = np.exp(log_s * np.arange(1, n + 1, dtype=np.float64)) / z

    def closed(d, m):
        if m == 0:
            return 0.0
        q_log = d * log_s
        return math.exp(q_log) * math.expm1(m * q_log) / math.expm1(q_log) / z

    return TruncatedPmf(spec, n, values, z, closed)


def make_pmf(spec: FamilySpec, n: int) -> TruncatedPmf:
    """Truncate ``spec`` to {1, ..., n} and normalize."""
    n = int(n)
    if n < 2:
        raise DomainError(f"n must be >= 2, got {n}")
    kind = spec.kind
    if kind == "uniform":
        return TruncatedPmf(spec, n, np.full(n, 1.0 / n), float(n), lambda d, m: m / n)
    if kind == "harmonic":
        return _zipf_pmf(spec, n, 1.0)
    if kind == "zipf":
        return _zipf_pmf(spec, n, spec.s)
    if kind == "geometric":
        return _geometric_pmf(spec, n, spec.s)
    if kind == "logarithmic":
        weights = _power_weights(n, 1.0, math.log(spec.s))
        z = csum(weights)
        return TruncatedPmf(spec, n, weights / z, z)
    if kind == "logzeta":
        if spec.s == 1.0:
            return _zipf_pmf(spec, n, spec.alpha)
        weights = _power_weights(n, spec.alpha, math.log(spec.s))
        z = csum(weights)
        return TruncatedPmf(spec, n, weights / z, z)
    if kind == "convex":
        return ConvexPmf([(w, make_pmf(part, n)) for w, part in spec.parts], spec)
    if kind == "reflection":
        return reflect(make_pmf(spec.base, n), spec)
    if kind == "zeroed":
        return zeroed_at_primes(n, spec.primes)
    if kind == "pushforward":
        return ceiling_pushforward(spec.density, n, spec.points_per_unit)
    raise DomainError(f"family {kind!r} cannot be built from a spec")


def epsilon(pmf: TruncatedPmf, i: int) -> float:
    return pmf.epsilon(i)


def multiple_pmf_sum(pmf: TruncatedPmf, d: int, generic: bool = False) -> float:
    return pmf.multiple_pmf_sum(d, generic)


def epsilon_multiple_sum(pmf: TruncatedPmf, d: int, generic: bool = False) -> float:
    return pmf.epsilon_multiple_sum(d, generic)


def convex_combine(parts) -> TruncatedPmf:
    """Mixture sum_k w_k * part_k of PMFs on the same [n]."""
    return ConvexPmf(parts)


def reflect(pmf: TruncatedPmf, spec: Optional[FamilySpec] = None) -> TruncatedPmf:
    """The PMF with every eps_i negated; needs |eps_i| <= 1/n everywhere."""
    if isinstance(pmf, ReflectedPmf):
        return pmf.base
    n = pmf.n
    eps = pmf.epsilons()
    over = np.abs(eps) > (1.0 / n) * (1.0 + 1e-12)
    if over.any():
        i = int(np.argmax(over)) + 1
        raise PreconditionError(
            f"reflection needs |eps_i| <= 1/n; eps_{i} = {eps[i - 1]!r} with 1/n = {1.0 / n!r}",
            witness=i,
        )
    return ReflectedPmf(pmf, spec)


def zeroed_at_primes(n: int, primes) -> TruncatedPmf:
    """Uniform on the integers in [n] that no prime in ``primes`` divides."""
    spec = FamilySpec.zeroed(primes)
    n = int(n)
    if n < 2:
        raise DomainError(f"n must be >= 2, got {n}")
    too_big = [p for p in spec.primes if p > n]
    if too_big:
        raise DomainError(f"primes {too_big} exceed n={n}")
    keep = np.ones(n, dtype=bool)
    for p in spec.primes:
        keep[p - 1 :: p] = False
    survivors = int(keep.sum())
    values = keep / float(survivors)
    return TruncatedPmf(spec, n, values, float(survivors))


def ceiling_pushforward(density, n: int, points_per_unit: int = 16) -> TruncatedPmf:
    """Law of ceil(X) for X with the given density on (0, n].

    ``density`` is either a vectorized callable or an array of shape
    (n, points_per_unit + 1) with samples at (i - 1) + j / points_per_unit,
    j = 0..points_per_unit, for each unit interval (i - 1, i]. A callable is
    sampled just right of each left endpoint, so jumps at integers are
    attributed to the correct interval. Each interval is integrated with
    composite Simpson.
    """
    n = int(n)
    k = int(points_per_unit)
    if n < 2:
        raise DomainError(f"n must be >= 2, got {n}")
    if k < 16 or k % 2:
        raise DomainError(f"points_per_unit must be even and >= 16, got {k}")
    if callable(density):
        offsets = np.arange(k + 1, dtype=np.float64) / k
        grid = np.arange(n, dtype=np.float64)[:, None] + offsets[None, :]
        grid[:, 0] = np.nextafter(grid[:, 0], np.inf)
        samples = np.asarray(density(grid), dtype=np.float64)
        samples = np.broadcast_to(samples, grid.shape)
        spec = FamilySpec.pushforward(density, k)
    else:
        samples = np.asarray(density, dtype=np.float64)
        if samples.shape != (n, k + 1):
            raise DomainError(f"density grid must have shape {(n, k + 1)}, got {samples.shape}")
        spec = FamilySpec("custom")
    if not np.isfinite(samples).all():
        raise DomainError("density has non-finite values")
    if (samples < 0).any():
        row, col = np.argwhere(samples < 0)[0]
        raise DomainError(f"negative density at t={row + col / k!r}")
    simpson = np.ones(k + 1)
    simpson[1:-1:2] = 4.0
    simpson[2:-1:2] = 2.0
    masses = samples @ (simpson / (3.0 * k))
    total = csum(masses)
    if not total > 0:
        raise DomainError("density has zero total mass")
    return TruncatedPmf(spec, n, masses / total, total)
