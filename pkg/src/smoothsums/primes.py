"""Prime enumeration, smallest-prime-factor tables, and exact factorization.

A :class:`PrimeTable` is built once and shared; it is immutable after
construction, so any number of concurrent readers is fine.  Prime enumeration
uses a segmented sieve with a fixed segment size; the optional SPF array is a
direct sieve and is what makes factorization and smooth scans O(log n) per
value.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass

import numpy as np

from .errors import ResourceLimitError, ValidationError

DEFAULT_SPF_CAP = 10**7
DEFAULT_PRIME_CAP = 10**9
SEGMENT_SIZE = 1 << 20

UINT64_MAX = 2**64 - 1


@dataclass(frozen=True)
class Factorization:
    """Ascending (prime, exponent) pairs; empty for n = 1."""

    entries: tuple[tuple[int, int], ...]

    def value(self) -> int:
        n = 1
        for p, e in self.entries:
            n *= p**e
        return n

    def largest_prime(self) -> int | None:
        return self.entries[-1][0] if self.entries else None

    def __iter__(self):
        return iter(self.entries)

    def __len__(self):
        return len(self.entries)


@dataclass(frozen=True)
class PrimeTable:
    """Primes up to ``limit`` plus an optional SPF array.

    ``primes`` is ascending and complete below ``limit``.  ``spf[n]`` is the
    smallest prime factor of n for 2 <= n <= spf_limit; ``spf_limit == 0``
    means the table was built without SPF data (prime enumeration only).
    """

    limit: int
    primes: np.ndarray
    spf: np.ndarray | None = None
    spf_limit: int = 0

    def prime_count(self) -> int:
        return int(self.primes.size)

    def primes_leq(self, y: int | float) -> np.ndarray:
        """View of all table primes <= y (y may exceed limit only if y >= limit)."""
        if y < 2:
            return self.primes[:0]
        return self.primes[: int(np.searchsorted(self.primes, y, side="right"))]

    def count_primes_in(self, lo: int | float, hi: int | float) -> int:
        """Number of table primes in the half-open window (lo, hi]."""
        a = int(np.searchsorted(self.primes, lo, side="right"))
        b = int(np.searchsorted(self.primes, hi, side="right"))
        return max(0, b - a)


def _simple_prime_mask(n: int) -> np.ndarray:
    """Boolean is-prime mask over [0, n]."""
    mask = np.ones(n + 1, dtype=bool)
    mask[:2] = False
    for p in range(2, math.isqrt(n) + 1):
        if mask[p]:
            mask[p * p :: p] = False
    return mask


def _segmented_primes(limit: int) -> np.ndarray:
    """All primes <= limit, ascending, via a segmented sieve."""
    root = math.isqrt(limit)
    base_mask = _simple_prime_mask(root)
    base = np.nonzero(base_mask)[0].astype(np.int64)
    if limit <= root:
        return base[base <= limit]

    chunks = [base]
    start = root + 1
    while start <= limit:
        stop = min(start + SEGMENT_SIZE, limit + 1)  # segment is [start, stop)
        seg = np.ones(stop - start, dtype=bool)
        for p in base:
            p = int(p)
            first = max(p * p, ((start + p - 1) // p) * p)
            if first < stop:
                seg[first - start :: p] = False
        chunks.append(np.nonzero(seg)[0].astype(np.int64) + start)
        start = stop
    return np.concatenate(chunks)


def _spf_array(n: int) -> np.ndarray:
    """spf[k] = smallest prime factor of k for 2 <= k <= n (spf[0]=0, spf[1]=1)."""
    dtype = np.int32 if n <= np.iinfo(np.int32).max else np.int64
    spf = np.zeros(n + 1, dtype=dtype)
    spf[2::2] = 2
    for p in range(3, math.isqrt(n) + 1, 2):
        if spf[p] == 0:
            block = spf[p * p :: 2 * p]  # odd multiples; even ones already have spf 2
            block[block == 0] = p
    untouched = spf == 0
    untouched[:2] = False
    spf[untouched] = np.nonzero(untouched)[0]
    spf[1] = 1
    return spf


def sieve(
    limit: int,
    want_spf: bool = True,
    spf_cap: int = DEFAULT_SPF_CAP,
    prime_cap: int = DEFAULT_PRIME_CAP,
) -> PrimeTable:
    """Build a PrimeTable up to ``limit``.

    With ``want_spf`` the SPF array covers [2, limit] and ``limit`` must stay
    below ``spf_cap``; without it only the prime list is built, capped at
    ``prime_cap``.  Deterministic for a given limit.
    """
    if not isinstance(limit, int) or limit < 2:
        raise ValidationError(f"sieve limit must be an integer >= 2, got {limit!r}")
    if limit > UINT64_MAX:
        raise ValidationError(f"sieve limit {limit} exceeds 64-bit range")
    if want_spf:
        if limit > spf_cap:
            raise ResourceLimitError(
                f"limit {limit} exceeds spf cap {spf_cap}; raise spf_cap or sieve with want_spf=False"
            )
    elif limit > prime_cap:
        raise ResourceLimitError(f"limit {limit} exceeds prime-only cap {prime_cap}")

    primes = _segmented_primes(limit)
    if want_spf:
        return PrimeTable(limit=limit, primes=primes, spf=_spf_array(limit), spf_limit=limit)
    return PrimeTable(limit=limit, primes=primes, spf=None, spf_limit=0)


def factorize(n: int, table: PrimeTable) -> Factorization:
    """Exact factorization of n.

    Uses the SPF walk for n <= spf_limit and trial division by table primes
    for n <= limit**2.  ``factorize(1)`` is the empty product.
    """
    if not isinstance(n, int) or n < 1:
        raise ValidationError(f"factorize expects a positive integer, got {n!r}")
    if n == 1:
        return Factorization(())
    if n > UINT64_MAX:
        raise ValidationError(f"factorize input {n} exceeds 64-bit range")

    entries: list[tuple[int, int]] = []
    if n <= table.spf_limit:
        spf = table.spf
        m = n
        while m > 1:
            p = int(spf[m])
            e = 0
            while m % p == 0:
                m //= p
                e += 1
            entries.append((p, e))
        entries.sort()
        return Factorization(tuple(entries))

    if n > table.limit * table.limit:
        raise ValidationError(
            f"factorize({n}) out of range: need n <= spf_limit ({table.spf_limit}) "
            f"or n <= limit^2 ({table.limit}^2)"
        )
    m = n
    for p in table.primes:
        p = int(p)
        if p * p > m:
            break
        if m % p == 0:
            e = 0
            while m % p == 0:
                m //= p
                e += 1
            entries.append((p, e))
    if m > 1:
        entries.append((m, 1))  # leftover is prime since m has no factor <= sqrt(n)
    return Factorization(tuple(entries))


def largest_prime_factor(n: int, table: PrimeTable) -> int | None:
    """P(n): largest prime factor; None for n = 1 (treated as y-smooth for all y)."""
    return factorize(n, table).largest_prime()
