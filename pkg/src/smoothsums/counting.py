"""Exact counts and enumeration of smooth and prime-window-restricted integers.

Two counting strategies back every operation:

* ``scan``       -- mark each n in [2, x] by repeated division with the
                    smallest-prime-factor table; best when the smooth numbers
                    are a noticeable fraction of [1, x].
* ``recursive``  -- depth-first generation over prime-exponent vectors with a
                    square-root tail shortcut; visits far fewer nodes than the
                    count itself when the smooth numbers are sparse.

``auto`` picks one from the estimated density.  Conventions, fixed module
wide: n = 1 is y-smooth for every y >= 2 and vacuously satisfies any
all-prime-factor window; largest-prime-factor windows exclude n = 1.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass

import numpy as np

from .errors import ResourceLimitError, ValidationError
from .primes import Factorization, PrimeTable

DEFAULT_NODE_BUDGET = 10**8
DEFAULT_ENUM_CAP = 10**7
_SCAN_BLOCK = 1 << 20
_SCAN_DENSITY_THRESHOLD = 0.05


@dataclass(frozen=True)
class SmoothQuery:
    """A counting query: how many n in (lower, x] have all prime factors in
    the window (prime_window, or (1, y] when no window is given)."""

    x: int
    y: int
    lower: int = 0
    prime_window: tuple[int, int] | None = None

    def __post_init__(self):
        if not (isinstance(self.x, int) and self.x >= 1):
            raise ValidationError(f"query x must be a positive integer, got {self.x!r}")
        if not (isinstance(self.y, int) and self.y >= 2):
            raise ValidationError(f"query y must be an integer >= 2, got {self.y!r}")
        if not (0 <= self.lower < self.x):
            raise ValidationError(f"query needs 0 <= lower < x, got lower={self.lower}, x={self.x}")
        if self.prime_window is not None:
            lo, hi = self.prime_window
            if not 1 <= lo < hi:
                raise ValidationError(f"prime window needs 1 <= lo < hi, got ({lo}, {hi})")

    @property
    def window(self) -> tuple[int, int]:
        return self.prime_window if self.prime_window is not None else (1, self.y)


class _Budget:
    """Shared node counter so one query cannot run away."""

    __slots__ = ("used", "cap")

    def __init__(self, cap: int):
        self.used = 0
        self.cap = cap

    def spend(self, k: int = 1) -> None:
        self.used += k
        if self.used > self.cap:
            raise ResourceLimitError(
                f"recursive node budget {self.cap} exceeded; use the scan strategy "
                "or raise node_budget"
            )


def _window_primes(table: PrimeTable, lo, hi) -> list[int]:
    if hi > table.limit:
        raise ValidationError(
            f"prime table limit {table.limit} does not cover window upper bound {hi}"
        )
    primes = table.primes
    a = int(np.searchsorted(primes, lo, side="right"))
    b = int(np.searchsorted(primes, hi, side="right"))
    return [int(p) for p in primes[a:b]]


def _count_leq_recursive(x: int, pl: list[int], budget: _Budget) -> int:
    """#{n <= x : every prime factor of n is in pl}; includes n = 1."""
    if x < 1:
        return 0
    k_total = len(pl)

    def rec(i: int, bound: int) -> int:
        budget.spend()
        total = 1  # the empty product
        j = i
        while j < k_total:
            p = pl[j]
            if p > bound:
                break
            if p * p > bound:
                # Remaining admissible n are the single primes in [p, bound].
                total += bisect_right(pl, bound, j) - j
                break
            pe = p
            while pe <= bound:
                total += rec(j + 1, bound // pe)
                pe *= p
            j += 1
        return total

    return rec(0, x)


def _scan_window_count(x: int, lo: int, hi: int, table: PrimeTable) -> int:
    """SPF-scan count of n <= x with all prime factors in (lo, hi]; includes n=1."""
    if x < 1:
        return 0
    if x > table.spf_limit:
        raise ResourceLimitError(
            f"scan strategy needs spf data up to {x} but the table stops at "
            f"{table.spf_limit}; use the recursive strategy"
        )
    spf = table.spf
    total = 1  # n = 1
    for start in range(2, x + 1, _SCAN_BLOCK):
        stop = min(start + _SCAN_BLOCK, x + 1)
        cur = np.arange(start, stop, dtype=np.int64)
        ok = np.ones(cur.size, dtype=bool)
        while True:
            active = cur > 1
            if not active.any():
                break
            p = spf[cur[active]].astype(np.int64)
            good = (p > lo) & (p <= hi)
            act_idx = np.nonzero(active)[0]
            bad_idx = act_idx[~good]
            ok[bad_idx] = False
            cur[bad_idx] = 1
            div_idx = act_idx[good]
            cur[div_idx] //= p[good]
        total += int(ok.sum())
    return total


def _plain_density_estimate(x: int, y: int, table: PrimeTable) -> float:
    from .saddle import ht_estimate

    try:
        return min(1.0, ht_estimate(x, y, table=table).value / x)
    except Exception:
        return 1.0  # fall back to scan-friendly assumption


def _count_window_leq(
    x: int,
    window: tuple[int, int],
    table: PrimeTable,
    strategy: str,
    node_budget: int,
) -> int:
    if x < 1:
        return 0
    lo, hi = window
    if strategy == "auto":
        plain = lo <= 1
        if plain and x <= table.spf_limit and x >= 16:
            density = _plain_density_estimate(x, min(hi, x), table)
            strategy = "scan" if density >= _SCAN_DENSITY_THRESHOLD else "recursive"
        elif x <= table.spf_limit and not plain:
            strategy = "recursive"  # windows are sparse almost always
        else:
            strategy = "recursive"
    if strategy == "scan":
        return _scan_window_count(x, lo, hi, table)
    if strategy == "recursive":
        pl = _window_primes(table, lo, min(hi, x))
        return _count_leq_recursive(x, pl, _Budget(node_budget))
    raise ValidationError(f"unknown strategy {strategy!r} (expected auto/scan/recursive)")


def psi_exact(
    query: SmoothQuery,
    table: PrimeTable,
    strategy: str = "auto",
    node_budget: int = DEFAULT_NODE_BUDGET,
) -> int:
    """Exact cardinality of {lower < n <= x : all prime factors in the window}.

    n = 1 counts whenever lower = 0.  Strategy limits raise
    ResourceLimitError suggesting the other strategy.
    """
    upper = _count_window_leq(query.x, query.window, table, strategy, node_budget)
    if query.lower == 0:
        return upper
    return upper - _count_window_leq(query.lower, query.window, table, strategy, node_budget)


def psi(x: int, y: int, table: PrimeTable, strategy: str = "auto") -> int:
    """Shorthand for the plain smooth count Psi(x, y)."""
    return psi_exact(SmoothQuery(x=x, y=y), table, strategy=strategy)


def enumerate_smooth(
    x: int,
    y: int,
    table: PrimeTable,
    prime_window: tuple[int, int] | None = None,
    sorted_output: bool = False,
    cap: int = DEFAULT_ENUM_CAP,
):
    """Yield each admissible n <= x exactly once as (n, Factorization).

    DFS order by default (deterministic); ``sorted_output`` materializes and
    sorts by n.  Raises ResourceLimitError once more than ``cap`` values were
    produced.
    """
    if not (isinstance(x, int) and x >= 1):
        raise ValidationError(f"enumerate_smooth needs integer x >= 1, got {x!r}")
    lo, hi = prime_window if prime_window is not None else (1, y)
    if not 1 <= lo < hi:
        raise ValidationError(f"prime window needs 1 <= lo < hi, got ({lo}, {hi})")
    pl = _window_primes(table, lo, min(hi, x))
    k_total = len(pl)

    def rec(i: int, bound: int, n: int, facs: tuple):
        yield n, Factorization(facs)
        for j in range(i, k_total):
            p = pl[j]
            if p > bound:
                break
            pe, e = p, 1
            while pe <= bound:
                yield from rec(j + 1, bound // pe, n * pe, facs + ((p, e),))
                pe *= p
                e += 1

    def stream():
        produced = 0
        for item in rec(0, x, 1, ()):
            produced += 1
            if produced > cap:
                raise ResourceLimitError(
                    f"enumeration cap {cap} exceeded at x={x}, y={y}; raise cap if intended"
                )
            yield item

    if sorted_output:
        return iter(sorted(stream(), key=lambda t: t[0]))
    return stream()


def count_restricted_interval(
    x: int,
    h: int,
    lo: int,
    hi: int,
    table: PrimeTable,
    strategy: str = "auto",
    node_budget: int = DEFAULT_NODE_BUDGET,
) -> int:
    """#{x < n <= x+h : p | n implies p in (lo, hi]}; n = 1 counts when x = 0."""
    if h < 1:
        raise ValidationError(f"interval length h must be >= 1, got {h}")
    if not 1 <= lo < hi:
        raise ValidationError(f"window needs 1 <= lo < hi, got ({lo}, {hi})")
    if x < 0:
        raise ValidationError(f"interval start must be >= 0, got {x}")
    upper = _count_window_leq(x + h, (lo, hi), table, strategy, node_budget)
    if x == 0:
        return upper
    return upper - _count_window_leq(x, (lo, hi), table, strategy, node_budget)


def psi_with_largest_prime_in(
    x: int,
    lo: int,
    hi: int,
    table: PrimeTable,
    strategy: str = "auto",
    node_budget: int = DEFAULT_NODE_BUDGET,
) -> int:
    """#{n <= x : P(n) in (lo, hi]} -- all other prime factors are then
    automatically below P(n).  Excludes n = 1 (it has no largest prime factor)."""
    if not 1 <= lo < hi:
        raise ValidationError(f"window needs 1 <= lo < hi, got ({lo}, {hi})")
    if x < 2:
        return 0
    if strategy == "scan" or (strategy == "auto" and x <= table.spf_limit and x <= 1 << 22):
        return _scan_largest_in(x, lo, hi, table)
    budget = _Budget(node_budget)
    total = 0
    for p in _window_primes(table, lo, min(hi, x)):
        sub = _window_primes(table, 1, p)
        total += _count_leq_recursive(x // p, sub, budget)
    return total


def _scan_largest_in(x: int, lo: int, hi: int, table: PrimeTable) -> int:
    if x > table.spf_limit:
        raise ResourceLimitError(
            f"scan strategy needs spf data up to {x} but the table stops at "
            f"{table.spf_limit}; use the recursive strategy"
        )
    spf = table.spf
    total = 0
    for start in range(2, x + 1, _SCAN_BLOCK):
        stop = min(start + _SCAN_BLOCK, x + 1)
        cur = np.arange(start, stop, dtype=np.int64)
        largest = np.ones(cur.size, dtype=np.int64)
        while True:
            active = cur > 1
            if not active.any():
                break
            idx = np.nonzero(active)[0]
            p = spf[cur[idx]].astype(np.int64)
            largest[idx] = np.maximum(largest[idx], p)
            cur[idx] //= p
        total += int(((largest > lo) & (largest <= hi)).sum())
    return total
