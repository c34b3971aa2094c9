import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from smoothsums import (
    ResourceLimitError,
    SmoothQuery,
    ValidationError,
    count_restricted_interval,
    enumerate_smooth,
    psi,
    psi_exact,
    psi_with_largest_prime_in,
    sieve,
)


def oracle_max_prime(n):
    """Largest prime factor by plain trial division (independent of the library)."""
    best = 1
    d = 2
    while d * d <= n:
        while n % d == 0:
            best = max(best, d)
            n //= d
        d += 1
    if n > 1:
        best = max(best, n)
    return best


def oracle_all_factors_in(n, lo, hi):
    if n == 1:
        return True
    d = 2
    while d * d <= n:
        if n % d == 0:
            if not (lo < d <= hi):
                return False
            while n % d == 0:
                n //= d
        d += 1
    return n == 1 or lo < n <= hi


def oracle_psi(x, y, lower=0):
    return sum(1 for n in range(max(1, lower + 1), x + 1) if oracle_max_prime(n) <= y or n == 1)


def test_psi_examples(table):
    assert psi_exact(SmoothQuery(x=10, y=10), table) == 10
    assert psi_exact(SmoothQuery(x=100, y=3), table) == 20
    assert psi_exact(SmoothQuery(x=10, y=2), table) == 4


def test_psi_oracle_brute_force(table):
    # direct enumeration oracle: 2^a 3^b <= 100 gives exactly 20 values
    vals = sorted(2**a * 3**b for a in range(8) for b in range(5) if 2**a * 3**b <= 100)
    assert len(vals) == 20
    rng = np.random.default_rng(3)
    for _ in range(25):
        x = int(rng.integers(2, 3000))
        y = int(rng.integers(2, 60))
        assert psi_exact(SmoothQuery(x=x, y=y), table) == oracle_psi(x, y)


def test_psi_floor_when_y_geq_x(table):
    for x in (1, 2, 17, 240, 999):
        assert psi_exact(SmoothQuery(x=x, y=max(2, x)), table) == x


def test_strategies_agree(table):
    rng = np.random.default_rng(11)
    for _ in range(40):
        x = int(rng.integers(10, 10**5))
        y = int(rng.integers(2, x + 1))
        q = SmoothQuery(x=x, y=y)
        assert psi_exact(q, table, strategy="scan") == psi_exact(q, table, strategy="recursive")


def test_interval_additivity(table):
    a, b, c = 100, 5000, 40000
    y = 17
    left = psi_exact(SmoothQuery(x=b, y=y, lower=a), table)
    right = psi_exact(SmoothQuery(x=c, y=y, lower=b), table)
    assert psi_exact(SmoothQuery(x=c, y=y, lower=a), table) == left + right


@settings(max_examples=40, deadline=None)
@given(
    st.integers(min_value=2, max_value=2000),
    st.integers(min_value=2, max_value=2000),
    st.integers(min_value=2, max_value=50),
)
def test_psi_monotone(x1, x2, y):
    table = sieve(5000)
    lo, hi = sorted((x1, x2))
    assert psi(lo, y, table) <= psi(hi, y, table)
    assert psi(hi, y, table) <= psi(hi, min(y + 3, hi), table) if y + 3 <= hi else True


def test_enumerate_examples(table):
    assert sorted(n for n, _ in enumerate_smooth(10, 2, table)) == [1, 2, 4, 8]
    assert sorted(n for n, _ in enumerate_smooth(5, 5, table)) == [1, 2, 3, 4, 5]


def test_enumerate_matches_count_and_factors(table):
    got = list(enumerate_smooth(10**4, 20, table))
    assert len(got) == psi_exact(SmoothQuery(x=10**4, y=20), table)
    seen = {n for n, _ in got}
    assert len(seen) == len(got)
    for n, fact in got[:200]:
        assert fact.value() == n
        assert all(p <= 20 for p, _ in fact.entries)


def test_enumerate_sorted_flag_and_cap(table):
    ordered = [n for n, _ in enumerate_smooth(300, 5, table, sorted_output=True)]
    assert ordered == sorted(ordered)
    with pytest.raises(ResourceLimitError, match="cap"):
        list(enumerate_smooth(10**4, 20, table, cap=10))


def test_count_restricted_interval(table):
    assert count_restricted_interval(0, 30, 3, 10, table) == 4  # {1, 5, 7, 25}
    assert count_restricted_interval(0, 10, 1, 10, table) == 10
    assert count_restricted_interval(10, 10, 3, 10, table) == 0
    rng = np.random.default_rng(5)
    for _ in range(15):
        x = int(rng.integers(0, 2000))
        h = int(rng.integers(1, 500))
        lo = int(rng.integers(1, 12))
        hi = lo + int(rng.integers(1, 40))
        expect = sum(1 for n in range(x + 1, x + h + 1) if oracle_all_factors_in(n, lo, hi))
        assert count_restricted_interval(x, h, lo, hi, table) == expect


def test_psi_with_largest_prime_in(table):
    assert psi_with_largest_prime_in(20, 2, 3, table) == 5  # {3, 6, 9, 12, 18}
    assert psi_with_largest_prime_in(10, 1, 2, table) == 3  # {2, 4, 8}
    for x in (5, 50, 100):
        assert psi_with_largest_prime_in(x, 1, x, table) == x - 1
    # scan and recursive agree, including windows not anchored at 1
    for lo, hi, x in [(3, 7, 500), (10, 97, 4000), (1, 13, 2500)]:
        a = psi_with_largest_prime_in(x, lo, hi, table, strategy="scan")
        b = psi_with_largest_prime_in(x, lo, hi, table, strategy="recursive")
        expect = sum(1 for n in range(2, x + 1) if lo < oracle_max_prime(n) <= hi)
        assert a == b == expect


def test_query_validation():
    with pytest.raises(ValidationError):
        SmoothQuery(x=10, y=1)
    with pytest.raises(ValidationError):
        SmoothQuery(x=10, y=5, lower=10)
    with pytest.raises(ValidationError):
        SmoothQuery(x=10, y=5, prime_window=(3, 3))


def test_scan_needs_spf(table):
    no_spf = sieve(10**5, want_spf=False)
    with pytest.raises(ResourceLimitError, match="scan"):
        psi_exact(SmoothQuery(x=10**4, y=100), no_spf, strategy="scan")


def test_node_budget(table):
    with pytest.raises(ResourceLimitError, match="budget"):
        psi_exact(SmoothQuery(x=10**6, y=10**4), table, strategy="recursive", node_budget=100)


def test_dilation_bound_trend(table):
    # Psi(x/d, y) * d^alpha / Psi(x, y) stays bounded on a small grid.
    from smoothsums import solve_saddle

    worst = 0.0
    for x, y in [(10**4, 100), (10**5, 50)]:
        alpha = solve_saddle(x, y, table=table).alpha
        base = psi(x, y, table)
        for d in (2, 4, 8):
            worst = max(worst, psi(x // d, y, table) * d**alpha / base)
    assert math.isfinite(worst) and worst < 4.0
