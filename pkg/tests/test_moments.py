import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from smoothsums import (
    LargestFactorIn,
    ValidationError,
    cancellation_report,
    dirichlet_l1,
    estimate_abs_moment,
    estimate_ep_integral_moment,
    estimate_ep_moment,
    estimate_power_moment,
    plancherel_check,
    plancherel_tail_bound,
    psi,
    psi_with_largest_prime_in,
    zeta_trunc,
)
from smoothsums.moments import smooth_indicator_coefficients


def test_abs_moment_x2_limit(table):
    # E|1 + f(2)| = (1/2pi) int |1 + e^{i t}| dt = 4/pi
    est = estimate_abs_moment(2, 2, 10**4, seed=42, table=table)
    assert abs(est.mean - 4 / math.pi) <= 3 * est.stderr


def test_abs_moment_single_term(table):
    est = estimate_abs_moment(1, 2, 50, seed=1, table=table)
    assert est.mean == 1.0
    assert est.stderr == 0.0


def test_abs_moment_cauchy_schwarz(table):
    for x, y in [(100, 10), (1000, 30), (5000, 70)]:
        est = estimate_abs_moment(x, y, 500, seed=9, table=table)
        assert est.mean <= math.sqrt(psi(x, y, table)) + 3 * est.stderr


def test_power_moment_orthogonality(table):
    est = estimate_power_moment(3, 3, 2.0, 4000, seed=42, table=table)
    assert abs(est.mean - 3.0) <= 3 * est.stderr
    est2 = estimate_power_moment(500, 20, 2.0, 2000, seed=42, table=table)
    assert abs(est2.mean - psi(500, 20, table)) <= 3 * est2.stderr


def test_power_moment_monotone_in_q(table):
    half = estimate_power_moment(200, 10, 1.0, 1500, seed=4, table=table)
    one = estimate_power_moment(200, 10, 2.0, 1500, seed=4, table=table)
    assert half.mean <= math.sqrt(one.mean) * (1 + 3 * one.stderr / one.mean)


def test_constrained_abs_moment(table):
    est = estimate_abs_moment(
        10**4, 100, 400, seed=13, constraint=LargestFactorIn(50, 100), table=table
    )
    count = psi_with_largest_prime_in(10**4, 50, 100, table)
    assert est.mean <= math.sqrt(count) + 3 * est.stderr


def test_estimate_determinism_across_threads(table):
    a = estimate_abs_moment(2000, 50, 300, seed=31, table=table, threads=1)
    b = estimate_abs_moment(2000, 50, 300, seed=31, table=table, threads=4)
    assert a == b  # bit-identical regardless of worker count


def test_stderr_scaling(table):
    small = estimate_abs_moment(1000, 30, 500, seed=8, table=table)
    big = estimate_abs_moment(1000, 30, 2000, seed=8, table=table)
    assert big.stderr == pytest.approx(small.stderr / 2, rel=0.3)


def test_ep_moment_identities(table):
    flat = estimate_ep_moment(0.9, 100, 0.0, 0.0, 100, seed=5, table=table)
    assert flat.mean == 1.0 and flat.stderr == 0.0
    est = estimate_ep_moment(0.8, 200, 1.0, 0.3, 4000, seed=42, table=table)
    z = zeta_trunc(0.8, 200, table)
    assert abs(est.mean - z) <= 3 * est.stderr
    with pytest.raises(ValidationError):
        estimate_ep_moment(0.9, 100, 200.0, 0.0, 100, seed=5, table=table)
    with pytest.warns(UserWarning, match="3/4"):
        estimate_ep_moment(0.5, 50, 1.0, 0.0, 10, seed=5, table=table)


def test_ep_integral_moment_fubini(table):
    beta, y = 0.85, 100
    est = estimate_ep_integral_moment(
        beta, y, 1.0, 1500, seed=42, window=(-0.5, 0.5), weight=False, table=table
    )
    assert abs(est.mean - zeta_trunc(beta, y, table)) <= 3 * est.stderr
    with pytest.raises(ValidationError):
        estimate_ep_integral_moment(beta, y, 1.5, 100, seed=1, table=table)


def test_dirichlet_l1_values():
    assert dirichlet_l1(0) == 1.0
    assert abs(dirichlet_l1(1) - 4 / math.pi) <= 1e-10
    # independent oracle: scipy adaptive quadrature of |sum e(k theta)|
    from scipy.integrate import quad

    for n in (2, 5, 17):
        oracle, _ = quad(
            lambda t, n=n: abs(sum(complex(math.cos(2 * math.pi * k * t), math.sin(2 * math.pi * k * t)) for k in range(n + 1))),
            0.0,
            1.0,
            points=[j / (n + 1) for j in range(1, n + 1)],
            limit=200,
        )
        assert dirichlet_l1(n) == pytest.approx(oracle, abs=1e-8)
    with pytest.raises(ValidationError):
        dirichlet_l1(-1)


def test_dirichlet_l1_matches_mc(table):
    v = dirichlet_l1(20)
    est = estimate_abs_moment(2**20, 2, 4000, seed=42, table=table)
    assert abs(v - est.mean) <= 3 * est.stderr


def test_plancherel_single_coefficient():
    res = plancherel_check([1.0], 0.5, 10**4)
    assert res.lhs == pytest.approx(1.0, abs=1e-12)
    assert res.gap <= plancherel_tail_bound([1.0], 0.5, 10**4) + 1e-6


def test_plancherel_smooth_indicator(table):
    coef = smooth_indicator_coefficients(100, 3, table)
    assert coef.sum() == 20  # the 3-smooth count below 100
    res = plancherel_check(coef, 0.7, 10**4)
    assert res.gap <= plancherel_tail_bound(coef, 0.7, 10**4) + 1e-6


@settings(max_examples=25, deadline=None)
@given(st.floats(min_value=0.25, max_value=1.5), st.integers(min_value=1, max_value=12))
def test_plancherel_homogeneity(scale, m):
    rng = np.random.default_rng(m)
    coef = rng.integers(0, 2, size=m).astype(float)
    coef[0] = 1.0
    base = plancherel_check(coef, 0.6, 500.0)
    scaled = plancherel_check((scale * coef).tolist(), 0.6, 500.0)
    assert scaled.lhs == pytest.approx(scale**2 * base.lhs, rel=1e-12)
    assert scaled.rhs == pytest.approx(scale**2 * base.rhs, rel=1e-12)


def test_cancellation_report_small(table):
    rows = cancellation_report(10**4, [1, 2, 3], 300, seed=42, table=table)
    assert [round(r.u, 3) for r in rows] == sorted(round(r.u, 3) for r in rows)
    for r in rows:
        assert r.psi == psi(r.x, r.y, table)
        assert r.ratio == pytest.approx(r.abs_moment.mean / math.sqrt(r.psi))
        assert r.ci_low <= r.ratio <= r.ci_high
        assert r.predicted_saving == pytest.approx(math.exp(-r.u * math.log(2) / 2))
        assert r.ratio <= 1 + 3 * r.abs_moment.stderr / r.abs_moment.mean
    # u = 1 row reproduces the full-sum regime with ratio below 1
    assert rows[0].y == 10**4 and rows[0].ratio < 1.0


def test_report_validation(table):
    with pytest.raises(ValidationError):
        cancellation_report(100, [0.5], 10, seed=1, table=table)
    with pytest.raises(ValidationError):
        estimate_abs_moment(10, 5, 1, seed=1, table=table)
