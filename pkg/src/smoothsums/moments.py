"""Parallel Monte Carlo estimation of partial-sum and Euler-product moments.

Every estimator draws its samples from streams 0..N-1 of the counter-based
phase generator, so a (statistic, seed, N) triple pins the estimate bit
exactly no matter how many workers computed it: per-sample values land in a
stream-indexed array and the Welford accumulation always runs in stream
order.

Also here: the exact y = 2 channel (the L1 norm of the Dirichlet kernel), a
two-sided check of the multiplicative Plancherel identity, and the
cancellation report comparing observed first-moment ratios against the
predicted exp(-u log(2)/2) saving.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .counting import SmoothQuery, psi_exact
from .errors import ValidationError
from .primes import PrimeTable, sieve
from .rmf import (
    Constraint,
    PhaseAssignment,
    SmoothBasis,
    euler_integral,
    log_abs_euler_sq,
    phase_values,
    sample_phases,
)
from .saddle import solve_saddle, zeta_trunc

LOG2 = math.log(2.0)
_CHUNK = 64  # fixed worker chunk; results are placed by stream id regardless


@dataclass(frozen=True)
class MomentEstimate:
    """Monte Carlo mean with its standard error and full provenance."""

    statistic: str
    mean: float
    stderr: float
    n_samples: int
    seed: int

    @property
    def rel_stderr(self) -> float:
        return self.stderr / abs(self.mean) if self.mean else math.inf


def _default_threads(threads: int | None) -> int:
    if threads is not None:
        if threads < 1:
            raise ValidationError(f"threads must be >= 1, got {threads}")
        return threads
    env = os.environ.get("SMOOTHSUMS_THREADS")
    return max(1, int(env)) if env else 1


def _welford(values: np.ndarray) -> tuple[float, float]:
    """Streaming mean and sample variance, accumulated in stream order."""
    mean = 0.0
    m2 = 0.0
    for k, v in enumerate(values.tolist(), start=1):
        delta = v - mean
        mean += delta / k
        m2 += delta * (v - mean)
    var = m2 / (len(values) - 1) if len(values) > 1 else 0.0
    return mean, max(var, 0.0)


def _collect(fn: Callable[[int], float], n_samples: int, threads: int) -> np.ndarray:
    """values[stream_id] = fn(stream_id), computed serially or on a thread pool."""
    out = np.empty(n_samples, dtype=np.float64)
    if threads <= 1 or n_samples < 2 * _CHUNK:
        for sid in range(n_samples):
            out[sid] = fn(sid)
        return out
    starts = range(0, n_samples, _CHUNK)

    def run_chunk(start: int):
        stop = min(start + _CHUNK, n_samples)
        return start, [fn(sid) for sid in range(start, stop)]

    with ThreadPoolExecutor(max_workers=threads) as pool:
        for start, vals in pool.map(run_chunk, starts):
            out[start : start + len(vals)] = vals
    return out


def _finish(statistic: str, values: np.ndarray, seed: int) -> MomentEstimate:
    mean, var = _welford(values)
    stderr = math.sqrt(var / len(values)) if len(values) > 1 else 0.0
    return MomentEstimate(
        statistic=statistic, mean=mean, stderr=stderr, n_samples=len(values), seed=seed
    )


def _primes_for(y: int, table: PrimeTable | None) -> np.ndarray:
    if table is not None and table.limit >= y:
        return table.primes_leq(y)
    return sieve(max(2, int(y)), want_spf=False).primes


def estimate_abs_moment(
    x: int,
    y: int,
    n_samples: int,
    seed: int,
    constraint: Constraint = None,
    table: PrimeTable | None = None,
    threads: int | None = None,
) -> MomentEstimate:
    """Mean of |sum f(n)| over the (possibly constrained) smooth support."""
    return estimate_power_moment(
        x, y, 1.0, n_samples, seed, constraint=constraint, table=table, threads=threads
    )


def estimate_power_moment(
    x: int,
    y: int,
    exponent: float,
    n_samples: int,
    seed: int,
    constraint: Constraint = None,
    table: PrimeTable | None = None,
    threads: int | None = None,
) -> MomentEstimate:
    """Mean of |sum f(n)|^exponent (exponent = 2q); exponent 1 is the first
    absolute moment, exponent 2 has expectation exactly equal to the count."""
    if n_samples < 2:
        raise ValidationError(f"need at least 2 samples, got {n_samples}")
    primes = _primes_for(y, table)
    basis = SmoothBasis(x, primes, constraint=constraint)

    def one(stream_id: int) -> float:
        phases = PhaseAssignment(
            seed=seed,
            stream_id=stream_id,
            primes=basis.primes,
            phases=phase_values(seed, stream_id, np.arange(basis.primes.size, dtype=np.uint64)),
        )
        s = basis.partial_sum(phases)
        return abs(s) ** exponent

    values = _collect(one, n_samples, _default_threads(threads))
    stat = f"abs_partial_sum^({exponent:g})[x={x},y={y},constraint={constraint!r}]"
    return _finish(stat, values, seed)


def estimate_ep_moment(
    beta: float,
    y: int,
    alpha_exp: float,
    t: float,
    n_samples: int,
    seed: int,
    table: PrimeTable | None = None,
    threads: int | None = None,
) -> MomentEstimate:
    """Mean of |F_y(beta/2 + it)|^(2*alpha_exp); expectation scales like
    zeta(beta, y)^(alpha_exp^2), and equals it exactly at alpha_exp = 1."""
    if n_samples < 2:
        raise ValidationError(f"need at least 2 samples, got {n_samples}")
    if abs(alpha_exp) > 100:
        raise ValidationError(f"|alpha_exp| <= 100 required, got {alpha_exp}")
    if beta < 0.75:
        import warnings

        warnings.warn(
            f"beta={beta} is below 3/4; the moment-scaling regime is not guaranteed",
            stacklevel=2,
        )
    primes = _primes_for(y, table)

    def one(stream_id: int) -> float:
        theta = phase_values(seed, stream_id, np.arange(primes.size, dtype=np.uint64))
        log_f2 = float(log_abs_euler_sq(beta, t, primes, theta)[0])
        return math.exp(alpha_exp * log_f2)

    values = _collect(one, n_samples, _default_threads(threads))
    stat = f"abs_euler_product^(2*{alpha_exp:g})[beta={beta},y={y},t={t}]"
    return _finish(stat, values, seed)


def zeta_truncation_window(beta: float, y: int, table: PrimeTable | None = None) -> tuple[float, float]:
    """Symmetric truncation |t| <= zeta(beta, y) used for full-line integral moments."""
    half = zeta_trunc(beta, y, table)
    return (-half, half)


def estimate_ep_integral_moment(
    beta: float,
    y: int,
    q: float,
    n_samples: int,
    seed: int,
    window: tuple[float, float] = (-0.5, 0.5),
    weight: bool = False,
    step: float | None = None,
    table: PrimeTable | None = None,
    threads: int | None = None,
) -> MomentEstimate:
    """Mean of (window integral of |F_y(beta/2+it)|^2 [optionally /|beta/2+it|^2])^q.

    The two-sided bracket zeta^{q^2} << E(...)^q << (log y)^{1-q} zeta^{q^2} e^{...}
    holds for 1/2 <= q <= 1 (lower bound alone below 1/2).
    """
    if n_samples < 2:
        raise ValidationError(f"need at least 2 samples, got {n_samples}")
    if not 0 < q <= 1:
        raise ValidationError(f"q must lie in (0, 1], got {q}")
    primes = _primes_for(y, table)

    def one(stream_id: int) -> float:
        phases = PhaseAssignment(
            seed=seed,
            stream_id=stream_id,
            primes=primes,
            phases=phase_values(seed, stream_id, np.arange(primes.size, dtype=np.uint64)),
        )
        val = euler_integral(beta, y, phases, window=window, step=step, weight=weight)
        return val**q

    values = _collect(one, n_samples, _default_threads(threads))
    stat = (
        f"euler_integral^({q:g})[beta={beta},y={y},window={window},weight={weight}]"
    )
    return _finish(stat, values, seed)


def dirichlet_l1(n_terms: int, tol: float = 1e-8) -> float:
    """Integral over [0,1] of |sum_{k=0}^{N} e(k theta)|: the exact y = 2 channel.

    The integrand is |sin(pi (N+1) theta) / sin(pi theta)|, smooth between its
    zeros at j/(N+1); each such panel is integrated by Gauss-Legendre with the
    order doubled until the total changes by less than tol.
    """
    if n_terms < 0:
        raise ValidationError(f"n_terms must be >= 0, got {n_terms}")
    if n_terms == 0:
        return 1.0
    m = n_terms + 1
    edges = np.linspace(0.0, 1.0, m + 1)
    half = 0.5 * (edges[1:] - edges[:-1])
    mid = 0.5 * (edges[1:] + edges[:-1])

    def total(order: int) -> float:
        nodes, weights = np.polynomial.legendre.leggauss(order)
        theta = mid[:, None] + half[:, None] * nodes[None, :]
        vals = np.abs(np.sin(math.pi * m * theta) / np.sin(math.pi * theta))
        return float(np.sum(half[:, None] * weights[None, :] * vals))

    order = 16
    prev = total(order)
    for _ in range(5):
        order *= 2
        cur = total(order)
        if abs(cur - prev) <= tol:
            return cur
        prev = cur
    return prev


class PlancherelResult(NamedTuple):
    lhs: float
    rhs: float
    gap: float


def plancherel_tail_bound(coefficients: Sequence[complex], sigma: float, t_max: float) -> float:
    """Analytic bound for the RHS tail |t| > t_max: (sum |a_n| n^-sigma)^2 / (pi t_max)."""
    b = sum(abs(a) * (k + 1) ** (-sigma) for k, a in enumerate(coefficients))
    return b * b / (math.pi * t_max)


def plancherel_check(
    coefficients: Sequence[complex],
    sigma: float,
    t_max: float,
) -> PlancherelResult:
    """Both sides of the multiplicative Plancherel identity for a finite
    coefficient sequence a_1..a_M:

        integral_0^inf |sum_{n<=x} a_n|^2 / x^(1+2 sigma) dx
            = (1/2 pi) integral |A(sigma+it) / (sigma+it)|^2 dt.

    The LHS is exact (the partial sum is a step function: closed-form integral
    per unit interval plus the exact tail beyond x = M); the RHS is quadrature
    over [-t_max, t_max], so the gap must be at most the analytic tail bound
    plus the quadrature tolerance.
    """
    if not sigma > 0:
        raise ValidationError(f"plancherel_check needs sigma > 0, got {sigma}")
    if not t_max > 0:
        raise ValidationError(f"plancherel_check needs t_max > 0, got {t_max}")
    a = np.asarray(list(coefficients), dtype=np.complex128)
    m = a.size
    if m == 0:
        return PlancherelResult(0.0, 0.0, 0.0)
    partial = np.cumsum(a)
    sq = np.abs(partial) ** 2
    k = np.arange(1, m + 1, dtype=np.float64)
    # integral_k^{k+1} x^{-1-2s} dx = (k^{-2s} - (k+1)^{-2s}) / (2s); exact tail from M.
    lhs = float(
        np.sum(sq[:-1] * (k[:-1] ** (-2 * sigma) - (k[:-1] + 1) ** (-2 * sigma))) / (2 * sigma)
        + sq[-1] * m ** (-2.0 * sigma) / (2 * sigma)
    )

    support = np.nonzero(a)[0]
    logn = np.log(support + 1.0)
    coefs = a[support] * np.exp(-sigma * logn)
    max_freq = float(logn.max()) if logn.size else 1.0
    panel = min(1.0, 2.0 / max(max_freq, 1e-9))
    n_panels = int(math.ceil(t_max / panel))
    nodes, weights = np.polynomial.legendre.leggauss(16)
    edges = np.linspace(0.0, t_max, n_panels + 1)
    half = 0.5 * (edges[1:] - edges[:-1])
    mid = 0.5 * (edges[1:] + edges[:-1])
    rhs = 0.0
    block = max(1, 200_000 // max(1, coefs.size))
    for start in range(0, n_panels, block):
        stop = min(start + block, n_panels)
        ts = (mid[start:stop, None] + half[start:stop, None] * nodes[None, :]).ravel()
        amp = np.abs(np.exp(-1j * ts[:, None] * logn[None, :]) @ coefs) ** 2
        integrand = amp / (sigma * sigma + ts * ts)
        w = (half[start:stop, None] * weights[None, :]).ravel()
        rhs += float(np.dot(w, integrand))
    rhs /= math.pi  # 2/(2 pi): integrand is even in t
    return PlancherelResult(lhs=lhs, rhs=rhs, gap=abs(lhs - rhs))


@dataclass(frozen=True)
class ReportRow:
    """One (x, y) cell of the cancellation report."""

    x: int
    y: int
    u: float
    alpha: float
    psi: int
    abs_moment: MomentEstimate
    ratio: float
    ci_low: float
    ci_high: float
    predicted_saving: float


def smooth_indicator_coefficients(x: int, y: int, table: PrimeTable) -> np.ndarray:
    """a_n = 1 if n <= x is y-smooth else 0, as a length-x array (index n-1)."""
    from .counting import enumerate_smooth

    coef = np.zeros(x, dtype=np.float64)
    for n, _ in enumerate_smooth(x, y, table):
        coef[n - 1] = 1.0
    return coef


def cancellation_report(
    x: int,
    u_values: Sequence[float],
    n_samples: int,
    seed: int,
    table: PrimeTable,
    threads: int | None = None,
) -> list[ReportRow]:
    """One row per requested u: y = round(x^(1/u)), the exact count, the saddle
    point, the Monte Carlo first absolute moment, the observed ratio
    mean|S|/sqrt(count) with a 3-stderr interval, and the predicted saving
    exp(-u log(2)/2)."""
    rows: list[ReportRow] = []
    for u_req in u_values:
        if not u_req >= 1:
            raise ValidationError(f"u must be >= 1, got {u_req}")
        y = max(2, round(x ** (1.0 / u_req)))
        u = math.log(x) / math.log(y)
        count = psi_exact(SmoothQuery(x=x, y=y), table)
        est = estimate_abs_moment(x, y, n_samples, seed, table=table, threads=threads)
        root = math.sqrt(count)
        alpha = solve_saddle(x, y, table=table).alpha
        rows.append(
            ReportRow(
                x=x,
                y=y,
                u=u,
                alpha=alpha,
                psi=count,
                abs_moment=est,
                ratio=est.mean / root,
                ci_low=(est.mean - 3.0 * est.stderr) / root,
                ci_high=(est.mean + 3.0 * est.stderr) / root,
                predicted_saving=math.exp(-u * LOG2 / 2.0),
            )
        )
    rows.sort(key=lambda r: r.u)
    return rows
