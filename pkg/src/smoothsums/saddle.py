"""Deterministic analytic machinery for smooth-number asymptotics.

Covers the saddle point alpha(x,y) solving

    sum_{p <= y} log p / (p^alpha - 1) = log x,

the truncated zeta product zeta(sigma, y) = prod_{p<=y} (1 - p^-sigma)^-1,
the Rankin bound x^sigma zeta(sigma, y), the Hildebrand-Tenenbaum style main
term for Psi(x,y), the Dickman function rho, the auxiliary root xi(u) of
e^xi = 1 + u*xi, and the predicted ratio Psi(x, y/d)/Psi(x, y).

Everything here is a pure function of immutable inputs; zeta and the Rankin
bound are accumulated in the log domain so large y cannot overflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BracketError, ValidationError
from .primes import PrimeTable

DEFAULT_ROOT_TOL = 1e-12
DICKMAN_BASE_STEP = 1.0 / 1024.0

_BRACKET_LO = 1e-6
_BRACKET_HI = 1.5


@dataclass(frozen=True)
class SaddlePoint:
    """Solved saddle point for (x, y) with the residual of the defining equation.

    ``residual`` is sum_{p<=y} log p/(p^alpha - 1) - log x at the returned
    alpha; |residual| <= the solver tolerance.  For all but degenerate tiny
    inputs (e.g. x = y = 3) alpha lies in (0, 1].
    """

    alpha: float
    x: float
    y: float
    residual: float
    iterations: int

    def z_cutoff(self, scale: float = 1.0) -> float:
        """exp(scale/(1-alpha)): the prime-size split where the variance of
        log|F| changes character.  scale=1 is the plain convention; scale=2
        and 2*e^-2 appear as alternative constants.  +inf when alpha >= 1."""
        if self.alpha >= 1.0:
            return math.inf
        return math.exp(scale / (1.0 - self.alpha))


@dataclass(frozen=True)
class AsymptoticEstimate:
    """A positive, finite main-term value along with its source formula id."""

    value: float
    formula_id: str
    inputs: dict

    def __post_init__(self):
        if not (self.value > 0 and math.isfinite(self.value)):
            raise ValidationError(
                f"{self.formula_id} produced non-positive/non-finite value {self.value}"
            )


def _saddle_lhs_and_deriv(alpha: float, logp: np.ndarray, p: np.ndarray):
    """LHS of the saddle equation and its alpha-derivative (both exact sums)."""
    # log p / (p^a - 1); derivative is -log^2 p * p^a / (p^a - 1)^2.
    pa = np.exp(alpha * logp)
    denom = pa - 1.0
    lhs = float(np.sum(logp / denom))
    dlhs = float(-np.sum(logp * logp * pa / (denom * denom)))
    return lhs, dlhs


def solve_saddle(x, y, tol: float = DEFAULT_ROOT_TOL, table: PrimeTable | None = None) -> SaddlePoint:
    """Solve the saddle-point equation by bisection bracketing plus Newton polish.

    The LHS is strictly decreasing in alpha so the root is unique.  Requires
    2 <= y <= x and tol > 0.  Raises BracketError when no sign change exists
    on (1e-6, 1.5] (degenerate tiny inputs only).
    """
    if not (y >= 2 and x >= y):
        raise ValidationError(f"solve_saddle needs 2 <= y <= x, got x={x}, y={y}")
    if not tol > 0:
        raise ValidationError("solve_saddle tolerance must be positive")
    primes = _primes_leq(table, y)
    logp = np.log(primes.astype(np.float64))
    pf = primes.astype(np.float64)
    target = math.log(x)

    lo, hi = _BRACKET_LO, _BRACKET_HI
    f_lo = _saddle_lhs_and_deriv(lo, logp, pf)[0] - target
    f_hi = _saddle_lhs_and_deriv(hi, logp, pf)[0] - target
    if not (f_lo > 0 > f_hi):
        raise BracketError(
            f"saddle equation has no sign change on ({lo}, {hi}] for x={x}, y={y} "
            f"(residuals {f_lo:.3g}, {f_hi:.3g})"
        )

    iterations = 0
    mid = 0.5 * (lo + hi)
    # Bisection until the bracket is small, then Newton from the midpoint.
    for _ in range(80):
        iterations += 1
        mid = 0.5 * (lo + hi)
        f_mid = _saddle_lhs_and_deriv(mid, logp, pf)[0] - target
        if abs(f_mid) <= tol:
            return SaddlePoint(alpha=mid, x=float(x), y=float(y), residual=f_mid, iterations=iterations)
        if f_mid > 0:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-6:
            break

    alpha = 0.5 * (lo + hi)
    residual = 0.0
    for _ in range(60):
        iterations += 1
        lhs, dlhs = _saddle_lhs_and_deriv(alpha, logp, pf)
        residual = lhs - target
        if abs(residual) <= tol:
            break
        step = residual / dlhs
        nxt = alpha - step
        if not (lo <= nxt <= hi):  # keep Newton inside the certified bracket
            nxt = 0.5 * (lo + hi)
        if residual > 0:
            lo = max(lo, alpha)
        else:
            hi = min(hi, alpha)
        alpha = nxt
    if abs(residual) > tol:
        raise ArithmeticError(
            f"saddle solve did not reach tolerance {tol} at x={x}, y={y} (residual {residual:.3g})"
        )
    return SaddlePoint(alpha=float(alpha), x=float(x), y=float(y), residual=float(residual), iterations=iterations)


def _primes_leq(table: PrimeTable | None, y) -> np.ndarray:
    if table is None:
        from .primes import sieve

        table = sieve(max(2, int(y)), want_spf=False)
    primes = table.primes_leq(y)
    if primes.size == 0:
        raise ValidationError(f"no primes <= {y}")
    if table.limit < y and table.limit * table.limit < y:
        raise ValidationError(f"prime table limit {table.limit} does not cover y={y}")
    return primes


def log_zeta_trunc(sigma: float, y, table: PrimeTable | None = None) -> float:
    """log of the truncated Euler product: sum_{p<=y} -log(1 - p^-sigma)."""
    if not sigma > 0:
        raise ValidationError(f"zeta_trunc needs sigma > 0, got {sigma}")
    primes = _primes_leq(table, y).astype(np.float64)
    return float(-np.sum(np.log1p(-np.exp(-sigma * np.log(primes)))))


def zeta_trunc(sigma: float, y, table: PrimeTable | None = None) -> float:
    """prod_{p<=y} (1 - p^-sigma)^-1, computed in the log domain."""
    return math.exp(log_zeta_trunc(sigma, y, table))


def rankin_bound(x, y, sigma: float, table: PrimeTable | None = None) -> float:
    """x^sigma * zeta(sigma, y): an upper bound for Psi(x, y) for every sigma > 0."""
    if not x >= 1:
        raise ValidationError(f"rankin_bound needs x >= 1, got {x}")
    return math.exp(sigma * math.log(x) + log_zeta_trunc(sigma, y, table))


def saddle_approx(x, y) -> float:
    """Two-term approximation 1 - log(u*log(u+1))/log(y), u = log x/log y."""
    if not (y >= 3 and x >= y):
        raise ValidationError(f"saddle_approx needs 3 <= y <= x, got x={x}, y={y}")
    logy = math.log(y)
    u = math.log(x) / logy
    return 1.0 - math.log(u * math.log(u + 1.0)) / logy


def ht_estimate(x, y, table: PrimeTable | None = None) -> AsymptoticEstimate:
    """Smooth-count main term x^alpha zeta(alpha,y) / (alpha sqrt(2 pi (1 + log(x)/y) log x log y)).

    The 1+O(.) error factor is dropped; at desk scale the value is typically
    within a factor ~2 of the exact count.  y > x is clamped to y = x (primes
    above x never divide an n <= x).
    """
    if not (y >= 2 and x >= 2):
        raise ValidationError(f"ht_estimate needs x, y >= 2, got x={x}, y={y}")
    y_eff = min(x, y)
    sp = solve_saddle(x, y_eff, table=table)
    logx = math.log(x)
    log_main = (
        sp.alpha * logx
        + log_zeta_trunc(sp.alpha, y_eff, table)
        - math.log(sp.alpha)
        - 0.5 * math.log(2.0 * math.pi * (1.0 + logx / y_eff) * logx * math.log(y_eff))
    )
    return AsymptoticEstimate(
        value=math.exp(log_main),
        formula_id="smooth_count_main_term",
        inputs={"x": x, "y": y, "alpha": sp.alpha},
    )


def xi(u: float, tol: float = DEFAULT_ROOT_TOL) -> float:
    """The unique root of e^xi = 1 + u*xi with xi(1) = 0; increasing in u.

    The residual |e^xi - 1 - u*xi| is driven below tol relative to the size
    of the dominant term (absolute tol while 1 + u*xi is O(1); plain double
    precision cannot do better once the terms are huge).
    """
    if u < 1:
        raise ValidationError(f"xi is defined for u >= 1, got {u}")
    if not tol > 0:
        raise ValidationError("xi tolerance must be positive")
    if u == 1:
        return 0.0

    def residual(v: float) -> float:
        return math.exp(v) - 1.0 - u * v

    def scale(v: float) -> float:
        return max(1.0, 1.0 + u * v)

    # Root lies in (0, hi] once hi is large enough that e^hi outruns 1 + u*hi.
    lo = 0.0
    hi = max(1.0, math.log(u * math.log(u + 1.0)) + 2.0) if u > 1 else 1.0
    while residual(hi) < 0:
        hi *= 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        r = residual(mid)
        if abs(r) <= tol * scale(mid):
            return mid
        if r < 0:
            lo = mid
        else:
            hi = mid
    v = 0.5 * (lo + hi)
    for _ in range(60):  # Newton polish, residual derivative is e^v - u
        r = residual(v)
        if abs(r) <= tol * scale(v):
            return v
        v -= r / (math.exp(v) - u)
    raise ArithmeticError(f"xi({u}) did not converge to tolerance {tol}")


class _DickmanTable:
    """Grid values of rho via the integral recurrence
    rho(u) = (1/u) * integral_{u-1}^{u} rho(t) dt, advanced by the trapezoid
    rule on the equivalent derivative form rho'(u) = -rho(u-1)/u.

    Each unit interval [k, k+1] is integrated in the rescaled variable
    w(v) = rho(k+v)/rho(k), with the scale carried separately in log space;
    this keeps the forward error *relative*, so the rapidly decaying tail
    stays accurate in double precision."""

    def __init__(self, u_max: float, step: float):
        self.step = step
        m = round(1.0 / step)
        if abs(m * step - 1.0) > 1e-15:
            raise ValidationError("dickman step must divide 1 exactly")
        self.m = m
        k_max = max(1, int(math.ceil(u_max)))
        self.k_max = k_max
        h = step
        w_prev = np.ones(m + 1, dtype=np.float64)  # interval [0, 1]
        intervals = [w_prev]
        log_scale = [0.0, 0.0]  # log rho(0), log rho(1)
        for k in range(1, k_max + 1):
            ratio = 1.0 / w_prev[m] if k > 1 else 1.0  # rho(k-1)/rho(k)
            delayed = ratio * w_prev  # rho(k-1+v)/rho(k) on the grid
            # Trapezoid tail integral of the delayed piece from grid index n to m.
            tail = np.empty(m + 1, dtype=np.float64)
            tail[m] = 0.0
            for n in range(m - 1, -1, -1):
                tail[n] = tail[n + 1] + 0.5 * h * (delayed[n] + delayed[n + 1])
            w = np.empty(m + 1, dtype=np.float64)
            w[0] = 1.0
            acc = 0.5 * h  # trapezoid over the current piece, final node excluded
            for n in range(1, m + 1):
                u = k + n * h
                # u * w(n) = window integral; w(n) enters with weight h/2.
                w[n] = (tail[n] + acc) / (u - 0.5 * h)
                acc += h * w[n]
            intervals.append(w)
            log_scale.append(log_scale[-1] + math.log(w[m]))
            w_prev = w
        self.intervals = intervals
        self.log_scale = log_scale  # log rho(k) for k = 0..k_max+1

    def at(self, u: float) -> float:
        if u <= 1.0:
            return 1.0
        k = min(int(u), self.k_max)
        if k == u and k >= 1:
            return math.exp(self.log_scale[k])
        w = self.intervals[k]
        pos = (u - k) / self.step
        n = int(pos)
        if pos == n:
            val = float(w[n])
        else:
            # Cubic 4-point interpolation; the stencil stays inside the unit
            # interval, so it never straddles a breakpoint of rho.
            k0 = min(max(n - 1, 0), self.m - 3)
            t = pos - k0
            y0, y1, y2, y3 = w[k0 : k0 + 4]
            a = (-y0 + 3 * y1 - 3 * y2 + y3) / 6.0
            b = (y0 - 2 * y1 + y2) / 2.0
            c = (-2 * y0 - 3 * y1 + 6 * y2 - y3) / 6.0
            val = float(((a * (t - 1) + b) * (t - 1) + c) * (t - 1) + y1)
        return math.exp(self.log_scale[k]) * val


_dickman_cache: dict[tuple[float, float], _DickmanTable] = {}


def _dickman_table(u_max: float, step: float) -> _DickmanTable:
    key = (u_max, step)
    tab = _dickman_cache.get(key)
    if tab is None:
        tab = _DickmanTable(u_max, step)
        _dickman_cache[key] = tab
    return tab


def dickman_rho(u: float, tol: float = 1e-10) -> float:
    """Dickman rho: 1 on [0,1], then the delay-equation solution u rho'(u) = -rho(u-1).

    Trapezoid advance on a fixed fine grid, Richardson-extrapolated, with the
    step halved until two successive extrapolations agree within tol.
    """
    if u < 0:
        raise ValidationError(f"dickman_rho needs u >= 0, got {u}")
    if not tol > 0:
        raise ValidationError("dickman_rho tolerance must be positive")
    if u <= 1.0:
        return 1.0
    u_max = max(4.0, math.ceil(u) + 1.0)
    step = DICKMAN_BASE_STEP
    prev = None
    for _ in range(6):
        coarse = _dickman_table(u_max, step).at(u)
        fine = _dickman_table(u_max, step / 2.0).at(u)
        richardson = (4.0 * fine - coarse) / 3.0  # trapezoid error is O(step^2)
        if prev is not None and abs(richardson - prev) < tol:
            return richardson
        prev = richardson
        step /= 2.0
    return prev


def psi_ratio_in_y(x, y, d, table: PrimeTable | None = None) -> AsymptoticEstimate:
    """Predicted Psi(x, y/d)/Psi(x, y) = exp((u - u_d) * xi(u)), u_d = log x/log(y/d).

    Valid range for the underlying comparison is roughly (log x)^4 <= y with
    2 <= d <= y^(1/3); queries outside it still evaluate but are flagged in
    ``inputs['outside_stated_range']``.
    """
    if not (y >= 2 and x >= y):
        raise ValidationError(f"psi_ratio_in_y needs 2 <= y <= x, got x={x}, y={y}")
    if not (1 <= d and y / d >= 2):
        raise ValidationError(f"psi_ratio_in_y needs 1 <= d with y/d >= 2, got d={d}")
    logx, logy = math.log(x), math.log(y)
    u = logx / logy
    u_d = logx / math.log(y / d)
    xi_u = xi(max(u, 1.0))
    outside = not (logx**4 <= y and d <= y ** (1.0 / 3.0)) or u < 1
    if y >= math.exp(max(math.log(max(math.log(x), 2.0)), 1e-9) ** (5.0 / 3.0)):
        error_range = "bounded_error_range"
    else:
        error_range = "superexponential_error_range"
    return AsymptoticEstimate(
        value=math.exp((u - u_d) * xi_u),
        formula_id="smooth_count_ratio_in_y",
        inputs={
            "x": x,
            "y": y,
            "d": d,
            "u": u,
            "u_d": u_d,
            "xi_u": xi_u,
            "outside_stated_range": outside,
            "error_range": error_range,
        },
    )
