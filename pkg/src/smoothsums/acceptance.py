"""Acceptance checks: every gate the library promises, runnable as one suite.

Each check pins its tolerances and seeds (chosen once, committed here); a
check re-run with the same seeds reproduces its report byte for byte, which
is itself the final check.  ``quick`` scale shrinks sample counts for a fast
smoke run; the committed gate is ``full``.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .counting import SmoothQuery, count_restricted_interval, psi_exact
from .moments import (
    cancellation_report,
    dirichlet_l1,
    estimate_abs_moment,
    estimate_ep_integral_moment,
    estimate_ep_moment,
    estimate_power_moment,
    plancherel_check,
    plancherel_tail_bound,
    smooth_indicator_coefficients,
    zeta_truncation_window,
)
from .primes import PrimeTable, sieve
from .saddle import dickman_rho, log_zeta_trunc, rankin_bound, saddle_approx, solve_saddle, xi, zeta_trunc

SEED_DEFAULT = 42
SEED_SCALING = 12  # committed for the moment-scaling check (heavy-tailed cells)
SEED_PAIRS = 20240601


@dataclass
class CheckResult:
    cid: int
    name: str
    passed: bool
    seconds: float
    details: list[str] = field(default_factory=list)

    def report(self) -> str:
        head = f"[{'PASS' if self.passed else 'FAIL'}] criterion {self.cid}: {self.name}"
        return "\n".join([head] + [f"    {line}" for line in self.details])


class AcceptanceSuite:
    """Runs the committed acceptance checks against a shared prime table."""

    def __init__(self, scale: str = "full", threads: int | None = None):
        if scale not in ("full", "quick"):
            raise ValueError(f"scale must be 'full' or 'quick', got {scale!r}")
        self.scale = scale
        self.threads = threads
        self._table: PrimeTable | None = None
        self._cache: dict[int, CheckResult] = {}

    @property
    def table(self) -> PrimeTable:
        if self._table is None:
            self._table = sieve(10**6)
        return self._table

    def _n(self, full: int, quick: int) -> int:
        return full if self.scale == "full" else quick

    # -- criterion implementations ------------------------------------------

    def check_1(self) -> CheckResult:
        """Exact counting identities and scan/recursive strategy agreement."""
        t0 = time.time()
        details: list[str] = []
        ok = True

        for x, y, expect in [(100, 3, 20), (10, 2, 4)]:
            got = psi_exact(SmoothQuery(x=x, y=y), self.table)
            ok &= got == expect
            details.append(f"psi({x},{y}) = {got} (expect {expect})")
        for x in (1, 7, 50, 1000):
            got = psi_exact(SmoothQuery(x=x, y=max(2, x + 5)), self.table)
            ok &= got == x
            details.append(f"psi({x}, y>=x) = {got} (expect {x})")

        rng = np.random.default_rng(SEED_PAIRS)
        n_pairs = self._n(200, 50)
        mismatches = 0
        for _ in range(n_pairs):
            x = int(round(math.exp(rng.uniform(math.log(10), math.log(10**5)))))
            y = int(round(math.exp(rng.uniform(math.log(2), math.log(max(2, x))))))
            y = max(2, y)
            a = psi_exact(SmoothQuery(x=x, y=y), self.table, strategy="scan")
            b = psi_exact(SmoothQuery(x=x, y=y), self.table, strategy="recursive")
            if a != b:
                mismatches += 1
                details.append(f"strategy mismatch at x={x}, y={y}: scan={a} recursive={b}")
        ok &= mismatches == 0
        details.append(f"strategy agreement on {n_pairs} random pairs: {n_pairs - mismatches}/{n_pairs}")
        return CheckResult(1, "exact counting", ok, time.time() - t0, details)

    def check_2(self) -> CheckResult:
        """Orthogonality: mean |S|^2 matches the exact count within 3 stderr."""
        t0 = time.time()
        x, y = 10**4, 100
        n = self._n(4000, 500)
        est = estimate_power_moment(x, y, 2.0, n, SEED_DEFAULT, table=self.table, threads=self.threads)
        count = psi_exact(SmoothQuery(x=x, y=y), self.table)
        ok = abs(est.mean - count) <= 3.0 * est.stderr
        details = [
            f"mean|S|^2 = {est.mean!r} +- {est.stderr!r} (N={n}, seed={SEED_DEFAULT})",
            f"psi({x},{y}) = {count}; |diff| = {abs(est.mean - count)!r} <= 3*stderr: {ok}",
        ]
        return CheckResult(2, "second-moment orthogonality", ok, time.time() - t0, details)

    def check_3(self) -> CheckResult:
        """Exact Euler-product second moment: mean |F|^2 vs zeta(beta, y)."""
        t0 = time.time()
        beta, y, t, n = 0.8, 200, 0.3, self._n(4000, 1000)
        est = estimate_ep_moment(beta, y, 1.0, t, n, SEED_DEFAULT, table=self.table, threads=self.threads)
        z = zeta_trunc(beta, y, self.table)
        ok = abs(est.mean - z) <= 3.0 * est.stderr
        details = [
            f"mean|F|^2 = {est.mean!r} +- {est.stderr!r} (N={n}, seed={SEED_DEFAULT})",
            f"zeta({beta},{y}) = {z!r}; within 3*stderr: {ok}",
        ]
        return CheckResult(3, "euler-product second moment", ok, time.time() - t0, details)

    def check_4(self) -> CheckResult:
        """Moment scaling: log(mean |F|^{2a}) / log zeta lands in [a^2 +- 0.15]."""
        t0 = time.time()
        beta, y, n = 0.9, 500, 4000
        lz = log_zeta_trunc(beta, y, self.table)
        ok = True
        details = [f"log zeta({beta},{y}) = {lz!r} (N={n}, seed={SEED_SCALING})"]
        for a in (0.5, 1.0, 1.5):
            est = estimate_ep_moment(beta, y, a, 0.0, n, SEED_SCALING, table=self.table, threads=self.threads)
            ratio = math.log(est.mean) / lz
            cell_ok = abs(ratio - a * a) <= 0.15
            ok &= cell_ok
            details.append(f"a={a}: log(mean)/log zeta = {ratio!r} target {a * a} +- 0.15 -> {cell_ok}")
        return CheckResult(4, "euler-product moment scaling", ok, time.time() - t0, details)

    def check_5(self) -> CheckResult:
        """Integral-moment bracket: recorded c, C (K=1 fixed) plus the exact q=1 case."""
        t0 = time.time()
        beta = 0.85
        n = self._n(2000, 300)
        low_ratios, up_ratios = [], []
        details = [f"beta={beta}, N={n}, seed={SEED_DEFAULT}, K fixed at 1"]
        ok = True
        for y in (100, 500):
            lz = log_zeta_trunc(beta, y, self.table)
            window = zeta_truncation_window(beta, y, self.table)
            for q in (0.5, 0.75):
                est = estimate_ep_integral_moment(
                    beta, y, q, n, SEED_DEFAULT, window=window, weight=True,
                    table=self.table, threads=self.threads,
                )
                lower = est.mean / math.exp(q * q * lz)
                upper = est.mean / (
                    math.log(y) ** (1.0 - q) * math.exp(q * q * lz) * math.exp(lz ** (8.0 / 11.0))
                )
                low_ratios.append(lower)
                up_ratios.append(upper)
                details.append(f"y={y} q={q}: mean = {est.mean!r}, c-ratio {lower!r}, C-ratio {upper!r}")
        c_rec, c_up = min(low_ratios), max(up_ratios)
        ok &= c_rec > 0 and math.isfinite(c_rec) and math.isfinite(c_up)
        details.append(f"recorded c = {c_rec!r} (>0: {c_rec > 0}), C = {c_up!r}, K = 1")
        for y in (100, 500):
            z = zeta_trunc(beta, y, self.table)
            est = estimate_ep_integral_moment(
                beta, y, 1.0, n, SEED_DEFAULT, window=(-0.5, 0.5), weight=False,
                table=self.table, threads=self.threads,
            )
            cell_ok = abs(est.mean - z) <= 3.0 * est.stderr
            ok &= cell_ok
            details.append(
                f"q=1 weight-off y={y}: {est.mean!r} +- {est.stderr!r} vs zeta {z!r} -> {cell_ok}"
            )
        return CheckResult(5, "integral-moment bracket", ok, time.time() - t0, details)

    def check_6(self) -> CheckResult:
        """The y=2 channel: Dirichlet-kernel L1 values and the MC identity."""
        t0 = time.time()
        details: list[str] = []
        v1 = dirichlet_l1(1)
        ok = abs(v1 - 4.0 / math.pi) <= 1e-8
        details.append(f"L1(1) = {v1!r} vs 4/pi = {4.0 / math.pi!r} -> {ok}")

        n_mc = self._n(10**4, 2000)
        v20 = dirichlet_l1(20)
        est = estimate_abs_moment(2**20, 2, n_mc, SEED_DEFAULT, table=self.table, threads=self.threads)
        mc_ok = abs(v20 - est.mean) <= 3.0 * est.stderr
        ok &= mc_ok
        details.append(
            f"L1(20) = {v20!r} vs mean|S|(2^20, y=2) = {est.mean!r} +- {est.stderr!r} -> {mc_ok}"
        )

        n_max = self._n(1000, 200)
        bad = [
            n for n in range(n_max + 1)
            if not (1.0 - 1e-12 <= dirichlet_l1(n) <= math.sqrt(n + 1.0) + 1e-12)
        ]
        bounds_ok = not bad
        ok &= bounds_ok
        details.append(f"1 <= L1(N) <= sqrt(N+1) for N <= {n_max}: {bounds_ok}")
        return CheckResult(6, "exact y=2 channel", ok, time.time() - t0, details)

    def check_7(self) -> CheckResult:
        """Plancherel identity on the 3-smooth indicator below 100."""
        t0 = time.time()
        sigma, t_max = 0.7, 10**4
        coef = smooth_indicator_coefficients(100, 3, self.table)
        res = plancherel_check(coef, sigma, t_max)
        bound = plancherel_tail_bound(coef, sigma, t_max)
        ok = res.gap <= bound + 1e-6
        details = [
            f"lhs = {res.lhs!r}, rhs = {res.rhs!r}",
            f"gap = {res.gap!r} <= tail bound {bound!r} + 1e-6: {ok}",
        ]
        return CheckResult(7, "plancherel identity", ok, time.time() - t0, details)

    def _saddle_grid(self) -> list[tuple[int, int]]:
        grid = [(16, 4), (10**4, 10**4)]
        for x in (10**4, 10**6, 10**8):
            for u in (2, 3, 4, 5, 6):
                y = max(3, round(x ** (1.0 / u)))
                grid.append((x, y))
        return grid

    def check_8(self) -> CheckResult:
        """Special functions: xi, dickman rho, saddle residuals, Rankin minimizer."""
        t0 = time.time()
        details: list[str] = []
        ok = xi(1) == 0.0
        details.append(f"xi(1) = {xi(1)!r} (exact zero: {ok})")

        rho2_err = abs(dickman_rho(2.0) - (1.0 - math.log(2.0)))
        cell = rho2_err <= 1e-10
        ok &= cell
        details.append(f"|rho(2) - (1 - log 2)| = {rho2_err!r} <= 1e-10: {cell}")

        h = 1e-4
        worst = 0.0
        for u in [1.5 + k for k in range(9)]:
            deriv = (dickman_rho(u + h) - dickman_rho(u - h)) / (2.0 * h)
            worst = max(worst, abs(u * deriv + dickman_rho(u - 1.0)))
        cell = worst <= 1e-6
        ok &= cell
        details.append(f"max |u rho'(u) + rho(u-1)| on 1.5..9.5 = {worst!r} <= 1e-6: {cell}")

        worst_res = 0.0
        for x, y in self._saddle_grid():
            sp = solve_saddle(x, y, 1e-12, table=self.table)
            worst_res = max(worst_res, abs(sp.residual))
        cell = worst_res <= 1e-12
        ok &= cell
        details.append(f"max saddle residual over grid = {worst_res!r} <= 1e-12: {cell}")

        # Golden-section oracle: the Rankin bound is unimodal in sigma.
        phi = (math.sqrt(5.0) - 1.0) / 2.0
        a, b = 1e-6, 1.5
        c = b - phi * (b - a)
        d = a + phi * (b - a)
        fc = rankin_bound(16, 4, c, self.table)
        fd = rankin_bound(16, 4, d, self.table)
        while b - a > 1e-9:
            if fc < fd:
                b, d, fd = d, c, fc
                c = b - phi * (b - a)
                fc = rankin_bound(16, 4, c, self.table)
            else:
                a, c, fc = c, d, fd
                d = a + phi * (b - a)
                fd = rankin_bound(16, 4, d, self.table)
        minimizer = 0.5 * (a + b)
        alpha = solve_saddle(16, 4, table=self.table).alpha
        cell = abs(minimizer - alpha) <= 1e-6
        ok &= cell
        details.append(f"rankin argmin {minimizer!r} vs saddle alpha {alpha!r} (|diff| <= 1e-6: {cell})")
        return CheckResult(8, "special functions", ok, time.time() - t0, details)

    def check_9(self) -> CheckResult:
        """Two-term saddle approximation within 5/log y across the grid."""
        t0 = time.time()
        details: list[str] = []
        ok = True
        worst = 0.0
        for x in (10**4, 10**6, 10**8):
            for u in (2, 3, 4, 5, 6):
                y = max(3, round(x ** (1.0 / u)))
                gap = abs(solve_saddle(x, y, table=self.table).alpha - saddle_approx(x, y))
                tol = 5.0 / math.log(y)
                worst = max(worst, gap * math.log(y) / 5.0)
                if gap > tol:
                    ok = False
                    details.append(f"x={x} y={y}: |solve - approx| = {gap!r} > {tol!r}")
        details.append(f"max |solve - approx| / (5/log y) over grid = {worst!r} (<= 1: {ok})")
        return CheckResult(9, "saddle-point approximation", ok, time.time() - t0, details)

    def check_10(self) -> CheckResult:
        """Recorded-constant checks for the x-dilation and short-window bounds."""
        t0 = time.time()
        details: list[str] = []
        ok = True

        # Dilation in x: psi(x/d, y) <= C * d^-alpha * psi(x, y).
        xs = (10**4, 10**5, 10**6)
        per_x: list[float] = []
        for x in xs:
            worst = 0.0
            for u in (2, 3):
                y = round(x ** (1.0 / u))
                alpha = solve_saddle(x, y, table=self.table).alpha
                base = psi_exact(SmoothQuery(x=x, y=y), self.table)
                for d in (2, 4, 8, 16):
                    ratio = psi_exact(SmoothQuery(x=x // d, y=y), self.table) * d**alpha / base
                    worst = max(worst, ratio)
            per_x.append(worst)
            details.append(f"dilation constant at x={x}: {worst!r}")
        c_dil = max(per_x)
        stable = not all(a < b for a, b in zip(per_x, per_x[1:])) or max(per_x) / min(per_x) <= 4.0
        ok &= math.isfinite(c_dil) and stable
        details.append(f"recorded dilation C = {c_dil!r} (finite, stable: {stable})")

        # Short windows: (1/h) count <= C * psi(x,y) / (x delta log y).
        per_x2: list[float] = []
        for x in (10**5, 10**6):
            worst = 0.0
            for u in (2, 3):
                y = round(x ** (1.0 / u))
                base = psi_exact(SmoothQuery(x=x, y=y), self.table)
                for delta in (0.1, 0.2):
                    lo = y**delta
                    for h in (max(1, round(x / y ** (1.0 / 3.0))), x // 4):
                        lhs = count_restricted_interval(x, h, lo, y, self.table) / h
                        rhs = base / (x * delta * math.log(y))
                        worst = max(worst, lhs / rhs)
            per_x2.append(worst)
            details.append(f"short-window constant at x={x}: {worst!r}")
        c_win = max(per_x2)
        stable2 = not all(a < b for a, b in zip(per_x2, per_x2[1:])) or max(per_x2) / min(per_x2) <= 4.0
        ok &= math.isfinite(c_win) and stable2
        details.append(f"recorded short-window C = {c_win!r} (finite, stable: {stable2})")
        return CheckResult(10, "recorded-constant comparisons", ok, time.time() - t0, details)

    def check_11(self) -> CheckResult:
        """Cancellation trend at x = 10^6: ratios below 1, decreasing, slope <= -0.1."""
        t0 = time.time()
        n = self._n(2000, 300)
        rows = cancellation_report(10**6, [2, 3, 4, 5, 6], n, SEED_DEFAULT, self.table, threads=self.threads)
        details = [
            f"u={r.u:.3f} y={r.y} psi={r.psi} ratio={r.ratio!r} +- {r.abs_moment.stderr / math.sqrt(r.psi)!r} predicted={r.predicted_saving!r}"
            for r in rows
        ]
        below = all(
            r.ratio <= 1.0 + 3.0 * r.abs_moment.stderr / r.abs_moment.mean for r in rows
        )
        details.append(f"ratio <= 1 + 3 rel stderr everywhere: {below}")

        # Decreasing beyond noise: no step may rise by more than 3 sigma and the
        # full drop across the grid must clear 3 sigma.
        no_rise = True
        for a, b in zip(rows, rows[1:]):
            sig = math.hypot(
                a.abs_moment.stderr / math.sqrt(a.psi), b.abs_moment.stderr / math.sqrt(b.psi)
            )
            if b.ratio - a.ratio > 3.0 * sig:
                no_rise = False
                details.append(f"ratio rose beyond 3 sigma at u {a.u:.2f} -> {b.u:.2f}")
        first, last = rows[0], rows[-1]
        sig_total = math.hypot(
            first.abs_moment.stderr / math.sqrt(first.psi),
            last.abs_moment.stderr / math.sqrt(last.psi),
        )
        total_drop = first.ratio - last.ratio
        trend = no_rise and total_drop > 3.0 * sig_total
        details.append(
            f"no 3-sigma rise: {no_rise}; total drop {total_drop!r} > 3 sigma ({3 * sig_total!r}): {total_drop > 3 * sig_total}"
        )

        slope = float(np.polyfit([r.u for r in rows], [math.log(r.ratio) for r in rows], 1)[0])
        slope_ok = slope <= -0.1
        details.append(f"log-ratio slope = {slope!r} <= -0.1: {slope_ok}")
        ok = below and trend and slope_ok
        return CheckResult(11, "cancellation trend", ok, time.time() - t0, details)

    def check_12(self) -> CheckResult:
        """Reproducibility: re-running every check with the same seeds gives
        byte-identical reports."""
        t0 = time.time()
        details: list[str] = []
        ok = True
        for cid in range(1, 12):
            first = self._run_one(cid)  # cached result when the suite already ran it
            second = self._run_one(cid, fresh=True)
            same = first.report() == second.report()
            ok &= same
            details.append(f"criterion {cid} re-run byte-identical: {same}")
        return CheckResult(12, "reproducibility", ok, time.time() - t0, details)

    # -- driver ---------------------------------------------------------------

    def _run_one(self, cid: int, fresh: bool = False) -> CheckResult:
        if not fresh and cid in self._cache:
            return self._cache[cid]
        fn: Callable[[], CheckResult] = getattr(self, f"check_{cid}")
        result = fn()
        if not fresh:
            self._cache[cid] = result
        return result

    def run(self, only: list[int] | None = None) -> list[CheckResult]:
        ids = only if only else list(range(1, 13))
        return [self._run_one(cid) for cid in ids]
