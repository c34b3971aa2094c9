"""Seeded Steinhaus random multiplicative function samples and Euler products.

A Steinhaus sample assigns each prime an independent uniform phase on the
unit circle; the function extends completely multiplicatively, so the value
at n = prod p^a is exp(2 pi i * sum a * theta_p).  Phases are stored in turns
([0, 1)) and all phase arithmetic is reduced mod 1 before the single complex
exponential, which keeps large exponents exact.

Phases come from a counter-based generator keyed by (seed, stream_id, prime
index): any prime's phase is computable without sequential draws, so distinct
Monte Carlo streams are reproducible bit-exactly on any worker layout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .counting import _Budget, DEFAULT_ENUM_CAP
from .errors import SingularityError, ValidationError
from .primes import PrimeTable, factorize

TWO_PI = 2.0 * math.pi
_U64 = np.uint64
_GAMMA = 0x9E3779B97F4A7C15  # splitmix64 increment
_MASK64 = (1 << 64) - 1


def _mix64(z: np.ndarray) -> np.ndarray:
    """splitmix64 finalizer, vectorized on uint64 arrays (wrapping arithmetic)."""
    z = (z ^ (z >> _U64(30))) * _U64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> _U64(27))) * _U64(0x94D049BB133111EB)
    return z ^ (z >> _U64(31))


def phase_values(seed: int, stream_id: int, indices: np.ndarray) -> np.ndarray:
    """Phases in [0,1) for the given prime indices, as float64 with 53 random bits."""
    with np.errstate(over="ignore"):
        base = _mix64(np.array([(seed & _MASK64)], dtype=np.uint64) + _U64(_GAMMA))
        base = _mix64(base ^ (np.array([(stream_id & _MASK64)], dtype=np.uint64) + _U64(0xD1B54A32D192ED03)))
        ctr = indices.astype(np.uint64) + _U64(1)
        h = _mix64(base + ctr * _U64(_GAMMA))
    return (h >> _U64(11)).astype(np.float64) * 2.0**-53


@dataclass(frozen=True)
class PhaseAssignment:
    """One Steinhaus sample over a fixed ascending prime list.

    phases[i] is the phase of primes[i] in turns.  Reproducible bit-exactly
    from (seed, stream_id) over the same prime list.
    """

    seed: int
    stream_id: int
    primes: np.ndarray
    phases: np.ndarray
    bound: int = 0  # smoothness bound the prime list was built for; 0 means y_max

    @property
    def y_max(self) -> int:
        return int(self.primes[-1]) if self.primes.size else 0

    @property
    def cover(self) -> int:
        """Largest y this sample is valid for (all primes <= y are present)."""
        return self.bound if self.bound else self.y_max

    def primes_leq(self, y) -> np.ndarray:
        return self.primes[: int(np.searchsorted(self.primes, y, side="right"))]

    def phases_leq(self, y) -> np.ndarray:
        return self.phases[: int(np.searchsorted(self.primes, y, side="right"))]

    def phase_of(self, p: int) -> float:
        i = int(np.searchsorted(self.primes, p))
        if i >= self.primes.size or int(self.primes[i]) != int(p):
            raise ValidationError(f"prime {p} outside phase table (y_max={self.y_max})")
        return float(self.phases[i])

    def translated(self, t: float) -> "PhaseAssignment":
        """Phases shifted so that evaluating any Euler product at s with the
        shifted sample equals evaluating at s + i*t with this sample
        (f(p) p^{-it} is again a Steinhaus sample)."""
        shifted = self.phases - t * np.log(self.primes.astype(np.float64)) / TWO_PI
        shifted -= np.floor(shifted)
        return PhaseAssignment(
            seed=self.seed,
            stream_id=self.stream_id,
            primes=self.primes,
            phases=shifted,
            bound=self.bound,
        )


def sample_phases(
    primes: np.ndarray, seed: int, stream_id: int, bound: int = 0
) -> PhaseAssignment:
    """Deterministic Steinhaus sample for an ascending prime array."""
    primes = np.asarray(primes, dtype=np.int64)
    if primes.size and np.any(np.diff(primes) <= 0):
        raise ValidationError("sample_phases expects a strictly ascending prime array")
    phases = phase_values(seed, stream_id, np.arange(primes.size, dtype=np.uint64))
    return PhaseAssignment(
        seed=seed, stream_id=stream_id, primes=primes, phases=phases, bound=bound
    )


def f_of_n(n: int, phases: PhaseAssignment, table: PrimeTable) -> complex:
    """f(n) = exp(2 pi i * frac(sum a_p theta_p)); unit modulus, f(1) = 1."""
    total = 0.0
    for p, e in factorize(n, table):
        total = math.fmod(total + e * phases.phase_of(p), 1.0)
    return complex(math.cos(TWO_PI * total), math.sin(TWO_PI * total))


@dataclass(frozen=True)
class LargestFactorIn:
    """Constraint P(n) in (lo, hi]; excludes n = 1."""

    lo: int
    hi: int


@dataclass(frozen=True)
class AllFactorsIn:
    """Constraint p | n implies p in (lo, hi]; includes n = 1."""

    lo: int
    hi: int


Constraint = LargestFactorIn | AllFactorsIn | None


class SmoothBasis:
    """Enumerated support of a (possibly constrained) smooth partial sum.

    Stores the admissible n <= x together with their prime-exponent vectors
    as a CSR matrix over a fixed ambient prime list, so one matrix-vector
    product turns a phase assignment into all term phases at once.
    """

    def __init__(
        self,
        x: int,
        primes: np.ndarray,
        constraint: Constraint = None,
        cap: int = DEFAULT_ENUM_CAP,
    ):
        if not (isinstance(x, int) and x >= 0):
            raise ValidationError(f"basis bound must be a non-negative integer, got {x!r}")
        self.x = x
        self.primes = np.asarray(primes, dtype=np.int64)
        self.constraint = constraint
        pl = [int(p) for p in self.primes]
        budget = _Budget(cap)

        values: list[int] = []
        indptr: list[int] = [0]
        idxs: list[int] = []
        expos: list[int] = []

        def emit(n: int, pairs: list[tuple[int, int]]):
            budget.spend()
            values.append(n)
            for j, e in pairs:
                idxs.append(j)
                expos.append(e)
            indptr.append(len(idxs))

        def rec(i: int, bound: int, n: int, pairs: list[tuple[int, int]], k_hi: int):
            emit(n, pairs)
            for j in range(i, k_hi):
                p = pl[j]
                if p > bound:
                    break
                pe, e = p, 1
                while pe <= bound:
                    pairs.append((j, e))
                    rec(j + 1, bound // pe, n * pe, pairs, k_hi)
                    pairs.pop()
                    pe *= p
                    e += 1

        if x >= 1:
            if constraint is None:
                rec(0, x, 1, [], len(pl))
            elif isinstance(constraint, AllFactorsIn):
                lo_i = int(np.searchsorted(self.primes, constraint.lo, side="right"))
                hi_i = int(np.searchsorted(self.primes, constraint.hi, side="right"))

                def rec_win(i, bound, n, pairs):
                    emit(n, pairs)
                    for j in range(i, hi_i):
                        p = pl[j]
                        if p > bound:
                            break
                        pe, e = p, 1
                        while pe <= bound:
                            pairs.append((j, e))
                            rec_win(j + 1, bound // pe, n * pe, pairs)
                            pairs.pop()
                            pe *= p
                            e += 1

                rec_win(lo_i, x, 1, [])
            elif isinstance(constraint, LargestFactorIn):
                lo_i = int(np.searchsorted(self.primes, constraint.lo, side="right"))
                hi_i = int(np.searchsorted(self.primes, constraint.hi, side="right"))
                for j in range(lo_i, hi_i):
                    p = pl[j]
                    if p > x:
                        break
                    # n = p * m with m <= x/p and P(m) <= p: force exponent >= 1 at j.
                    pe, e = p, 1
                    while pe <= x:
                        rec(0, x // pe, pe, [(j, e)], j)
                        pe *= p
                        e += 1
            else:
                raise ValidationError(f"unknown constraint {constraint!r}")

        self.values = np.array(values, dtype=np.int64)
        self.matrix = sp.csr_matrix(
            (
                np.array(expos, dtype=np.float64),
                np.array(idxs, dtype=np.int64),
                np.array(indptr, dtype=np.int64),
            ),
            shape=(len(values), self.primes.size),
        )

    def __len__(self) -> int:
        return int(self.values.size)

    def _aligned_phases(self, phases: PhaseAssignment) -> np.ndarray:
        if phases.primes.size == self.primes.size and np.array_equal(phases.primes, self.primes):
            return phases.phases
        pos = np.searchsorted(phases.primes, self.primes)
        if np.any(pos >= phases.primes.size) or np.any(phases.primes[pos] != self.primes):
            raise ValidationError("phase assignment does not cover the basis primes")
        return phases.phases[pos]

    def term_phases(self, phases: PhaseAssignment) -> np.ndarray:
        """Total phase of each term, reduced mod 1 (turns)."""
        tot = self.matrix.dot(self._aligned_phases(phases))
        tot -= np.floor(tot)
        return tot

    def partial_sum(self, phases: PhaseAssignment) -> complex:
        """Compensated sum of f(n) over the basis (exact-rounding accumulation)."""
        tot = self.term_phases(phases) * TWO_PI
        re = math.fsum(np.cos(tot).tolist())
        im = math.fsum(np.sin(tot).tolist())
        return complex(re, im)


def smooth_partial_sum(x: int, y: int, phases: PhaseAssignment) -> complex:
    """Sum of f(n) over y-smooth n <= x (includes n = 1)."""
    basis = SmoothBasis(x, phases.primes_leq(y))
    return basis.partial_sum(phases)


def restricted_partial_sum(x: int, y: int, phases: PhaseAssignment, constraint: Constraint) -> complex:
    """Sum of f(n) over n <= x with the largest-prime or all-prime window applied."""
    basis = SmoothBasis(x, phases.primes_leq(y), constraint=constraint)
    return basis.partial_sum(phases)


def euler_product(s: complex, y, phases: PhaseAssignment) -> complex:
    """F_y(s) = prod_{p<=y} (1 - f(p) p^{-s})^{-1}, accumulated in the log domain.

    Only the final complex value is contractual; the intermediate argument may
    wind through branches.  Requires Re(s) > 0 and y <= y_max.
    """
    s = complex(s)
    if not s.real > 0:
        raise ValidationError(f"euler_product needs Re(s) > 0, got {s}")
    if y > phases.cover:
        raise ValidationError(f"y={y} beyond phase table (covers y <= {phases.cover})")
    primes = phases.primes_leq(y).astype(np.float64)
    theta = phases.phases_leq(y)
    if primes.size == 0:
        return complex(1.0, 0.0)
    fp = np.exp(2j * math.pi * theta)
    w = 1.0 - fp * np.exp(-s * np.log(primes))
    small = np.abs(w)
    if small.min() < 1e-300:
        raise SingularityError(f"euler factor vanished at p={primes[int(small.argmin())]:.0f}, s={s}")
    log_sum = -np.sum(np.log(w))
    return complex(np.exp(log_sum))


def log_abs_euler_sq(beta: float, t, primes: np.ndarray, theta: np.ndarray) -> np.ndarray:
    """log |F(beta/2 + i t)|^2 for an array of t, via real arithmetic only:
    |1 - a e^{i phi}|^2 = 1 - 2 a cos(phi) + a^2 with a = p^{-beta/2}."""
    logp = np.log(primes.astype(np.float64))
    a = np.exp(-0.5 * beta * logp)
    t_arr = np.atleast_1d(np.asarray(t, dtype=np.float64))
    phi = TWO_PI * theta[None, :] - t_arr[:, None] * logp[None, :]
    fac = 1.0 - 2.0 * a[None, :] * np.cos(phi) + (a * a)[None, :]
    return -np.sum(np.log(fac), axis=1)


def euler_integral(
    beta: float,
    y,
    phases: PhaseAssignment,
    window: tuple[float, float] = (-0.5, 0.5),
    step: float | None = None,
    weight: bool = False,
) -> float:
    """Composite-Simpson value of the window integral of |F_y(beta/2 + it)|^2.

    ``weight`` divides the integrand by |beta/2 + it|^2.  The grid step must
    resolve the decorrelation scale: step <= 1/(8 log y).
    """
    if not beta > 0:
        raise ValidationError(f"euler_integral needs beta > 0, got {beta}")
    t0, t1 = window
    if not t1 > t0:
        raise ValidationError(f"window must satisfy t0 < t1, got {window}")
    max_step = 1.0 / (8.0 * math.log(y))
    if step is None:
        step = max_step
    if step > max_step * (1.0 + 1e-12):
        raise ValidationError(
            f"step {step} too coarse: need step <= 1/(8 log y) = {max_step:.6g}"
        )
    primes = phases.primes_leq(y).astype(np.float64)
    theta = phases.phases_leq(y)
    panels = max(2, int(math.ceil((t1 - t0) / step)))
    if panels % 2:
        panels += 1
    ts = np.linspace(t0, t1, panels + 1)
    g = np.exp(log_abs_euler_sq(beta, ts, primes, theta))
    if weight:
        g = g / ((0.5 * beta) ** 2 + ts * ts)
    w = np.ones(panels + 1)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    h = (t1 - t0) / panels
    return float(h / 3.0 * np.dot(w, g))
