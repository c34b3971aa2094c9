"""Smooth-number counting, saddle-point asymptotics, and Monte Carlo
experiments on cancellation in random multiplicative partial sums."""

from .counting import (
    SmoothQuery,
    count_restricted_interval,
    enumerate_smooth,
    psi,
    psi_exact,
    psi_with_largest_prime_in,
)
from .errors import BracketError, ResourceLimitError, SingularityError, ValidationError
from .moments import (
    MomentEstimate,
    ReportRow,
    cancellation_report,
    dirichlet_l1,
    estimate_abs_moment,
    estimate_ep_integral_moment,
    estimate_ep_moment,
    estimate_power_moment,
    plancherel_check,
    plancherel_tail_bound,
)
from .primes import Factorization, PrimeTable, factorize, largest_prime_factor, sieve
from .rmf import (
    AllFactorsIn,
    LargestFactorIn,
    PhaseAssignment,
    SmoothBasis,
    euler_integral,
    euler_product,
    f_of_n,
    restricted_partial_sum,
    sample_phases,
    smooth_partial_sum,
)
from .saddle import (
    AsymptoticEstimate,
    SaddlePoint,
    dickman_rho,
    ht_estimate,
    log_zeta_trunc,
    psi_ratio_in_y,
    rankin_bound,
    saddle_approx,
    solve_saddle,
    xi,
    zeta_trunc,
)

__version__ = "0.1.0"

__all__ = [
    "AllFactorsIn",
    "AsymptoticEstimate",
    "BracketError",
    "Factorization",
    "LargestFactorIn",
    "MomentEstimate",
    "PhaseAssignment",
    "PrimeTable",
    "ReportRow",
    "ResourceLimitError",
    "SaddlePoint",
    "SingularityError",
    "SmoothBasis",
    "SmoothQuery",
    "ValidationError",
    "cancellation_report",
    "count_restricted_interval",
    "dickman_rho",
    "dirichlet_l1",
    "enumerate_smooth",
    "estimate_abs_moment",
    "estimate_ep_integral_moment",
    "estimate_ep_moment",
    "estimate_power_moment",
    "euler_integral",
    "euler_product",
    "f_of_n",
    "factorize",
    "ht_estimate",
    "largest_prime_factor",
    "log_zeta_trunc",
    "plancherel_check",
    "plancherel_tail_bound",
    "psi",
    "psi_exact",
    "psi_ratio_in_y",
    "psi_with_largest_prime_in",
    "rankin_bound",
    "restricted_partial_sum",
    "saddle_approx",
    "sample_phases",
    "sieve",
    "smooth_partial_sum",
    "solve_saddle",
    "xi",
    "zeta_trunc",
]
