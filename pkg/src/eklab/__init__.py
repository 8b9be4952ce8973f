"""Truncated distributions on [n], divisibility constraints on their
perturbations from uniform, and the normal limit of omega under them."""

__version__ = "0.1.0"

from .errors import (DomainError, EKError, IntegrityError, PreconditionError,
                     ResourceError, UsageError)
from .primes import (OmegaTable, PrimeSums, PrimeTable, alpha_n, build_omega_table,
                     prime_reciprocal_sums, sieve_primes, small_prime_cutoff)
from .families import (FamilySpec, TruncatedPmf, ceiling_pushforward, convex_combine,
                       epsilon, epsilon_multiple_sum, make_pmf, multiple_pmf_sum, reflect,
                       zeroed_at_primes)
from .grammar import format_family, parse_family
from .constraints import check_c4, check_c5, check_c6, uniform_scan
from .moments import (bernoulli_model_moments, moment_gap_study, moment_table, normal_cdf,
                      standardized_cdf, weighted_g_moments)
from .limits import (log_dependence, lz_limit_study, nonexample_control, prime_zeta,
                     zeta_sequence_study)
