"""
Gamma and one-parameter Mittag-Leffler functions on the negative real axis.

E_alpha(z) = sum_n z**n / Gamma(1 + n alpha), 0 < alpha <= 1, z <= 0.

Evaluation regimes, chosen per argument:
- alpha == 1: exp(z)
- Taylor series while the largest term stays below the cancellation limit
- asymptotic expansion, truncated at its smallest term, once that term is negligible
- otherwise the contour integral E_alpha(-x) = L^-1[s**(alpha-1) / (s**alpha + x)](1),
  evaluated with the fixed Talbot rule
"""
import logging
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq
from scipy.special import gammaln

from fracvisco import settings
from fracvisco.errors import DomainError, PoleArgumentError, ValidationError
from fracvisco.talbot import talbot_contour

logger = logging.getLogger(__name__)

# Lanczos approximation, g = 7, n = 9
LANCZOS_G = 7
LANCZOS_COEFFICIENTS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)

ASYMPTOTIC_TOL = 1e-13


@dataclass(frozen=True)
class MLEvalPolicy:
    """
    Accuracy knobs of the Mittag-Leffler evaluation.

    # Fields
    series_max_terms (int): Number of Taylor coefficients
    series_abs_tol (float): Required magnitude of the last Taylor term
    crossover_argument (float): Largest |z| ever handled by the Taylor series
    asymptotic_terms (int): Maximum number of terms of the asymptotic expansion
    contour_nodes (int): Talbot nodes of the integral regime
    cancellation_limit (float): Largest admissible Taylor term magnitude
    """
    series_max_terms: int = settings.ML_SERIES_MAX_TERMS
    series_abs_tol: float = settings.ML_SERIES_ABS_TOL
    crossover_argument: float = settings.ML_CROSSOVER
    asymptotic_terms: int = settings.ML_ASYMPTOTIC_TERMS
    contour_nodes: int = settings.ML_CONTOUR_NODES
    cancellation_limit: float = settings.ML_CANCELLATION_LIMIT

    def __post_init__(self):
        if self.series_max_terms < 2 or self.asymptotic_terms < 1:
            raise ValidationError('series_max_terms must be >= 2 and asymptotic_terms >= 1')
        if not self.series_abs_tol > 0.0:
            raise ValidationError(f'series_abs_tol must be > 0, got {self.series_abs_tol}')
        if not self.crossover_argument > 0.0:
            raise ValidationError(
                f'crossover_argument must be > 0, got {self.crossover_argument}')
        if self.contour_nodes < 8:
            raise ValidationError(f'contour_nodes must be >= 8, got {self.contour_nodes}')
        if not self.cancellation_limit >= 1.0:
            raise ValidationError('cancellation_limit must be >= 1')


DEFAULT_POLICY = MLEvalPolicy()


def _is_pole(x):
    return (x <= 0.0) & (x == np.floor(x))


def _lanczos(x):
    """Gamma(x) for x >= 0.5"""
    x = x - 1.0
    series = np.full_like(x, LANCZOS_COEFFICIENTS[0])
    for i, coefficient in enumerate(LANCZOS_COEFFICIENTS[1:], start=1):
        series = series + coefficient / (x + i)
    t = x + LANCZOS_G + 0.5
    with np.errstate(over='ignore'):
        return math.sqrt(2.0 * math.pi) * t**(x + 0.5) * np.exp(-t) * series


def gamma_fn(x):
    """
    Gamma function by the Lanczos approximation, with reflection for x < 1/2.

    # Arguments
    x (float or array): Argument, not a non-positive integer

    # Returns
    Gamma(x), same shape as x
    """
    arr = np.asarray(x, dtype=float)
    if np.any(_is_pole(arr)):
        raise PoleArgumentError(f'Gamma function has a pole at {x}')

    flat = np.atleast_1d(arr).ravel()
    reflect = flat < 0.5
    result = np.empty_like(flat)
    result[~reflect] = _lanczos(flat[~reflect])
    xr = flat[reflect]
    result[reflect] = math.pi / (np.sin(math.pi * xr) * _lanczos(1.0 - xr))

    if arr.ndim == 0:
        return float(result[0])
    return result.reshape(arr.shape)


def rgamma_fn(x):
    """
    Reciprocal Gamma function, 0 at the poles of Gamma.
    """
    arr = np.asarray(x, dtype=float)
    flat = np.atleast_1d(arr).ravel()
    pole = _is_pole(flat)
    reflect = (flat < 0.5) & ~pole
    direct = flat >= 0.5

    result = np.zeros_like(flat)
    with np.errstate(over='ignore'):
        result[direct] = 1.0 / _lanczos(flat[direct])
        xr = flat[reflect]
        result[reflect] = np.sin(math.pi * xr) * _lanczos(1.0 - xr) / math.pi

    if arr.ndim == 0:
        return float(result[0])
    return result.reshape(arr.shape)


def _check_domain(alpha, z):
    if not 0.0 < alpha <= 1.0:
        raise DomainError(f'Mittag-Leffler order must be in (0, 1], got {alpha}')
    z_arr = np.asarray(z, dtype=float)
    if np.any(z_arr > 0.0) or np.any(np.isnan(z_arr)):
        raise DomainError('Mittag-Leffler argument must satisfy z <= 0')
    return z_arr


@lru_cache(maxsize=256)
def _series_coefficients(alpha, n_terms):
    """1 / Gamma(1 + n alpha), n = 0 .. n_terms - 1"""
    coefficients = rgamma_fn(1.0 + alpha * np.arange(n_terms))
    coefficients.setflags(write=False)
    return coefficients


@lru_cache(maxsize=256)
def _series_limit(alpha, policy):
    """
    Largest |z| for which the Taylor series is both converged after series_max_terms
    terms and free of cancellation beyond policy.cancellation_limit.
    """
    n = np.arange(policy.series_max_terms, dtype=float)
    log_coefficients = -gammaln(1.0 + alpha * n)

    def log_largest_term(log_x):
        return np.max(n * log_x + log_coefficients) - math.log(policy.cancellation_limit)

    log_crossover = math.log(policy.crossover_argument)
    if log_largest_term(log_crossover) <= 0.0:
        log_a = log_crossover
    else:
        log_a = brentq(log_largest_term, -50.0, log_crossover)

    last = policy.series_max_terms - 1
    log_b = (math.log(policy.series_abs_tol) - log_coefficients[last]) / last

    limit = math.exp(min(log_crossover, log_a, log_b))
    logger.debug(f'Mittag-Leffler series limit for alpha={alpha}: |z| <= {limit:.4g}')
    return limit


def _series(alpha, z, policy, derivative):
    coefficients = _series_coefficients(alpha, policy.series_max_terms)
    if derivative:
        coefficients = coefficients[1:] * np.arange(1, coefficients.size)
    result = np.zeros_like(z)
    for coefficient in coefficients[::-1]:
        result = result * z + coefficient
    return result


def _asymptotic(alpha, x, policy, derivative):
    """
    Smallest-term truncated expansion
        E_alpha(-x)  ~ sum_k (-1)**(k+1) x**(-k) / Gamma(1 - k alpha)
        E_alpha'(-x) ~ sum_k (-1)**(k+1) k x**(-k-1) / Gamma(1 - k alpha)

    # Returns
    (values, accepted) where accepted marks arguments with a negligible smallest term

    Truncation looks at the envelope Gamma(k alpha) x**(-k) / pi of the terms, since
    1 / Gamma(1 - k alpha) = Gamma(k alpha) sin(pi k alpha) / pi vanishes or nearly
    vanishes whenever k alpha is close to an integer.
    """
    k = np.arange(1, policy.asymptotic_terms + 1, dtype=float)
    signs = np.where(k % 2 == 1, 1.0, -1.0)
    coefficients = signs * rgamma_fn(1.0 - k * alpha)
    log_envelope = gammaln(k * alpha) - math.log(math.pi)
    if derivative:
        coefficients = coefficients * k
        log_envelope = log_envelope + np.log(k)
        powers = k + 1.0
    else:
        powers = k

    log_x_powers = np.outer(np.log(x), powers)
    log_envelope = log_envelope[None, :] - log_x_powers
    with np.errstate(over='ignore', under='ignore', invalid='ignore'):
        terms = coefficients[None, :] * np.exp(-log_x_powers)

    smallest = np.argmin(log_envelope, axis=1)
    keep = np.arange(k.size)[None, :] < smallest[:, None]
    values = np.where(keep, terms, 0.0).sum(axis=1)
    accepted = log_envelope[np.arange(x.size), smallest] <= math.log(ASYMPTOTIC_TOL)
    accepted &= np.isfinite(values)
    return values, accepted


def _contour(alpha, x, policy, derivative):
    s, weights, factor = talbot_contour(1.0, policy.contour_nodes)
    s, weights = s[0], weights[0]
    s_alpha = s**alpha
    denominator = s_alpha[None, :] + x[:, None]
    power = 2 if derivative else 1
    transform = s**(alpha - 1.0) / denominator**power
    return factor[0] * (transform @ weights).real


def _evaluate(alpha, z, policy, derivative):
    z_arr = _check_domain(alpha, z)
    if alpha == 1.0:
        result = np.exp(z_arr)
        return float(result) if result.ndim == 0 else result

    flat = np.atleast_1d(z_arr).ravel()
    result = np.empty_like(flat)
    x = -flat

    in_series = x <= _series_limit(alpha, policy)
    result[in_series] = _series(alpha, flat[in_series], policy, derivative)

    outside = np.flatnonzero(~in_series)
    if outside.size:
        values, accepted = _asymptotic(alpha, x[outside], policy, derivative)
        result[outside[accepted]] = values[accepted]
        remaining = outside[~accepted]
        if remaining.size:
            result[remaining] = _contour(alpha, x[remaining], policy, derivative)

    if z_arr.ndim == 0:
        return float(result[0])
    return result.reshape(z_arr.shape)


def ml(alpha, z, policy=DEFAULT_POLICY):
    """
    Mittag-Leffler function E_alpha(z) for alpha in (0, 1] and real z <= 0.

    # Arguments
    alpha (float): Order, 0 < alpha <= 1
    z (float or array): Non-positive argument(s)
    policy (MLEvalPolicy): Evaluation policy

    # Returns
    E_alpha(z) in (0, 1], absolute error below 1e-10 on [-50, 0]
    """
    return _evaluate(alpha, z, policy, derivative=False)


def ml_deriv(alpha, z, policy=DEFAULT_POLICY):
    """
    Derivative E_alpha'(z) = sum_{n>=1} n z**(n-1) / Gamma(1 + n alpha), positive for z <= 0.
    """
    return _evaluate(alpha, z, policy, derivative=True)
