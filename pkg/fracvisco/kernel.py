"""
Fractional relaxation kernels of the Zener model

    beta(t) = gamma (alpha/tau) (t/tau)**(alpha-1) E_alpha'(-(t/tau)**alpha)
    xi(t)   = gamma - int_0^t beta = gamma E_alpha(-(t/tau)**alpha)

their integrals and Laplace transforms, discrete convolution weights and
the diagnostics of the kernel hypotheses (positive type, complete
monotonicity, integral condition).
"""
import enum
import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import toeplitz
from tqdm import tqdm

from fracvisco import settings
from fracvisco.errors import DomainError, SingularKernelError, ValidationError
from fracvisco.special_functions import ml, ml_deriv
from fracvisco.utils import checked_quad

logger = logging.getLogger(__name__)

QUAD_TOLERANCES = {'epsabs': 1e-12, 'epsrel': 1e-10}


@dataclass(frozen=True)
class KernelParams:
    """
    One fractional relaxation kernel.

    # Fields
    gamma (float): Relaxation strength, 0 < gamma < 1
    tau (float): Relaxation time in seconds, > 0
    alpha (float): Fractional order, 0 < alpha <= 1 (1 is the exponential kernel)
    """
    gamma: float
    tau: float
    alpha: float

    def __post_init__(self):
        if not 0.0 < self.gamma < 1.0:
            raise ValidationError(f'gamma must be in (0, 1), got {self.gamma}')
        if not self.tau > 0.0:
            raise ValidationError(f'tau must be > 0, got {self.tau}')
        if not 0.0 < self.alpha <= 1.0:
            raise ValidationError(f'alpha must be in (0, 1], got {self.alpha}')

    @property
    def smooth(self):
        return self.alpha == 1.0


class ConvolutionKind(enum.Enum):
    PRODUCT_INTEGRATION = 'product_integration'
    CQ_BDF1 = 'cq_bdf1'
    CQ_BDF2 = 'cq_bdf2'


@dataclass(frozen=True, eq=False)
class ConvolutionRule:
    """
    Per-lag weights discretizing (beta * u)(t_n) on a uniform grid.

    product_integration: weights[l] = int_{l dt}^{(l+1) dt} beta, applied to the
    interval averages (u_j + u_{j+1}) / 2.
    cq_bdf1, cq_bdf2: convolution quadrature weights applied to the samples u_j.
    """
    kind: ConvolutionKind
    dt: float
    n_steps: int
    weights: np.ndarray

    def __post_init__(self):
        if not self.dt > 0.0:
            raise ValidationError(f'dt must be > 0, got {self.dt}')
        if self.n_steps < 1:
            raise ValidationError(f'n_steps must be >= 1, got {self.n_steps}')
        weights = np.array(self.weights, dtype=float)
        if weights.shape != (self.n_steps + 1, ):
            raise ValidationError(
                f'Expected {self.n_steps + 1} weights, got array of shape {weights.shape}')
        weights.setflags(write=False)
        object.__setattr__(self, 'weights', weights)

    @property
    def newest_coefficient(self):
        """Factor multiplying the newest sample u_n in convolve()"""
        if self.kind is ConvolutionKind.PRODUCT_INTEGRATION:
            return 0.5 * self.weights[0]
        return self.weights[0]

    def convolve(self, samples):
        """
        Discrete convolution at the time of the last sample.

        # Arguments
        samples (array): u_0 .. u_n, shape (n+1,) or (n+1, m)

        # Returns
        Approximation of (beta * u)(t_n), shape () or (m,)
        """
        samples = np.asarray(samples, dtype=float)
        n = samples.shape[0] - 1
        if self.kind is ConvolutionKind.PRODUCT_INTEGRATION:
            if n > self.n_steps + 1:
                raise ValidationError(f'Rule has weights for {self.n_steps + 1} intervals only')
            if n == 0:
                return np.zeros(samples.shape[1:])
            averages = 0.5 * (samples[:-1] + samples[1:])
            return self.weights[n - 1::-1] @ averages
        if n > self.n_steps:
            raise ValidationError(f'Rule has weights for {self.n_steps} steps only')
        return self.weights[n::-1] @ samples


def _scalar_or_array(value, scalar):
    return float(value) if scalar else value


def beta_eval(k, t):
    """
    Relaxation kernel beta(t).

    # Arguments
    k (KernelParams): Kernel
    t (float or array): Times, > 0 (t = 0 is admitted for alpha = 1)

    # Returns
    beta(t) >= 0
    """
    scalar = np.ndim(t) == 0
    t = np.asarray(t, dtype=float)
    if k.smooth:
        if np.any(t < 0.0):
            raise DomainError('beta is defined for t >= 0')
        return _scalar_or_array(k.gamma / k.tau * np.exp(-t / k.tau), scalar)

    if np.any(t <= 0.0):
        raise DomainError(f'beta is singular at t = 0 for alpha = {k.alpha}')
    scaled = t / k.tau
    value = k.gamma * k.alpha / k.tau * scaled**(k.alpha - 1.0) * ml_deriv(
        k.alpha, -scaled**k.alpha)
    return _scalar_or_array(value, scalar)


def _beta_regular_part(k, t):
    """beta(t) / t**(alpha - 1), bounded at t = 0"""
    scaled = t / k.tau
    return k.gamma * k.alpha * k.tau**(-k.alpha) * ml_deriv(k.alpha, -scaled**k.alpha)


def xi_eval(k, t):
    """
    Antiderivative kernel xi(t) = gamma E_alpha(-(t/tau)**alpha); xi(0) = gamma and
    xi(inf) = 0.
    """
    scalar = np.ndim(t) == 0
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(t < 0.0) or np.any(np.isnan(t)):
        raise DomainError('xi is defined for t >= 0')

    value = np.zeros_like(t)
    finite = np.isfinite(t)
    value[finite] = k.gamma * ml(k.alpha, -(t[finite] / k.tau)**k.alpha)
    if scalar:
        return float(value[0])
    return value


def beta_integral(k, t0, t1):
    """
    int_{t0}^{t1} beta(s) ds = xi(t0) - xi(t1); t1 may be infinite.
    """
    if t0 < 0.0:
        raise DomainError(f'Integration bounds must be >= 0, got t0 = {t0}')
    if t1 < t0:
        raise DomainError(f'Integration bounds out of order: t0 = {t0} > t1 = {t1}')
    if t1 == t0:
        return 0.0
    return max(xi_eval(k, t0) - xi_eval(k, t1), 0.0)


def beta_integral_quadrature(k, t0, t1, split=None):
    """
    int_{t0}^{t1} beta(s) ds by adaptive quadrature, independent of xi_eval.

    Near t = 0 the factor t**(alpha-1) is integrated as an algebraic weight on
    [0, split]; the remainder is integrated directly, an infinite tail after
    the substitution t = t0 u**(-1/alpha).

    # Arguments
    k (KernelParams): Kernel
    t0, t1 (float): Bounds, 0 <= t0 <= t1 (t1 may be infinite)
    split (float): End of the weighted interval, defaults to tau
    """
    if t1 < t0 or t0 < 0.0:
        raise DomainError(f'Invalid integration bounds [{t0}, {t1}]')
    if t1 == t0:
        return 0.0

    total, lower = 0.0, t0
    if not k.smooth and t0 == 0.0:
        lower = min(k.tau if split is None else split, t1)
        total = checked_quad(lambda s: _beta_regular_part(k, s),
                             0.0,
                             lower,
                             weight='alg',
                             wvar=(k.alpha - 1.0, 0.0),
                             **QUAD_TOLERANCES)
    if math.isinf(t1):
        if lower < k.tau:
            total += checked_quad(lambda s: beta_eval(k, s), lower, k.tau, **QUAD_TOLERANCES)
            lower = k.tau
        return total + _tail_quadrature(k, lower)
    if t1 > lower:
        total += checked_quad(lambda s: beta_eval(k, s), lower, t1, **QUAD_TOLERANCES)
    return total


def _tail_quadrature(k, t0):
    """int_{t0}^inf beta with t = t0 u**(-1/alpha), which leaves a bounded integrand on (0, 1]"""
    power = 1.0 / k.alpha

    def integrand(u):
        return beta_eval(k, t0 * u**(-power)) * t0 * power * u**(-power - 1.0)

    return checked_quad(integrand, 0.0, 1.0, **QUAD_TOLERANCES)


def beta_laplace(k, s, strict=True):
    """
    Laplace transform gamma / ((tau s)**alpha + 1), principal branch.

    # Arguments
    k (KernelParams): Kernel
    s (float, complex or array): Transform variable
    strict (bool): Require Re(s) > 1/tau, the region of guaranteed convergence.
                   The Laplace oracle evaluates along a contour and passes False.

    # Returns
    Transform values, in (0, 1) for real s > 1/tau
    """
    scalar = np.ndim(s) == 0
    s = np.asarray(s)
    if strict and np.any(np.real(s) <= 1.0 / k.tau):
        raise DomainError(f'Kernel transform requires Re(s) > 1/tau = {1.0 / k.tau}')
    value = k.gamma / ((k.tau * s)**k.alpha + 1.0)
    if scalar:
        return complex(value) if np.iscomplexobj(value) else float(value)
    return value


def laplace_quadrature(k, s, split=None):
    """
    int_0^inf exp(-s t) beta(t) dt for real s > 0 by adaptive quadrature,
    weighted by t**(alpha-1) on [0, split] (default tau).
    """
    if not s > 0.0:
        raise DomainError(f'Quadrature of the transform needs real s > 0, got {s}')
    split = k.tau if split is None else split

    if k.smooth:
        head = checked_quad(lambda t: math.exp(-s * t) * beta_eval(k, t), 0.0, split,
                            **QUAD_TOLERANCES)
    else:
        head = checked_quad(lambda t: math.exp(-s * t) * _beta_regular_part(k, t),
                            0.0,
                            split,
                            weight='alg',
                            wvar=(k.alpha - 1.0, 0.0),
                            **QUAD_TOLERANCES)
    tail = checked_quad(lambda t: math.exp(-s * t) * beta_eval(k, t), split, np.inf,
                        **QUAD_TOLERANCES)
    return head + tail


def beta_derivative_at_zero(k, order):
    """
    d^j beta / dt^j at t = 0, which exists for the exponential kernel only.

    # Raises
    SingularKernelError for alpha < 1
    """
    if order < 0:
        raise DomainError(f'Derivative order must be >= 0, got {order}')
    if not k.smooth:
        raise SingularKernelError(
            f'beta is weakly singular at t = 0 for alpha = {k.alpha}, '
            'its derivatives at 0 do not exist')
    return k.gamma / k.tau * (-1.0 / k.tau)**order


def product_weights(k, dt, n):
    """
    Product-integration weights w_l = xi(l dt) - xi((l+1) dt), l = 0 .. n.

    The kernel is integrated in closed form over every step, so the
    t**(alpha-1) singularity costs no quadrature error.

    # Return type
    ConvolutionRule
    """
    if not dt > 0.0 or n < 1:
        raise ValidationError(f'Need dt > 0 and n >= 1, got dt = {dt}, n = {n}')
    xi = xi_eval(k, dt * np.arange(n + 2))
    weights = np.maximum(xi[:-1] - xi[1:], 0.0)
    return ConvolutionRule(ConvolutionKind.PRODUCT_INTEGRATION, dt, n, weights)


def _bdf_symbol(zeta, order):
    if order == 1:
        return 1.0 - zeta
    return 1.5 - 2.0 * zeta + 0.5 * zeta**2


def cq_weights(k, dt, n, order=1):
    """
    Convolution quadrature weights: the Taylor coefficients of
    zeta -> beta_hat(delta(zeta) / dt) with the BDF1 or BDF2 generating
    polynomial delta, extracted by FFT on a circle of radius
    eps**(1/(2N)), N = n + 1.

    # Return type
    ConvolutionRule
    """
    if not dt > 0.0 or n < 1:
        raise ValidationError(f'Need dt > 0 and n >= 1, got dt = {dt}, n = {n}')
    if order not in (1, 2):
        raise ValidationError(f'CQ order must be 1 or 2, got {order}')

    n_weights = n + 1
    size = 2 * n_weights
    radius = settings.CQ_RADIUS_EPS**(1.0 / size)
    zeta = radius * np.exp(2j * np.pi * np.arange(size) / size)
    symbol = beta_laplace(k, _bdf_symbol(zeta, order) / dt, strict=False)

    coefficients = np.fft.fft(symbol)[:n_weights] / size
    weights = (coefficients * radius**(-np.arange(n_weights))).real

    kind = ConvolutionKind.CQ_BDF1 if order == 1 else ConvolutionKind.CQ_BDF2
    return ConvolutionRule(kind, dt, n, weights)


def convolution_rule(k, kind, dt, n):
    """
    Build the ConvolutionRule of the given kind.
    """
    kind = ConvolutionKind(kind)
    if kind is ConvolutionKind.PRODUCT_INTEGRATION:
        return product_weights(k, dt, n)
    return cq_weights(k, dt, n, order=1 if kind is ConvolutionKind.CQ_BDF1 else 2)


def _uniform_step(t_grid, min_points):
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or t_grid.size < min_points:
        raise ValidationError(f'Need a uniform grid of at least {min_points} points')
    steps = np.diff(t_grid)
    if np.any(steps <= 0.0) or not np.allclose(steps, steps[0], rtol=1e-9, atol=0.0):
        raise ValidationError('Time grid must be uniform and increasing')
    return t_grid, steps[0]


@dataclass(frozen=True)
class PositiveTypeReport:
    """
    min_quadratic_form is the smallest of the quadratic forms
    sum_n sum_{m<=n} xi(t_n - t_m) phi_n phi_m dt**2, each divided by dt**2 |phi|**2.
    """
    min_quadratic_form: float
    trials: int
    tolerance: float

    @property
    def passed(self):
        return self.min_quadratic_form >= -self.tolerance


def positive_type_check(k, t_grid, trials, rng_seed, tol=settings.POSITIVE_TYPE_TOL,
                        progress=False):
    """
    Test the positive-type inequality of xi on random grid functions.

    # Arguments
    k (KernelParams): Kernel
    t_grid (array): Uniform grid, at least 4 points
    trials (int): Number of random grid functions
    rng_seed (int): Seed of the random grid functions
    tol (float): Admitted negative part of the normalized quadratic form
    progress (bool): Show a progress bar

    # Return type
    PositiveTypeReport
    """
    # pylint: disable=too-many-arguments
    t_grid, _ = _uniform_step(t_grid, 4)
    if trials < 1:
        raise ValidationError(f'trials must be >= 1, got {trials}')

    lower = np.tril(toeplitz(xi_eval(k, t_grid - t_grid[0])))
    rng = np.random.default_rng(rng_seed)

    minimum = math.inf
    for _ in tqdm(range(trials), desc='positive type', disable=not progress):
        phi = rng.standard_normal(t_grid.size)
        norm = phi @ phi
        # dt**2 cancels in the normalization
        minimum = min(minimum, (phi @ lower @ phi) / norm if norm > 0.0 else 0.0)

    logger.info(f'positive type: min normalized quadratic form {minimum:.3e} over {trials} trials')
    return PositiveTypeReport(minimum, trials, tol)


@dataclass(frozen=True)
class MonotonicityReport:
    order: int
    min_signed_difference: float
    tolerance: float

    @property
    def passed(self):
        return self.min_signed_difference >= -self.tolerance


def monotonicity_check(k, order_j, t_grid, tol=settings.MONOTONICITY_TOL):
    """
    Sign check of complete monotonicity: (-1)**j times the j-th finite
    difference of xi on a uniform grid must not be negative.

    # Return type
    MonotonicityReport
    """
    if order_j not in (1, 2, 3, 4):
        raise ValidationError(f'Difference order must be in 1..4, got {order_j}')
    t_grid, _ = _uniform_step(t_grid, order_j + 1)

    signed = (-1.0)**order_j * np.diff(xi_eval(k, t_grid), n=order_j)
    report = MonotonicityReport(order_j, float(signed.min()), tol)
    if not report.passed:
        logger.warning(f'xi violates the sign condition of order {order_j}: '
                       f'min {report.min_signed_difference:.3e}')
    return report


@dataclass(frozen=True)
class BetaConditionReport:
    sum_integrals: float
    max_integral: float

    @property
    def satisfied(self):
        return self.sum_integrals < 1.0 or self.max_integral < 0.5


def _max_kernel_integral(kernels, T):
    """int_0^T max_i beta_i(s) ds with s = T u**(1/alpha_min) removing the singularity"""
    alpha_min = min(k.alpha for k in kernels)
    power = 1.0 / alpha_min

    def integrand(u):
        s = T * u**power
        jacobian = T * power * u**(power - 1.0)
        return max(beta_eval(k, s) for k in kernels) * jacobian

    return checked_quad(integrand, 0.0, 1.0, **QUAD_TOLERANCES)


def beta_condition(kernels, T):
    """
    Evaluate both alternatives of the kernel condition of the regularity theory,
    sum_i int_0^T beta_i < 1 or int_0^T max_i beta_i < 1/2.

    # Return type
    BetaConditionReport
    """
    if T < 0.0:
        raise DomainError(f'T must be >= 0, got {T}')
    kernels = list(kernels)
    if not kernels or T == 0.0:
        return BetaConditionReport(0.0, 0.0)

    integrals = [beta_integral(k, 0.0, T) for k in kernels]
    if len(kernels) == 1:
        max_integral = integrals[0]
    else:
        max_integral = _max_kernel_integral(kernels, T)
    return BetaConditionReport(float(sum(integrals)), max_integral)
