"""
Semi-discrete Galerkin system in modal coordinates

    rho d'' + Lambda d - sum_i B_i (beta_i * d) = f(t) + g(t)

with Lambda = diag(lambda_k), the coupling matrices B_i = a_i(phi_j, phi_k),
modal loads and initial data.
"""
import dataclasses
import logging
import math
from dataclasses import dataclass

import numpy as np

from fracvisco.errors import NotTransformableError, QuadratureError, ValidationError
from fracvisco.kernel import KernelParams, beta_derivative_at_zero
from fracvisco.utils import checked_quad

logger = logging.getLogger(__name__)

SYMMETRY_TOL = 1e-10
SPLIT_TOL = 1e-12

LOAD_PARAMETERS = {
    'zero': (),
    'constant': ('c', ),
    'step': ('c', 't_on'),
    'sinusoid': ('amplitude', 'omega', 'phase'),
    'exponential': ('amplitude', 'rate'),
    'table': ('times', 'values'),
}


@dataclass(frozen=True)
class LoadDescriptor:
    """
    Closed-form or tabulated scalar load channel.

    zero; constant c; step c for t >= t_on; sinusoid amplitude sin(omega t + phase);
    exponential amplitude exp(-rate t); table of samples, linearly interpolated and
    held constant outside the sampled range.
    """
    # pylint: disable=too-many-instance-attributes
    kind: str = 'zero'
    c: float = 0.0
    t_on: float = 0.0
    amplitude: float = 0.0
    omega: float = 0.0
    phase: float = 0.0
    rate: float = 0.0
    times: tuple = ()
    values: tuple = ()

    def __post_init__(self):
        if self.kind not in LOAD_PARAMETERS:
            raise ValidationError(f'Unknown load type {self.kind!r}')
        if self.kind == 'step' and self.t_on < 0.0:
            raise ValidationError(f'Step onset must be >= 0, got {self.t_on}')
        if self.kind == 'table':
            times = np.asarray(self.times, dtype=float)
            if times.size < 2 or times.size != len(self.values):
                raise ValidationError('Load tables need >= 2 samples and matching lengths')
            if np.any(np.diff(times) <= 0.0):
                raise ValidationError('Load table times must be strictly increasing')

    @classmethod
    def from_dict(cls, data):
        data = dict(data)
        kind = data.pop('type', 'zero')
        if kind not in LOAD_PARAMETERS:
            raise ValidationError(f'Unknown load type {kind!r}')
        unknown = set(data) - set(LOAD_PARAMETERS[kind])
        if unknown:
            raise ValidationError(f'Unexpected parameters {sorted(unknown)} for load {kind!r}')
        if kind == 'table':
            data = {key: tuple(float(v) for v in value) for key, value in data.items()}
        else:
            data = {key: float(value) for key, value in data.items()}
        return cls(kind=kind, **data)

    def to_dict(self):
        data = {'type': self.kind}
        for name in LOAD_PARAMETERS[self.kind]:
            value = getattr(self, name)
            data[name] = list(value) if isinstance(value, tuple) else value
        return data

    @property
    def transformable(self):
        return self.kind != 'table'

    def value(self, t):
        return self.derivative(t, 0)

    def derivative(self, t, order):
        """
        order-th time derivative at t. Steps contribute no derivative; tables have
        their piecewise-linear slope as first derivative and no higher ones.
        """
        t = np.asarray(t, dtype=float)
        if self.kind == 'zero':
            result = np.zeros_like(t)
        elif self.kind == 'constant':
            result = np.full_like(t, self.c if order == 0 else 0.0)
        elif self.kind == 'step':
            result = np.where(t >= self.t_on, self.c, 0.0) if order == 0 else np.zeros_like(t)
        elif self.kind == 'sinusoid':
            result = self.amplitude * self.omega**order * np.sin(self.omega * t + self.phase +
                                                                 order * math.pi / 2)
        elif self.kind == 'exponential':
            result = self.amplitude * (-self.rate)**order * np.exp(-self.rate * t)
        else:
            result = self._table_derivative(t, order)
        return float(result) if result.ndim == 0 else result

    def _table_derivative(self, t, order):
        times = np.asarray(self.times)
        values = np.asarray(self.values)
        if order == 0:
            return np.interp(t, times, values)
        if order > 1:
            return np.zeros_like(t)
        slopes = np.diff(values) / np.diff(times)
        segment = np.clip(np.searchsorted(times, t, side='right') - 1, 0, slopes.size - 1)
        inside = (t >= times[0]) & (t < times[-1])
        return np.where(inside, slopes[segment], 0.0)

    def transform(self, s):
        """
        Laplace transform at complex s, Re(s) > 0.

        # Raises
        NotTransformableError for sample tables
        """
        s = np.asarray(s)
        if self.kind == 'zero':
            return np.zeros_like(s, dtype=complex)
        if self.kind == 'constant':
            return self.c / s
        if self.kind == 'step':
            return self.c * np.exp(-s * self.t_on) / s
        if self.kind == 'sinusoid':
            return self.amplitude * (s * math.sin(self.phase) + self.omega * math.cos(
                self.phase)) / (s**2 + self.omega**2)
        if self.kind == 'exponential':
            return self.amplitude / (s + self.rate)
        raise NotTransformableError('Tabulated loads have no closed-form Laplace transform')


@dataclass(frozen=True)
class LoadSignal:
    """
    Modal forcing F_k(t) = f_k(t) + g_k(t): volume and surface channel per mode.
    """
    volume: tuple
    surface: tuple

    def __post_init__(self):
        if len(self.volume) != len(self.surface):
            raise ValidationError(f'{len(self.volume)} volume but {len(self.surface)} '
                                  'surface channels')

    @classmethod
    def zero(cls, n_modes):
        return cls((LoadDescriptor(), ) * n_modes, (LoadDescriptor(), ) * n_modes)

    @property
    def n_modes(self):
        return len(self.volume)

    @property
    def transformable(self):
        return all(channel.transformable for channel in self.volume + self.surface)

    @property
    def vanishes(self):
        return all(channel.kind == 'zero' for channel in self.volume + self.surface)

    def _combine(self, evaluate):
        columns = [evaluate(f) + evaluate(g) for f, g in zip(self.volume, self.surface)]
        return np.stack(columns, axis=-1) if columns else np.zeros(0)

    def evaluate(self, t):
        """
        F(t), shape (m,) for scalar t and (len(t), m) for arrays.
        """
        return self._combine(lambda channel: np.asarray(channel.value(t), dtype=float))

    def transform(self, s):
        """
        Laplace transform of F, shape s.shape + (m,).
        """
        return self._combine(lambda channel: np.asarray(channel.transform(s), dtype=complex))

    def derivatives_at_zero(self, order):
        return self._combine(lambda channel: np.asarray(channel.derivative(0.0, order)))

    def to_dict(self):
        return {
            'volume': [channel.to_dict() for channel in self.volume],
            'surface': [channel.to_dict() for channel in self.surface],
        }

    @classmethod
    def from_dict(cls, data):
        return cls(tuple(LoadDescriptor.from_dict(item) for item in data['volume']),
                   tuple(LoadDescriptor.from_dict(item) for item in data['surface']))


def _frozen_array(value, shape, name):
    array = np.array(value, dtype=float)
    if array.shape != shape:
        raise ValidationError(f'{name} must have shape {shape}, got {array.shape}')
    if not np.all(np.isfinite(array)):
        raise ValidationError(f'{name} contains non-finite entries')
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class ModalSystem:
    """
    Semi-discrete system in a mass-orthonormal eigenbasis.

    # Fields
    rho (float): Mass density
    lam (array): Eigenvalues lambda_k >= 0, shape (m,)
    B1, B2 (array): Coupling matrices a_i(phi_j, phi_k), shape (m, m)
    kernels (tuple): No kernel (elastic), one kernel multiplying both couplings
                     (synchronous viscoelasticity) or one kernel per coupling
    load (LoadSignal): Modal forcing
    d0, v0 (array): Modal initial displacement and velocity
    """
    # pylint: disable=too-many-instance-attributes
    rho: float
    lam: np.ndarray
    B1: np.ndarray
    B2: np.ndarray
    kernels: tuple = ()
    load: LoadSignal = None
    d0: np.ndarray = None
    v0: np.ndarray = None

    def __post_init__(self):
        if not self.rho > 0.0:
            raise ValidationError(f'rho must be > 0, got {self.rho}')
        lam = np.array(self.lam, dtype=float)
        if lam.ndim != 1 or lam.size == 0:
            raise ValidationError('lambda must be a non-empty vector')
        m = lam.size
        if np.any(lam < 0.0):
            raise ValidationError(f'Eigenvalues must be >= 0, got {lam.min()}')
        if np.any(np.diff(lam) < 0.0):
            logger.warning('Eigenvalues are not sorted in non-decreasing order')

        object.__setattr__(self, 'lam', _frozen_array(lam, (m, ), 'lambda'))
        object.__setattr__(self, 'B1', _frozen_array(self.B1, (m, m), 'B1'))
        object.__setattr__(self, 'B2', _frozen_array(self.B2, (m, m), 'B2'))
        zeros = np.zeros(m)
        object.__setattr__(self, 'd0', _frozen_array(zeros if self.d0 is None else self.d0,
                                                     (m, ), 'd0'))
        object.__setattr__(self, 'v0', _frozen_array(zeros if self.v0 is None else self.v0,
                                                     (m, ), 'v0'))

        kernels = tuple(self.kernels)
        if len(kernels) > 2 or not all(isinstance(k, KernelParams) for k in kernels):
            raise ValidationError('A system carries at most two KernelParams')
        object.__setattr__(self, 'kernels', kernels)

        load = LoadSignal.zero(m) if self.load is None else self.load
        if load.n_modes != m:
            raise ValidationError(f'Load has {load.n_modes} modes, system has {m}')
        object.__setattr__(self, 'load', load)

    @property
    def n_modes(self):
        return self.lam.size

    @property
    def stiffness(self):
        return np.diag(self.lam)

    @property
    def couplings(self):
        """
        (kernel, matrix) pairs of the memory terms. A single kernel multiplies
        B1 + B2.
        """
        if not self.kernels:
            return []
        if len(self.kernels) == 1:
            return [(self.kernels[0], self.B1 + self.B2)]
        return [(self.kernels[0], self.B1), (self.kernels[1], self.B2)]

    @property
    def gamma_bar(self):
        return max((k.gamma for k in self.kernels), default=0.0)

    @property
    def tau_min(self):
        return min((k.tau for k in self.kernels), default=math.inf)

    def with_initial(self, d0, v0):
        return dataclasses.replace(self, d0=d0, v0=v0)

    def with_load(self, load):
        return dataclasses.replace(self, load=load)


def _kernel_list(kernels):
    kernels = tuple(kernels or ())
    if len(kernels) > 2:
        raise ValidationError(f'At most two kernels are supported, got {len(kernels)}')
    return kernels


def assemble_bar(n_modes,
                 length,
                 c2,
                 rho,
                 kernels=(),
                 kernel_split=(1.0, 0.0),
                 load=None,
                 d0=None,
                 v0=None):
    '''
    Modal system of the fixed-fixed bar on (0, length) with wave modulus c2:
    lambda_k = c2 (k pi / length)**2 and B_i = c_i diag(lambda).

    # Arguments
    n_modes (int): Number of sine modes
    length (float): Bar length
    c2 (float): Wave modulus
    rho (float): Density
    kernels (list): Zero, one (synchronous) or two KernelParams
    kernel_split (tuple): Weights (c1, c2) >= 0 with c1 + c2 = 1
    load (LoadSignal): Modal load, zero by default
    d0, v0 (array): Modal initial data, zero by default

    # Return type
    ModalSystem
    '''
    # pylint: disable=too-many-arguments
    if n_modes < 1:
        raise ValidationError(f'n_modes must be >= 1, got {n_modes}')
    if not length > 0.0 or not c2 > 0.0:
        raise ValidationError(f'length and c2 must be > 0, got {length}, {c2}')
    split = np.asarray(kernel_split, dtype=float)
    if split.shape != (2, ) or np.any(split < 0.0) or abs(split.sum() - 1.0) > SPLIT_TOL:
        raise ValidationError(f'kernel_split must be two weights >= 0 summing to 1, '
                              f'got {kernel_split}')

    lam = c2 * (np.arange(1, n_modes + 1) * math.pi / length)**2
    return ModalSystem(rho=rho,
                       lam=lam,
                       B1=split[0] * np.diag(lam),
                       B2=split[1] * np.diag(lam),
                       kernels=_kernel_list(kernels),
                       load=load,
                       d0=d0,
                       v0=v0)


def _check_coupling(name, matrix):
    asymmetry = np.max(np.abs(matrix - matrix.T), initial=0.0)
    if asymmetry > SYMMETRY_TOL:
        raise ValidationError(f'{name} is not symmetric (max deviation {asymmetry:.3e})')
    smallest = np.linalg.eigvalsh(matrix).min()
    scale = max(1.0, np.abs(matrix).max())
    if smallest < -SYMMETRY_TOL * scale:
        raise ValidationError(f'{name} is not positive semi-definite (eigenvalue {smallest:.3e})')


def assemble_general(rho, lam, B1, B2, kernels=(), load=None, d0=None, v0=None, rng_seed=0,
                     samples=100):
    '''
    Validated ModalSystem from user-supplied eigenvalues and coupling matrices.

    Asymmetric or indefinite couplings are rejected. B1 + B2 != diag(lambda) and
    sampled violations of v'B_i v <= v' Lambda v are reported as warnings, since
    a user basis need not diagonalize the bilinear forms.

    # Return type
    ModalSystem
    '''
    # pylint: disable=too-many-arguments
    system = ModalSystem(rho=rho,
                         lam=lam,
                         B1=B1,
                         B2=B2,
                         kernels=_kernel_list(kernels),
                         load=load,
                         d0=d0,
                         v0=v0)
    _check_coupling('B1', system.B1)
    _check_coupling('B2', system.B2)

    split_error = np.max(np.abs(system.B1 + system.B2 - system.stiffness))
    if split_error > SYMMETRY_TOL:
        logger.warning(f'B1 + B2 differs from diag(lambda) by {split_error:.3e}')

    rng = np.random.default_rng(rng_seed)
    vectors = rng.standard_normal((samples, system.n_modes))
    elastic = np.einsum('sk,k,sk->s', vectors, system.lam, vectors)
    for name, matrix in (('B1', system.B1), ('B2', system.B2)):
        forms = np.einsum('sj,jk,sk->s', vectors, matrix, vectors)
        violations = np.count_nonzero(forms > elastic * (1.0 + SYMMETRY_TOL) + SYMMETRY_TOL)
        if violations:
            logger.warning(f'{name}: a_i(v, v) <= |v|_V^2 fails for {violations} of '
                           f'{samples} sampled v')
    return system


@dataclass(frozen=True)
class BarBasis:
    """
    Orthonormal sine basis phi_k(x) = sqrt(2/L) sin(k pi x / L) of L2(0, L).
    """
    length: float
    n_modes: int

    def __post_init__(self):
        if not self.length > 0.0 or self.n_modes < 1:
            raise ValidationError(f'Invalid bar basis: length {self.length}, {self.n_modes} modes')

    def mode(self, k, x):
        return math.sqrt(2.0 / self.length) * np.sin(k * math.pi * np.asarray(x) / self.length)

    def project(self, fn):
        """
        Coefficients (fn, phi_k), k = 1 .. n_modes, by sine-weighted quadrature.
        """
        scale = math.sqrt(2.0 / self.length)
        return np.array([
            scale * checked_quad(fn, 0.0, self.length, weight='sin',
                                 wvar=k * math.pi / self.length)
            for k in range(1, self.n_modes + 1)
        ])

    def sine_coefficients(self, fn):
        """
        Classical Fourier sine coefficients (2/L) int_0^L fn(x) sin(k pi x / L) dx;
        equal to project(fn) / sqrt(L/2).
        """
        return self.project(fn) / math.sqrt(self.length / 2.0)


def project_initial(u0_fn, v0_fn, basis):
    '''
    Modal initial data (u0, phi_k), (v0, phi_k) in the orthonormal bar basis.

    # Arguments
    u0_fn, v0_fn (callable or None): Initial displacement and velocity on (0, L)
    basis (BarBasis): Basis

    # Returns
    (d0, v0)

    # Raises
    QuadratureError if a quadrature fails or the coefficients violate Bessel's
    inequality
    '''
    coefficients = []
    for fn in (u0_fn, v0_fn):
        if fn is None:
            coefficients.append(np.zeros(basis.n_modes))
            continue
        projected = basis.project(fn)
        norm2 = checked_quad(lambda x, fn=fn: fn(x)**2, 0.0, basis.length)
        if projected @ projected > norm2 + 1e-8 * max(1.0, norm2):
            raise QuadratureError(f'Modal coefficients exceed the L2 norm: '
                                  f'{projected @ projected:.6g} > {norm2:.6g}')
        coefficients.append(projected)
    return tuple(coefficients)


def compatibility_sequence(system, r, f_derivs_at_0=None):
    '''
    Initial values u_0 .. u_r of the time derivatives of the modal solution,
    u_0 = d0, u_1 = v0 and for r >= 2

        rho u_r = F^(r-2)(0) - Lambda u_{r-2}
                  + sum_{j=0}^{r-3} sum_i beta_i^(j)(0) B_i u_{r-3-j}

    # Arguments
    system (ModalSystem): System
    r (int): Highest derivative order, >= 0
    f_derivs_at_0 (list): F^(j)(0) for j = 0 .. r-2, taken from the system load
                          when omitted

    # Returns
    list of r+1 modal vectors

    # Raises
    SingularKernelError if r >= 3 and a kernel has alpha < 1
    '''
    if r < 0:
        raise ValidationError(f'r must be >= 0, got {r}')
    if f_derivs_at_0 is None:
        f_derivs_at_0 = [system.load.derivatives_at_zero(j) for j in range(max(r - 1, 0))]
    if len(f_derivs_at_0) < r - 1:
        raise ValidationError(f'Need {r - 1} load derivatives at 0, got {len(f_derivs_at_0)}')

    couplings = system.couplings
    kernel_derivatives = [[beta_derivative_at_zero(k, j) for j in range(r - 2)]
                          for k, _ in couplings] if r >= 3 else []

    sequence = [np.array(system.d0), np.array(system.v0)][:r + 1]
    for order in range(2, r + 1):
        value = np.asarray(f_derivs_at_0[order - 2], dtype=float) - system.lam * sequence[order - 2]
        for (_, matrix), derivatives in zip(couplings, kernel_derivatives):
            for j in range(order - 2):
                value = value + derivatives[j] * (matrix @ sequence[order - 3 - j])
        sequence.append(value / system.rho)
    return sequence


def system_to_dict(system):
    return {
        'rho': system.rho,
        'lambda': system.lam.tolist(),
        'B1': system.B1.tolist(),
        'B2': system.B2.tolist(),
        'kernels': [dataclasses.asdict(k) for k in system.kernels],
        'load': system.load.to_dict(),
        'd0': system.d0.tolist(),
        'v0': system.v0.tolist(),
    }


def system_from_dict(data):
    return assemble_general(rho=float(data['rho']),
                            lam=data['lambda'],
                            B1=data['B1'],
                            B2=data['B2'],
                            kernels=[KernelParams(**k) for k in data.get('kernels', [])],
                            load=LoadSignal.from_dict(data['load']) if 'load' in data else None,
                            d0=data.get('d0'),
                            v0=data.get('v0'))
