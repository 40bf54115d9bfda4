"""
Frequency-domain solution of the modal system,

    Q(s) D(s) = F(s) + rho s d0 + rho v0,
    Q(s) = rho s**2 I + Lambda - sum_i B_i gamma_i / ((tau_i s)**alpha_i + 1),

inverted numerically with the fixed Talbot rule. Independent of the time
stepper, it serves as reference solution for transformable loads.
"""
import math
from dataclasses import dataclass

import numpy as np

from fracvisco import settings
from fracvisco.errors import (DomainError, InversionRangeError, NotTransformableError,
                              SingularMatrixError)
from fracvisco.kernel import beta_laplace
from fracvisco.talbot import talbot_invert

CONDITION_LIMIT = 1e12
MIN_NODES = 16
MAX_NODES = 64


@dataclass(frozen=True, eq=False)
class TransformPoint:
    """
    Q(s) and the right-hand side F(s) + rho s d0 + rho v0 at one complex s.
    """
    s: complex
    Q: np.ndarray
    rhs: np.ndarray

    def solution(self):
        return _solve_batch(self.Q, self.rhs, self.s)


def _system_matrix(system, s):
    """Q(s) for an array of s, shape s.shape + (m, m)"""
    m = system.n_modes
    Q = system.rho * (s**2)[..., None, None] * np.eye(m) + system.stiffness
    for kernel, matrix in system.couplings:
        Q = Q - np.asarray(beta_laplace(kernel, s, strict=False))[..., None, None] * matrix
    return Q


def _right_hand_side(system, s):
    if not system.load.transformable:
        raise NotTransformableError('The system load has no closed-form Laplace transform')
    loads = system.load.transform(s)
    return loads + system.rho * s[..., None] * system.d0 + system.rho * system.v0


def _solve_batch(Q, rhs, s):
    condition = np.linalg.cond(Q)
    worst = np.argmax(np.where(np.isfinite(condition), condition, np.inf))
    if not np.all(condition < CONDITION_LIMIT):
        raise SingularMatrixError(
            f'Q(s) is singular near s = {np.ravel(s)[worst]:.6g} '
            f'(condition {np.ravel(condition)[worst]:.3e})',
            float(np.ravel(condition)[worst]))
    return np.linalg.solve(Q, rhs[..., None])[..., 0]


def transform_point(system, s):
    s = complex(s)
    s_arr = np.asarray(s)
    return TransformPoint(s, _system_matrix(system, s_arr), _right_hand_side(system, s_arr))


def solve_transform(system, s):
    '''
    D(s) = Q(s)^-1 (F(s) + rho s d0 + rho v0), principal branch of s**alpha.

    # Arguments
    system (ModalSystem): System with a transformable load
    s (complex or array): Transform variable(s)

    # Returns
    Complex array of shape s.shape + (m,)

    # Raises
    NotTransformableError, SingularMatrixError (with the condition estimate)
    '''
    s = np.asarray(s, dtype=complex)
    return _solve_batch(_system_matrix(system, s), _right_hand_side(system, s), s)


def invert_function(fhat, t, nodes=settings.TALBOT_NODES):
    '''
    Fixed-Talbot inverse of a scalar transform, vectorised over complex s.
    '''
    return talbot_invert(fhat, t, nodes)


def max_frequency(system):
    return math.sqrt(system.lam.max() / system.rho)


def _required_nodes(system, t):
    return math.ceil(10.0 * max_frequency(system) * t / math.pi)


def horizon(system):
    '''
    Longest time the oracle resolves with MAX_NODES contour nodes, inf for
    systems without stiffness.
    '''
    omega = max_frequency(system)
    if omega == 0.0:
        return math.inf
    return MAX_NODES * math.pi / (10.0 * omega)


def covers(system, times):
    '''
    True if the oracle resolves every one of the times.
    '''
    return _required_nodes(system, float(np.max(times))) <= MAX_NODES


def nodes_for(system, t, nodes=settings.TALBOT_NODES):
    '''
    Number of Talbot nodes for time t. The contour crosses the imaginary axis at
    +-0.2 pi M / t and has to pass outside the undamped resonances +-i omega_max,
    with a margin of 2.

    # Raises
    InversionRangeError if t needs more than MAX_NODES nodes
    '''
    required = _required_nodes(system, t)
    if required > MAX_NODES:
        raise InversionRangeError(
            f'Talbot contour at t = {t:.4g} needs {required} nodes, more than {MAX_NODES}; '
            f'the oracle resolves t <= {horizon(system):.4g} only')
    return max(nodes, required)


def invert(system, t, nodes=settings.TALBOT_NODES):
    '''
    Modal displacement d(t) by fixed-Talbot inversion of solve_transform.

    Accuracy degrades for t -> 0. The node count grows with t relative to the
    period of the highest mode; times past horizon(system) are refused.

    # Arguments
    system (ModalSystem): System with a transformable load
    t (float or array): Times, > 0
    nodes (int): Minimum number of contour nodes, >= 16

    # Returns
    Real array of shape (m,) for scalar t, (len(t), m) otherwise

    # Raises
    DomainError, NotTransformableError, InversionRangeError
    '''
    if nodes < MIN_NODES:
        raise DomainError(f'Talbot inversion needs at least {MIN_NODES} nodes, got {nodes}')
    if not system.load.transformable:
        raise NotTransformableError('The system load has no closed-form Laplace transform')

    scalar = np.ndim(t) == 0
    times = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(times <= 0.0):
        raise DomainError('Laplace inversion requires t > 0')

    result = np.empty((times.size, system.n_modes))
    for i, time in enumerate(times):
        result[i] = talbot_invert(lambda s: solve_transform(system, s), time,
                                  nodes_for(system, time, nodes))
    return result[0] if scalar else result


def initial_value_gap(system, s_values=(1e3, 1e4)):
    '''
    max |s D(s) - d0| over large real s (initial value theorem).
    '''
    return max(
        float(np.max(np.abs(s * solve_transform(system, s) - system.d0))) for s in s_values)


def conjugate_symmetry_gap(system, s):
    '''
    max |D(conj s) - conj D(s)|, zero for systems with real data.
    '''
    s = np.asarray(s, dtype=complex)
    return float(
        np.max(np.abs(solve_transform(system, np.conj(s)) - np.conj(solve_transform(system, s)))))
