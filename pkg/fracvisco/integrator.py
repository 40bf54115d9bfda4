"""
Time stepping of the modal Volterra system with Newmark's average acceleration
method and discrete convolution memory, plus the energy monitors.
"""
import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import trapezoid
from scipy.linalg import lu_factor, lu_solve
from tqdm import tqdm

from fracvisco import settings
from fracvisco.errors import SingularMatrixError, StepLimitError, ValidationError
from fracvisco.kernel import ConvolutionKind, convolution_rule

logger = logging.getLogger(__name__)

SCHEMES = {
    # name: (beta, gamma) Newmark parameters
    'newmark_average_acceleration': (0.25, 0.5),
}


@dataclass(frozen=True)
class IntegratorConfig:
    """
    # Fields
    dt (float): Time step
    T (float): Final time, >= dt
    scheme (str): Time scheme, only 'newmark_average_acceleration'
    convolution (ConvolutionKind): Discretization of the memory terms
    implicit_lag (bool): Treat the newest convolution weight implicitly (True) or
                         evaluate it with the previous displacement (False)
    max_steps (int): Upper bound of T / dt
    """
    dt: float
    T: float
    scheme: str = 'newmark_average_acceleration'
    convolution: ConvolutionKind = ConvolutionKind.PRODUCT_INTEGRATION
    implicit_lag: bool = True
    max_steps: int = settings.MAX_STEPS

    def __post_init__(self):
        if not self.dt > 0.0:
            raise ValidationError(f'dt must be > 0, got {self.dt}')
        if not self.T >= self.dt:
            raise ValidationError(f'T must be >= dt, got T = {self.T}, dt = {self.dt}')
        if self.scheme not in SCHEMES:
            raise ValidationError(f'Unknown time scheme {self.scheme!r}')
        object.__setattr__(self, 'convolution', ConvolutionKind(self.convolution))
        ratio = self.T / self.dt
        if abs(ratio - round(ratio)) > 1e-9 * ratio:
            logger.warning(f'T = {self.T:g} is not a multiple of dt = {self.dt:g}, '
                           f'the run ends at t = {self.n_steps * self.dt:.10g}')

    @property
    def n_steps(self):
        """
        Number of steps, T / dt rounded to the nearest integer.
        """
        return int(round(self.T / self.dt))


@dataclass(frozen=True)
class Energy:
    kinetic: np.ndarray
    elastic: np.ndarray
    total: np.ndarray


@dataclass(frozen=True, eq=False)
class Trajectory:
    """
    # Fields
    times (array): t_n, shape (N+1,)
    d, v, a (array): Modal displacement, velocity and acceleration, shape (N+1, m)
    energy (Energy): Kinetic, elastic and total energy, shape (N+1,) each
    memory (array): Convolution values (beta_i * d)(t_n), shape (N+1, n_couplings, m)
    """
    times: np.ndarray
    d: np.ndarray
    v: np.ndarray
    a: np.ndarray
    energy: Energy
    memory: np.ndarray

    @property
    def n_modes(self):
        return self.d.shape[1]


def energy(system, d, v):
    """
    rho |v|**2 and (1 - gamma_bar) sum lambda_k d_k**2, for one state (m,) or
    a trajectory (N, m).

    # Return type
    Energy
    """
    d = np.asarray(d, dtype=float)
    v = np.asarray(v, dtype=float)
    kinetic = system.rho * np.sum(v**2, axis=-1)
    elastic = (1.0 - system.gamma_bar) * np.sum(system.lam * d**2, axis=-1)
    return Energy(kinetic, elastic, kinetic + elastic)


class _History:
    """Convolution state of one memory term."""

    def __init__(self, rule, n_steps, n_modes):
        self.rule = rule
        self.product = rule.kind is ConvolutionKind.PRODUCT_INTEGRATION
        # interval averages for product integration, samples for CQ
        self.buffer = np.zeros((n_steps + 1, n_modes))
        self.newest = rule.newest_coefficient

    def start(self, d0):
        if not self.product:
            self.buffer[0] = d0

    def lagged(self, n, d_n):
        """Convolution at t_{n+1} without the newest coefficient times d_{n+1}"""
        weights = self.rule.weights
        if self.product:
            return weights[n:0:-1] @ self.buffer[:n] + self.newest * d_n
        return weights[n + 1:0:-1] @ self.buffer[:n + 1]

    def push(self, n, d_n, d_next):
        if self.product:
            self.buffer[n] = 0.5 * (d_n + d_next)
        else:
            self.buffer[n + 1] = d_next


def solve(system, cfg, progress=False):
    '''
    Integrate rho d'' + Lambda d - sum_i B_i (beta_i * d) = F on [0, T].

    The start acceleration follows from the equation at t = 0, where the
    convolutions vanish. Every step solves one linear system with the effective
    matrix rho / (beta dt**2) I + Lambda - sum_i c_i B_i, c_i the newest
    convolution coefficient (omitted for the lagged variant), factored once.

    # Arguments
    system (ModalSystem): System
    cfg (IntegratorConfig): Integrator settings
    progress (bool): Show a progress bar

    # Return type
    Trajectory
    '''
    # pylint: disable=too-many-locals
    n_steps = cfg.n_steps
    if n_steps > cfg.max_steps:
        raise StepLimitError(f'{n_steps} steps exceed the limit of {cfg.max_steps}')

    dt = cfg.dt
    m = system.n_modes
    newmark_beta, newmark_gamma = SCHEMES[cfg.scheme]
    a0 = 1.0 / (newmark_beta * dt**2)
    a2 = 1.0 / (newmark_beta * dt)
    a3 = 1.0 / (2.0 * newmark_beta) - 1.0

    times = dt * np.arange(n_steps + 1)
    loads = np.asarray(system.load.evaluate(times), dtype=float).reshape(n_steps + 1, m)

    couplings = system.couplings
    histories = [
        _History(convolution_rule(k, cfg.convolution, dt, n_steps), n_steps, m)
        for k, _ in couplings
    ]

    effective = system.rho * a0 * np.eye(m) + system.stiffness
    if cfg.implicit_lag:
        for (_, matrix), history in zip(couplings, histories):
            effective -= history.newest * matrix
    condition = np.linalg.cond(effective)
    if not condition < 1.0 / np.finfo(float).eps:
        raise SingularMatrixError(f'Effective matrix is singular at dt = {dt}', condition)
    factors = lu_factor(effective)

    d = np.zeros((n_steps + 1, m))
    v = np.zeros((n_steps + 1, m))
    a = np.zeros((n_steps + 1, m))
    memory = np.zeros((n_steps + 1, len(couplings), m))
    d[0], v[0] = system.d0, system.v0
    a[0] = (loads[0] - system.lam * d[0]) / system.rho
    for history in histories:
        history.start(d[0])

    logger.debug(f'Newmark: {n_steps} steps of {dt}, {len(couplings)} memory terms, '
                 f'{cfg.convolution.value}, condition {condition:.3e}')

    for n in tqdm(range(n_steps), desc='time steps', disable=not progress):
        rhs = loads[n + 1] + system.rho * (a0 * d[n] + a2 * v[n] + a3 * a[n])
        lagged = []
        for (_, matrix), history in zip(couplings, histories):
            partial = history.lagged(n, d[n])
            if not cfg.implicit_lag:
                partial = partial + history.newest * d[n]
            lagged.append(partial)
            rhs += matrix @ partial

        d[n + 1] = lu_solve(factors, rhs)
        a[n + 1] = a0 * (d[n + 1] - d[n]) - a2 * v[n] - a3 * a[n]
        v[n + 1] = v[n] + dt * ((1.0 - newmark_gamma) * a[n] + newmark_gamma * a[n + 1])

        for i, history in enumerate(histories):
            memory[n + 1, i] = lagged[i]
            if cfg.implicit_lag:
                memory[n + 1, i] += history.newest * d[n + 1]
            history.push(n, d[n], d[n + 1])

    return Trajectory(times, d, v, a, energy(system, d, v), memory)


@dataclass(frozen=True)
class DataNorms:
    u0_V: float
    v0_H: float
    f_L2: float
    g_W11: float

    @property
    def aggregate(self):
        return self.u0_V + self.v0_H + self.f_L2 + self.g_W11


def data_norms(system, T, samples=4001):
    '''
    Data norms of the a priori estimate: |u0|_V, |v0|, |f|_{L2(0,T)} of the volume
    load and |g|_{W^1_1(0,T)} of the surface load, by trapezoidal sums over
    `samples` points.

    # Return type
    DataNorms
    '''
    t = np.linspace(0.0, T, samples)

    def channels(descriptors, order):
        if not descriptors:
            return np.zeros((samples, 0))
        return np.stack([np.asarray(ch.derivative(t, order), dtype=float)
                         for ch in descriptors], axis=-1)

    f = channels(system.load.volume, 0)
    g = channels(system.load.surface, 0)
    g_dot = channels(system.load.surface, 1)

    return DataNorms(u0_V=math.sqrt(system.lam @ system.d0**2),
                     v0_H=float(np.linalg.norm(system.v0)),
                     f_L2=math.sqrt(trapezoid(np.sum(f**2, axis=1), t)),
                     g_W11=float(trapezoid(np.linalg.norm(g, axis=1), t) +
                                 trapezoid(np.linalg.norm(g_dot, axis=1), t)))


@dataclass(frozen=True)
class AprioriReport:
    sup_u_V: float
    sup_v_H: float
    data_aggregate: float
    growth_ratio: float
    growth_factor: float

    @property
    def bounded(self):
        return self.growth_ratio <= self.growth_factor


def apriori_monitor(traj, system, norms, growth_factor=settings.GROWTH_FACTOR):
    '''
    Sup norms of the solution next to the data norms of the a priori estimate.
    The estimate's constant is unknown, so boundedness is judged by the growth
    of sup_t (|u|_V + |u'|) over [T/2, T] relative to [0, T/2].

    # Return type
    AprioriReport
    '''
    u_V = np.sqrt(np.sum(system.lam * traj.d**2, axis=1))
    v_H = np.linalg.norm(traj.v, axis=1)
    size = u_V + v_H

    half = traj.times <= 0.5 * traj.times[-1]
    early, late = size[half].max(), size[~half].max(initial=0.0)
    if early > 0.0:
        ratio = late / early
    else:
        ratio = 0.0 if late == 0.0 else math.inf

    report = AprioriReport(float(u_V.max()), float(v_H.max()), norms.aggregate, float(ratio),
                           growth_factor)
    if not report.bounded:
        logger.warning(f'Solution grows by a factor {ratio:.3g} over [T/2, T]')
    return report


@dataclass(frozen=True)
class EnergyBoundReport:
    max_total: float
    bound: float
    tolerance: float

    @property
    def passed(self):
        return self.max_total <= self.bound * (1.0 + self.tolerance)


def energy_bound_check(traj, system, tol=settings.ENERGY_TOL):
    '''
    Dissipativity of an unloaded run:
    max_t rho |u'|**2 + (1 - gamma_bar) |u|_V**2 <= (rho |v0|**2 + |u0|_V**2)(1 + tol).

    For u0 = 0 the bound is rho |v0|**2. For u0 != 0 the undamped modulus enters,
    since the relaxed energy at t = 0 alone does not bound a slowly relaxing run.

    # Return type
    EnergyBoundReport
    '''
    bound = system.rho * (system.v0 @ system.v0) + system.lam @ system.d0**2
    report = EnergyBoundReport(float(traj.energy.total.max()), float(bound), tol)
    logger.info(f'energy: max {report.max_total:.6g}, bound {report.bound:.6g}')
    return report
