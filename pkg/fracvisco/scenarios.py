"""
Built-in scenarios of the run command. Every scenario returns a ScenarioResult
whose summary lists diagnostics with a pass/fail flag.
"""
import dataclasses
import logging
import math
from dataclasses import dataclass

import numpy as np
from tqdm import tqdm

from fracvisco import settings
from fracvisco.errors import ConfigError, InversionRangeError
from fracvisco.integrator import (Trajectory, apriori_monitor, data_norms, energy_bound_check,
                                  solve)
from fracvisco.kernel import (beta_condition, beta_eval, beta_integral_quadrature, beta_laplace,
                              laplace_quadrature, monotonicity_check, positive_type_check,
                              product_weights)
from fracvisco.laplace_oracle import (conjugate_symmetry_gap, covers, horizon, initial_value_gap,
                                      invert)
from fracvisco.special_functions import ml
from fracvisco.utils import observed_orders

logger = logging.getLogger(__name__)

ANALYTIC_GAP_TOL = 5e-3
INITIAL_VALUE_TOL = 1e-3
SYMMETRY_GAP_TOL = 1e-10
COMPARISON_POINTS = 200


@dataclass
class ScenarioResult:
    summary: dict
    trajectory: Trajectory = None
    comparison: tuple = None
    weights: object = None

    @property
    def passed(self):
        return all(item['passed'] for item in self.summary['diagnostics'].values())


def _diagnostic(value, limit, passed=None):
    return {
        'value': value,
        'limit': limit,
        'passed': bool(value <= limit) if passed is None else bool(passed),
    }


def _summary(cfg, diagnostics, traj=None, **extra):
    summary = {
        'scenario': cfg.scenario,
        'rng_seed': cfg.rng_seed,
        'diagnostics': diagnostics,
        'orders': extra.pop('orders', []),
        'oracle_gap': extra.pop('oracle_gap', None),
        'reference': extra.pop('reference', None),
    }
    if traj is not None:
        summary['energy'] = {
            'max_total': float(traj.energy.total.max()),
            'final_total': float(traj.energy.total[-1]),
        }
    summary.update(extra)
    summary['passed'] = all(item['passed'] for item in diagnostics.values())
    return summary


def _system(cfg):
    if cfg.system is None:
        raise ConfigError(f'Scenario {cfg.scenario} needs a "bar" or "general" system')
    return cfg.system


def _energy_diagnostics(traj, system, diagnostics):
    if not system.load.vanishes:
        logger.warning('The energy bound holds for unloaded runs only, skipping it')
        return
    report = energy_bound_check(traj, system)
    diagnostics['energy_bound'] = _diagnostic(report.max_total,
                                              report.bound * (1.0 + report.tolerance),
                                              report.passed)


def _apriori_diagnostics(traj, system, T, diagnostics):
    report = apriori_monitor(traj, system, data_norms(system, T))
    diagnostics['apriori_growth'] = _diagnostic(report.growth_ratio, report.growth_factor,
                                                report.bounded)
    return report


def comparison_indices(n_steps, points=COMPARISON_POINTS):
    """
    Grid indices of up to `points` comparison times in [0.1 T, T].
    """
    first = max(1, math.ceil(0.1 * n_steps))
    count = min(points, n_steps - first + 1)
    return np.unique(np.rint(np.linspace(first, n_steps, count)).astype(int))


def _relative_gap(d, reference):
    scale = np.max(np.abs(reference))
    difference = np.max(np.abs(d - reference))
    return float(difference / scale if scale > 0.0 else difference)


def oracle_gap(traj, system, indices):
    '''
    Relative sup difference between a trajectory and the Laplace oracle at the
    given grid indices.

    # Returns
    (gap, reference) with reference of shape (len(indices), m)
    '''
    reference = invert(system, traj.times[indices])
    return _relative_gap(traj.d[indices], reference), reference


def self_reference(system, integrator, times, progress=False):
    '''
    Displacements at the given times from a run at a quarter of the step size.

    # Returns
    (name, reference) with reference of shape (len(times), m)
    '''
    fine_cfg = dataclasses.replace(integrator, dt=integrator.dt / 4)
    fine = solve(system, fine_cfg, progress=progress)
    return f'self_dt_{fine_cfg.dt:g}', fine.d[np.rint(times / fine_cfg.dt).astype(int)]


def _gap_limit(cfg):
    return max(settings.ORACLE_GAP_FLOOR, 5.0 * cfg.integrator.dt)


def _oracle_diagnostics(traj, system, cfg, diagnostics):
    indices = comparison_indices(cfg.integrator.n_steps)
    gap, reference = oracle_gap(traj, system, indices)
    diagnostics['oracle_gap'] = _diagnostic(gap, _gap_limit(cfg))
    return gap, (traj.times[indices], traj.d[indices], reference)


def _self_reference_diagnostics(traj, system, cfg, diagnostics, progress):
    indices = comparison_indices(cfg.integrator.n_steps)
    times = traj.times[indices]
    name, reference = self_reference(system, cfg.integrator, times, progress)
    gap = _relative_gap(traj.d[indices], reference)
    diagnostics['reference_gap'] = _diagnostic(gap, _gap_limit(cfg))
    return name, (times, traj.d[indices], reference)


def relaxation(cfg, progress=False):
    """
    Release from an initial displacement: energy bound and a priori growth.
    """
    system = _system(cfg)
    traj = solve(system, cfg.integrator, progress=progress)
    diagnostics = {}
    _energy_diagnostics(traj, system, diagnostics)
    _apriori_diagnostics(traj, system, cfg.integrator.T, diagnostics)
    return ScenarioResult(_summary(cfg, diagnostics, traj), traj)


def _undamped_solution(system, times):
    omega = np.sqrt(system.lam / system.rho)
    safe = np.where(omega > 0.0, omega, 1.0)
    sine_term = np.where(omega > 0.0, np.sin(np.outer(times, omega)) / safe, times[:, None])
    return np.cos(np.outer(times, omega)) * system.d0 + sine_term * system.v0


def free_vibration(cfg, progress=False):
    """
    Unloaded vibration; memoryless systems are compared with the closed-form
    oscillator solution.
    """
    system = _system(cfg)
    traj = solve(system, cfg.integrator, progress=progress)
    diagnostics = {}
    extra = {}
    if not system.kernels and system.load.vanishes:
        gap = float(np.max(np.abs(traj.d - _undamped_solution(system, traj.times))))
        diagnostics['analytic_gap'] = _diagnostic(gap, ANALYTIC_GAP_TOL)
        extra['reference'] = 'closed_form'
    _energy_diagnostics(traj, system, diagnostics)
    return ScenarioResult(_summary(cfg, diagnostics, traj, **extra), traj)


def forced(cfg, progress=False):
    """
    Loaded run: a priori growth, and the oracle gap for transformable loads.
    Past the oracle horizon the run is compared with a run at dt/4 instead.
    """
    system = _system(cfg)
    traj = solve(system, cfg.integrator, progress=progress)
    diagnostics = {}
    _apriori_diagnostics(traj, system, cfg.integrator.T, diagnostics)
    extra = {}
    comparison = None
    if system.load.transformable and covers(system, cfg.integrator.T):
        extra['oracle_gap'], comparison = _oracle_diagnostics(traj, system, cfg, diagnostics)
        extra['reference'] = 'laplace_oracle'
    elif system.load.transformable:
        logger.warning(f'T = {cfg.integrator.T:g} lies beyond the oracle horizon '
                       f'{horizon(system):.4g}, comparing with a run at dt/4')
        extra['reference'], comparison = _self_reference_diagnostics(
            traj, system, cfg, diagnostics, progress)
    return ScenarioResult(_summary(cfg, diagnostics, traj, **extra), traj, comparison)


def oracle_compare(cfg, progress=False):
    """
    Time stepper against the Laplace oracle, plus the transform sanity checks.

    # Raises
    InversionRangeError if T lies beyond the oracle horizon
    """
    system = _system(cfg)
    if not covers(system, cfg.integrator.T):
        raise InversionRangeError(f'oracle_compare needs T <= {horizon(system):.4g} '
                                  f'for this system, got T = {cfg.integrator.T:g}')
    traj = solve(system, cfg.integrator, progress=progress)
    diagnostics = {}
    gap, comparison = _oracle_diagnostics(traj, system, cfg, diagnostics)

    scale = 1.0 + np.max(np.abs(system.d0)) + np.max(np.abs(system.v0))
    diagnostics['initial_value'] = _diagnostic(initial_value_gap(system),
                                               INITIAL_VALUE_TOL * scale)
    s_check = 2.0 / min(system.tau_min, 1.0) + 1.0j
    diagnostics['conjugate_symmetry'] = _diagnostic(conjugate_symmetry_gap(system, s_check),
                                                    SYMMETRY_GAP_TOL)
    summary = _summary(cfg, diagnostics, traj, oracle_gap=gap, reference='laplace_oracle')
    return ScenarioResult(summary, traj, comparison)


def convergence_study(cfg, progress=False):
    '''
    Runs at every step size of the study; errors are sup norms over common grid
    points in [0.1 T, T] against the Laplace oracle, or against a run at a
    quarter of the finest step when the load has no closed-form transform.
    '''
    # pylint: disable=too-many-locals
    system = _system(cfg)
    dts = list(cfg.dt_list)
    if len(dts) < 3:
        raise ConfigError('A convergence study needs at least three step sizes')
    coarse = dts[0]
    for dt in dts[1:]:
        ratio = coarse / dt
        if abs(ratio - round(ratio)) > 1e-9 * ratio:
            raise ConfigError(f'Step sizes must divide {coarse}, got {dt}')

    base = dataclasses.replace(cfg.integrator, dt=coarse)
    indices = comparison_indices(base.n_steps)
    times = coarse * indices

    if system.load.transformable and covers(system, times):
        reference_name = 'laplace_oracle'
        reference = invert(system, times)
    else:
        if system.load.transformable:
            logger.warning(f'T = {cfg.integrator.T:g} lies beyond the oracle horizon '
                           f'{horizon(system):.4g}, using a run at dt/4 as reference')
        reference_name, reference = self_reference(
            system, dataclasses.replace(cfg.integrator, dt=dts[-1]), times, progress)

    errors = []
    traj = None
    for dt in tqdm(dts, desc='step sizes', disable=not progress):
        traj = solve(system, dataclasses.replace(cfg.integrator, dt=dt))
        run_indices = np.rint(times / dt).astype(int)
        errors.append(float(np.max(np.abs(traj.d[run_indices] - reference))))
        logger.info(f'dt = {dt:g}: error {errors[-1]:.3e}')

    orders, monotone = observed_orders(dts, errors)
    diagnostics = {}
    if cfg.min_order is not None:
        finite = [order for order in orders if math.isfinite(order)]
        diagnostics['min_order'] = _diagnostic(min(finite, default=math.nan), cfg.min_order,
                                               bool(finite) and min(finite) >= cfg.min_order)
    summary = _summary(cfg,
                       diagnostics,
                       traj,
                       orders=orders,
                       reference=reference_name,
                       errors=errors,
                       dt_list=dts,
                       monotone=monotone)
    return ScenarioResult(summary, traj)


def _kernel_diagnostics(k, T, grid_points, trials, seed, progress):
    # pylint: disable=too-many-arguments
    diagnostics = {}
    closed_form = k.gamma * (1.0 - ml(k.alpha, -(T / k.tau)**k.alpha))
    diagnostics['l1_gap'] = _diagnostic(abs(beta_integral_quadrature(k, 0.0, T) - closed_form),
                                        settings.L1_GAP_TOL)
    total = beta_integral_quadrature(k, 0.0, math.inf)
    diagnostics['l1_infinity'] = _diagnostic(abs(total - k.gamma),
                                             settings.KERNEL_CHECK_RTOL * k.gamma)

    laplace_gap = max(
        abs(laplace_quadrature(k, s) / beta_laplace(k, s) - 1.0)
        for s in (1.5 / k.tau, 3.0 / k.tau, 10.0 / k.tau))
    diagnostics['laplace_gap'] = _diagnostic(laplace_gap, settings.KERNEL_CHECK_RTOL)

    positive_grid = np.logspace(-4.0, math.log10(T), grid_points)
    minimum = float(np.min(beta_eval(k, positive_grid)))
    diagnostics['beta_nonnegative'] = _diagnostic(-minimum, 0.0, minimum >= 0.0)

    grid = np.linspace(0.0, T, grid_points)
    report = positive_type_check(k, grid, trials, seed, progress=progress)
    diagnostics['positive_type'] = _diagnostic(-report.min_quadratic_form, report.tolerance,
                                               report.passed)
    for order in range(1, 5):
        report = monotonicity_check(k, order, grid)
        diagnostics[f'monotonicity_{order}'] = _diagnostic(-report.min_signed_difference,
                                                           report.tolerance, report.passed)
    return diagnostics


def kernel_check(cfg, progress=False):
    """
    Every kernel diagnostic for every configured kernel, and the kernel condition.
    """
    if not cfg.kernels:
        raise ConfigError('kernel_check needs at least one kernel with gamma > 0')
    grid_points = cfg.diagnostics.get('grid_points', 201)
    trials = cfg.diagnostics.get('trials', 200)

    diagnostics = {}
    horizons = []
    for i, k in enumerate(cfg.kernels, start=1):
        T = cfg.diagnostics.get('T', 10.0 * k.tau)
        horizons.append(T)
        for name, item in _kernel_diagnostics(k, T, grid_points, trials, cfg.rng_seed,
                                              progress).items():
            diagnostics[f'kernel_{i}.{name}'] = item

    condition = beta_condition(cfg.kernels, max(horizons))
    diagnostics['beta_condition'] = {
        'sum_integrals': condition.sum_integrals,
        'max_integral': condition.max_integral,
        'passed': condition.satisfied,
    }
    weights = None
    if 'weights_csv' in cfg.outputs:
        weights = product_weights(cfg.kernels[0], cfg.integrator.dt, cfg.integrator.n_steps)
    return ScenarioResult(_summary(cfg, diagnostics), weights=weights)


SCENARIOS = {
    'relaxation': relaxation,
    'free_vibration': free_vibration,
    'forced': forced,
    'convergence_study': convergence_study,
    'kernel_check': kernel_check,
    'oracle_compare': oracle_compare,
}


def run_scenario(cfg, progress=False):
    """
    Dispatch a SimulationConfig to its scenario.

    # Return type
    ScenarioResult
    """
    logger.info(f'Running scenario {cfg.scenario}')
    return SCENARIOS[cfg.scenario](cfg, progress=progress)
