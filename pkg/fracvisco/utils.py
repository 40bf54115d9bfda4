import logging
import math

import numpy as np
from scipy.integrate import quad

from fracvisco.errors import QuadratureError

logger = logging.getLogger(__name__)


def checked_quad(func, a, b, **kwargs):
    '''
    scipy.integrate.quad that raises QuadratureError when the integrator gives up
    with an error estimate far above the requested tolerance.

    # Returns
    The integral value
    '''
    kwargs.setdefault('limit', 200)
    epsabs = kwargs.get('epsabs', 1.49e-8)
    epsrel = kwargs.get('epsrel', 1.49e-8)

    result = quad(func, a, b, full_output=1, **kwargs)
    value, abserr = result[0], result[1]
    if len(result) > 3:
        # quad reports a problem (ier > 0) by appending its message
        if not abserr <= 100.0 * max(epsabs, epsrel * abs(value)):
            raise QuadratureError(f'Quadrature on [{a}, {b}] did not converge: {result[3]}')
        logger.debug(f'quad on [{a}, {b}] accepted despite: {result[3]}')
    return value


def observed_orders(dts, errors):
    '''
    Observed convergence orders between consecutive step sizes,
    log(e_i / e_{i+1}) / log(dt_i / dt_{i+1}).

    # Arguments
    dts (list): Step sizes, decreasing
    errors (list): Errors measured at the step sizes

    # Returns
    (orders, monotone) with len(orders) == len(dts) - 1; monotone is False if the
    error sequence does not decrease
    '''
    orders = []
    for i in range(len(dts) - 1):
        if errors[i] <= 0.0 or errors[i + 1] <= 0.0:
            orders.append(math.nan)
            continue
        orders.append(math.log(errors[i] / errors[i + 1]) / math.log(dts[i] / dts[i + 1]))

    monotone = bool(np.all(np.diff(errors) < 0.0))
    if not monotone:
        logger.warning(f'Error sequence {errors} is not decreasing')
    return orders, monotone


def print_summary(summary, printer=print):
    '''
    Print the diagnostics table of a scenario summary.

    # Arguments
    summary (dict): Scenario summary
    printer (callable): Output function, e.g. logging.info
    '''
    printer(f"Scenario {summary['scenario']} | reference: {summary.get('reference') or '-'}")
    printer(f"{'Diagnostic':40s} | Pass | {'Value':>11s} | {'Limit':>11s}")
    for name, item in sorted(summary['diagnostics'].items()):
        value = item.get('value', item.get('sum_integrals', math.nan))
        limit = item.get('limit', math.nan)
        printer(f"{name:40s} | {'Y' if item['passed'] else 'N':4s} | "
                f"{_number(value):>11s} | {_number(limit):>11s}")
    if summary.get('orders'):
        orders = ', '.join(_number(order, '.3f') for order in summary['orders'])
        printer(f'Observed orders: {orders}')
    if 'energy' in summary:
        printer(f"Energy: max {_number(summary['energy']['max_total'])}, "
                f"final {_number(summary['energy']['final_total'])}")


def _number(value, spec='.4e'):
    if value is None or not math.isfinite(value):
        return '-'
    return format(value, spec)
