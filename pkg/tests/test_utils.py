import math

import pytest

from fracvisco.errors import QuadratureError
from fracvisco.utils import checked_quad, observed_orders, print_summary


def test_checked_quad():
    assert checked_quad(math.sin, 0.0, math.pi) == pytest.approx(2.0, rel=1e-12)
    assert checked_quad(lambda x: math.exp(-x), 0.0, math.inf) == pytest.approx(1.0, rel=1e-10)


def test_checked_quad_failure():
    """
    A non-integrable singularity exhausts the subdivision limit.
    """
    with pytest.raises(QuadratureError):
        checked_quad(lambda x: 1.0 / x, 0.0, 1.0, limit=20)


def test_observed_orders():
    orders, monotone = observed_orders([0.4, 0.2, 0.1], [1.6, 0.4, 0.1])
    assert orders == pytest.approx([2.0, 2.0])
    assert monotone

    orders, monotone = observed_orders([0.4, 0.2, 0.1], [1.0, 0.0, 0.5])
    assert math.isnan(orders[0]) and math.isnan(orders[1])
    assert not monotone


def test_print_summary():
    lines = []
    summary = {
        'scenario': 'convergence_study',
        'reference': 'laplace_oracle',
        'diagnostics': {
            'min_order': {
                'value': 1.97,
                'limit': 1.8,
                'passed': True
            },
            'beta_condition': {
                'sum_integrals': 0.4,
                'max_integral': 0.4,
                'passed': True
            },
        },
        'orders': [1.95, math.nan],
        'energy': {
            'max_total': 1.0,
            'final_total': 0.5
        },
    }
    print_summary(summary, printer=lines.append)
    assert lines[0] == 'Scenario convergence_study | reference: laplace_oracle'
    assert len(lines) == 6
    assert lines[2].startswith('beta_condition')
    assert '4.0000e-01' in lines[2]
    assert lines[3].split('|')[1].strip() == 'Y'
    assert lines[4] == 'Observed orders: 1.950, -'
    assert lines[5] == 'Energy: max 1.0000e+00, final 5.0000e-01'
