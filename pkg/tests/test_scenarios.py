import dataclasses
import json

import numpy as np
import pytest

from fracvisco.errors import ConfigError, InversionRangeError
from fracvisco.io import read_config
from fracvisco.scenarios import SCENARIOS, comparison_indices, run_scenario


def config(tmp_path, **data):
    base = {
        'rho': 1.0,
        'bar': {
            'n_modes': 2,
            'length': 1.0,
            'c2': 1.0
        },
        'kernels': [{
            'gamma': 0.3,
            'tau': 1.0,
            'alpha': 0.5
        }],
        'd0': [1.0, 0.0],
        'integrator': {
            'dt': 0.005,
            'T': 2.0
        },
    }
    base.update(data)
    filename = tmp_path / f"{base['scenario']}.json"
    with open(filename, 'w') as fp_config:
        json.dump(base, fp_config)
    return read_config(filename, out_dir=tmp_path)


def test_scenario_table():
    assert set(SCENARIOS) == {
        'relaxation', 'free_vibration', 'forced', 'convergence_study', 'kernel_check',
        'oracle_compare'
    }


def test_comparison_indices():
    indices = comparison_indices(1000)
    assert len(indices) == 200
    assert indices[0] == 100 and indices[-1] == 1000
    np.testing.assert_array_equal(comparison_indices(5), [1, 2, 3, 4, 5])


def test_free_vibration():
    """
    Memoryless bar against the closed-form modal solution.
    """
    cfg = read_config('tests/fixtures/free_vibration.json')
    result = run_scenario(cfg)
    assert result.passed
    assert result.summary['reference'] == 'closed_form'
    assert set(result.summary['diagnostics']) == {'analytic_gap', 'energy_bound'}
    assert result.trajectory.d.shape == (401, 2)


def test_relaxation(tmp_path):
    result = run_scenario(config(tmp_path, scenario='relaxation'))
    assert result.passed
    assert set(result.summary['diagnostics']) == {'energy_bound', 'apriori_growth'}
    energy = result.summary['energy']
    assert energy['final_total'] < energy['max_total']


def test_oracle_compare(tmp_path):
    load = {'type': 'sinusoid', 'amplitude': 1.0, 'omega': 2.0, 'modes': [1, 2]}
    cfg = config(tmp_path, scenario='oracle_compare', load=load,
                 integrator={'dt': 0.002, 'T': 2.0})
    result = run_scenario(cfg)
    diagnostics = result.summary['diagnostics']
    assert diagnostics['oracle_gap']['passed']
    assert diagnostics['initial_value']['passed']
    assert diagnostics['conjugate_symmetry']['passed']
    assert result.summary['oracle_gap'] == diagnostics['oracle_gap']['value']

    times, d, reference = result.comparison
    assert d.shape == reference.shape == (200, 2)
    assert times[0] == pytest.approx(0.2)
    assert times[-1] == pytest.approx(2.0)


ONE_MODE = {'n_modes': 1, 'length': 1.0, 'c2': 1.0}
SINUSOID = {'type': 'sinusoid', 'amplitude': 1.0, 'omega': 2.0, 'modes': [1]}


def test_forced_beyond_oracle_horizon(tmp_path):
    """
    The oracle resolves t <= 6.4 for this bar; longer runs use a run at dt/4.
    """
    cfg = config(tmp_path, scenario='forced', bar=ONE_MODE, d0=[1.0], load=SINUSOID,
                 integrator={'dt': 0.01, 'T': 20.0})
    result = run_scenario(cfg)
    summary = result.summary
    assert summary['reference'] == 'self_dt_0.0025'
    assert summary['oracle_gap'] is None
    assert 'oracle_gap' not in summary['diagnostics']
    assert summary['diagnostics']['reference_gap']['passed']
    times, d, reference = result.comparison
    assert times[-1] == pytest.approx(20.0)
    assert d.shape == reference.shape


def test_forced_within_oracle_horizon(tmp_path):
    cfg = config(tmp_path, scenario='forced', bar=ONE_MODE, d0=[1.0], load=SINUSOID,
                 integrator={'dt': 0.005, 'T': 5.0})
    result = run_scenario(cfg)
    assert result.summary['reference'] == 'laplace_oracle'
    assert result.summary['diagnostics']['oracle_gap']['passed']


def test_oracle_compare_beyond_horizon(tmp_path):
    cfg = config(tmp_path, scenario='oracle_compare', bar=ONE_MODE, d0=[1.0], load=SINUSOID,
                 integrator={'dt': 0.01, 'T': 20.0})
    with pytest.raises(InversionRangeError):
        run_scenario(cfg)


def test_convergence_study_beyond_horizon(tmp_path):
    cfg = config(tmp_path, scenario='convergence_study', bar=ONE_MODE, d0=[1.0],
                 integrator={'dt': 0.04, 'T': 20.0},
                 study={'dt_list': [0.04, 0.02, 0.01]})
    result = run_scenario(cfg)
    assert result.summary['reference'] == 'self_dt_0.0025'
    assert len(result.summary['orders']) == 2


@pytest.mark.parametrize('alpha, min_order', [(1.0, 1.8), (0.5, 1.0)])
def test_convergence_study_orders(tmp_path, alpha, min_order):
    """
    Richardson orders against the Laplace reference: second order for the
    exponential kernel, reduced order for the weakly singular one.
    """
    kernels = [{'gamma': 0.3, 'tau': 1.0, 'alpha': alpha}]
    cfg = config(tmp_path, scenario='convergence_study', kernels=kernels, bar=ONE_MODE,
                 d0=[1.0], integrator={'dt': 0.004, 'T': 1.0},
                 study={'dt_list': [0.004, 0.002, 0.001], 'min_order': min_order})
    result = run_scenario(cfg)
    summary = result.summary
    assert summary['reference'] == 'laplace_oracle'
    assert summary['monotone']
    assert min(summary['orders']) >= min_order
    assert result.passed


def test_forced_table_load():
    """
    Tabulated loads have no oracle comparison.
    """
    result = run_scenario(read_config('tests/fixtures/forced_table.json'))
    assert set(result.summary['diagnostics']) == {'apriori_growth'}
    assert result.summary['reference'] is None
    assert result.comparison is None


def test_convergence_study_self_reference(tmp_path):
    load = {'type': 'table', 'times': [0.0, 1.0], 'values': [0.0, 1.0]}
    cfg = config(tmp_path, scenario='convergence_study', load=load,
                 integrator={'dt': 0.04, 'T': 1.0},
                 study={'dt_list': [0.01, 0.04, 0.02]})
    result = run_scenario(cfg)
    summary = result.summary
    assert summary['reference'] == 'self_dt_0.0025'
    assert summary['dt_list'] == [0.04, 0.02, 0.01]
    assert len(summary['orders']) == 2
    assert summary['diagnostics'] == {}
    assert result.passed


def test_convergence_study_invalid_steps(tmp_path):
    cfg = config(tmp_path, scenario='convergence_study', study={'dt_list': [0.04, 0.03, 0.01]})
    with pytest.raises(ConfigError):
        run_scenario(cfg)


def test_kernel_check():
    cfg = read_config('tests/fixtures/kernel_check.json')
    result = run_scenario(cfg)
    assert result.passed
    diagnostics = result.summary['diagnostics']
    for name in ('l1_gap', 'l1_infinity', 'laplace_gap', 'beta_nonnegative', 'positive_type',
                 'monotonicity_1', 'monotonicity_4'):
        assert diagnostics[f'kernel_1.{name}']['passed'], name
    assert diagnostics['beta_condition']['sum_integrals'] == pytest.approx(
        0.5 * (1.0 - np.exp(-5.0)), abs=1e-9)
    assert result.weights.weights.shape == (101, )


def test_kernel_check_fractional_pair(tmp_path):
    kernels = [{'gamma': 0.3, 'tau': 0.5, 'alpha': 0.35}, {'gamma': 0.2, 'tau': 2.0, 'alpha': 0.8}]
    cfg = config(tmp_path, scenario='kernel_check', kernels=kernels,
                 diagnostics={'grid_points': 41, 'trials': 20})
    result = run_scenario(cfg)
    assert result.passed
    assert 'kernel_2.positive_type' in result.summary['diagnostics']
    assert result.weights is None


def test_deterministic():
    cfg = read_config('tests/fixtures/kernel_check.json')
    assert run_scenario(cfg).summary == run_scenario(cfg).summary


def test_missing_inputs():
    cfg = read_config('tests/fixtures/kernel_check.json')
    with pytest.raises(ConfigError):
        run_scenario(dataclasses.replace(cfg, scenario='relaxation'))
    with pytest.raises(ConfigError):
        run_scenario(dataclasses.replace(cfg, kernels=()))
