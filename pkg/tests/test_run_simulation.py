import csv
import json
import subprocess
import sys
from pathlib import Path

from run_simulation import EXIT_DIAGNOSTICS, EXIT_NUMERICAL, EXIT_OK, EXIT_VALIDATION, run

REPO = Path(__file__).resolve().parents[1]
FIXTURES = REPO / 'tests' / 'fixtures'


def write_config(directory, data):
    filename = directory / 'config.json'
    with open(filename, 'w') as fp_config:
        json.dump(data, fp_config)
    return filename


def test_run_free_vibration(tmp_path):
    assert run(FIXTURES / 'free_vibration.json', out_dir=tmp_path, progress=False) == EXIT_OK

    with open(tmp_path / 'trajectory.csv', 'r', newline='') as fp_csv:
        rows = list(csv.reader(fp_csv))
    assert rows[0] == ['t', 'd_1', 'd_2', 'v_1', 'v_2', 'E_kin', 'E_el', 'E_tot']
    assert len(rows) == 402

    with open(tmp_path / 'summary.json', 'r') as fp_summary:
        summary = json.load(fp_summary)
    assert summary['passed']
    assert summary['scenario'] == 'free_vibration'


def test_run_kernel_check(tmp_path):
    assert run(FIXTURES / 'kernel_check.json', out_dir=tmp_path, seed=5, progress=False) == EXIT_OK
    assert (tmp_path / 'weights.csv').exists()
    assert not (tmp_path / 'trajectory.csv').exists()
    with open(tmp_path / 'summary.json', 'r') as fp_summary:
        assert json.load(fp_summary)['rng_seed'] == 5


def test_run_failed_diagnostics(tmp_path):
    """
    No scheme reaches order 10, so the study fails but still writes its outputs.
    """
    code = run(FIXTURES / 'convergence_study.json', out_dir=tmp_path, progress=False)
    assert code == EXIT_DIAGNOSTICS
    with open(tmp_path / 'summary.json', 'r') as fp_summary:
        summary = json.load(fp_summary)
    assert not summary['passed']
    assert summary['reference'] == 'laplace_oracle'
    assert len(summary['orders']) == 2


def test_run_invalid_config(tmp_path):
    data = {'scenario': 'relaxation', 'rho': 1.0, 'integrator': {'dt': 0.1, 'T': 1.0}, 'x': 1}
    assert run(write_config(tmp_path, data), out_dir=tmp_path) == EXIT_VALIDATION
    assert run(tmp_path / 'missing.json', out_dir=tmp_path) == EXIT_VALIDATION
    assert not (tmp_path / 'summary.json').exists()


def test_run_step_limit(tmp_path):
    data = {
        'scenario': 'relaxation',
        'rho': 1.0,
        'bar': {
            'n_modes': 1,
            'length': 1.0,
            'c2': 1.0
        },
        'integrator': {
            'dt': 0.01,
            'T': 1.0,
            'max_steps': 10
        },
    }
    assert run(write_config(tmp_path, data), out_dir=tmp_path) == EXIT_NUMERICAL


def test_run_reproducible(tmp_path):
    """
    Repeated runs with the same configuration and seed write identical files.
    """
    for fixture in ('free_vibration.json', 'kernel_check.json'):
        first, second = tmp_path / fixture / 'first', tmp_path / fixture / 'second'
        assert run(FIXTURES / fixture, out_dir=first, seed=3, progress=False) == EXIT_OK
        assert run(FIXTURES / fixture, out_dir=second, seed=3, progress=False) == EXIT_OK
        names = sorted(path.name for path in first.iterdir())
        assert names == sorted(path.name for path in second.iterdir())
        assert 'summary.json' in names
        for name in names:
            assert (first / name).read_bytes() == (second / name).read_bytes(), name


def test_run_beyond_oracle_horizon(tmp_path):
    data = {
        'scenario': 'oracle_compare',
        'rho': 1.0,
        'bar': {
            'n_modes': 1,
            'length': 1.0,
            'c2': 1.0
        },
        'kernels': [{
            'gamma': 0.3,
            'tau': 1.0,
            'alpha': 0.5
        }],
        'd0': [1.0],
        'integrator': {
            'dt': 0.01,
            'T': 20.0
        },
    }
    assert run(write_config(tmp_path, data), out_dir=tmp_path) == EXIT_NUMERICAL
    assert not (tmp_path / 'summary.json').exists()


def test_command_line(tmp_path):
    config = write_config(tmp_path, {'scenario': 'forced'})
    result = subprocess.run(
        [sys.executable, 'run_simulation.py', 'run',
         str(config), '--out',
         str(tmp_path), '--quiet'],
        cwd=REPO,
        capture_output=True,
        text=True,
        check=False)
    assert result.returncode == EXIT_VALIDATION
    assert 'Invalid input' in result.stderr

    result = subprocess.run([sys.executable, 'run_simulation.py', '--version'],
                            cwd=REPO,
                            capture_output=True,
                            text=True,
                            check=True)
    assert result.stdout.startswith('fracvisco ')
