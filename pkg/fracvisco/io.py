import csv
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import jsonschema
import numpy as np

from fracvisco import settings
from fracvisco.errors import ConfigError
from fracvisco.integrator import IntegratorConfig
from fracvisco.kernel import KernelParams
from fracvisco.modal_system import LoadDescriptor, LoadSignal, assemble_bar, assemble_general

logger = logging.getLogger(__name__)

SCHEMA_PATH = Path(__file__).with_name('config_schema.json')


def _error_path(error):
    path = 'config'
    for part in error.absolute_path:
        path += f'[{part}]' if isinstance(part, int) else f'.{part}'
    return path


def _error_message(error):
    # combinators report the whole instance; their schemas carry a description instead
    if error.validator in ('not', 'anyOf', 'oneOf'):
        return error.schema.get('description', error.message)
    return error.message


def validate_config(data):
    """
    Check a parsed configuration against config_schema.json.

    # Raises
    ConfigError listing every violation
    """
    with open(SCHEMA_PATH, 'r') as fp_schema:
        schema = json.load(fp_schema)
    validator = jsonschema.Draft7Validator(schema)
    errors = sorted(validator.iter_errors(data),
                    key=lambda error: [str(part) for part in error.absolute_path])
    if errors:
        raise ConfigError('Invalid configuration:\n  ' +
                          '\n  '.join(f'{_error_path(error)}: {_error_message(error)}'
                                      for error in errors))


def _as_integers(data):
    """
    Draft-07 accepts 2.0 where an integer is required; convert those entries to int.
    """
    for section, key in (('bar', 'n_modes'), ('integrator', 'max_steps'),
                         ('diagnostics', 'grid_points'), ('diagnostics', 'trials')):
        if key in data.get(section, {}):
            data[section][key] = int(data[section][key])
    if 'modes' in data.get('load', {}):
        data['load']['modes'] = [int(mode) for mode in data['load']['modes']]
    if 'rng_seed' in data:
        data['rng_seed'] = int(data['rng_seed'])


@dataclass(frozen=True, eq=False)
class SimulationConfig:
    # pylint: disable=too-many-instance-attributes
    scenario: str
    system: object
    kernels: tuple
    integrator: IntegratorConfig
    dt_list: tuple = ()
    min_order: float = None
    diagnostics: dict = field(default_factory=dict)
    outputs: dict = field(default_factory=dict)
    rng_seed: int = 0


def read_table_csv(filename):
    """
    Read a two-column load table (time, value); lines starting with '#' are skipped.
    """
    times, values = [], []
    with open(filename, 'r', newline='') as fp_table:
        for row in csv.reader(line for line in fp_table if not line.startswith('#')):
            if not row:
                continue
            try:
                times.append(float(row[0]))
                values.append(float(row[1]))
            except (ValueError, IndexError) as error:
                raise ConfigError(f'Malformed row {row} in load table {filename}') from error
    return times, values


def _load_signal(data, n_modes, base_dir):
    data = dict(data)
    channel = data.pop('channel', 'volume')
    modes = data.pop('modes', [1])
    if 'file' in data:
        filename = Path(base_dir, data.pop('file'))
        if not filename.exists():
            raise ConfigError(f'Load table {filename} does not exist')
        data['times'], data['values'] = read_table_csv(filename)
    if max(modes) > n_modes:
        raise ConfigError(f'Load mode {max(modes)} exceeds the {n_modes} system modes')

    descriptor = LoadDescriptor.from_dict(data)
    loaded = [descriptor if k + 1 in modes else LoadDescriptor() for k in range(n_modes)]
    unloaded = (LoadDescriptor(), ) * n_modes
    if channel == 'volume':
        return LoadSignal(tuple(loaded), unloaded)
    return LoadSignal(unloaded, tuple(loaded))


def _kernels(data):
    kernels = []
    for item in data.get('kernels', []):
        if item['gamma'] == 0.0:
            logger.info('Kernel with gamma = 0 carries no memory and is dropped')
            continue
        kernels.append(KernelParams(**item))
    return tuple(kernels)


def _system(data, kernels, base_dir):
    if 'bar' in data:
        n_modes = data['bar']['n_modes']
    elif 'general' in data:
        n_modes = len(data['general']['lambda'])
    else:
        return None

    load = _load_signal(data['load'], n_modes, base_dir) if 'load' in data else None
    if 'bar' in data:
        return assemble_bar(rho=data['rho'],
                            kernels=kernels,
                            kernel_split=data.get('kernel_split', (1.0, 0.0)),
                            load=load,
                            d0=data.get('d0'),
                            v0=data.get('v0'),
                            **data['bar'])
    if 'kernel_split' in data:
        logger.warning('kernel_split is ignored for general systems')
    general = data['general']
    return assemble_general(rho=data['rho'],
                            lam=general['lambda'],
                            B1=general['B1'],
                            B2=general['B2'],
                            kernels=kernels,
                            load=load,
                            d0=data.get('d0'),
                            v0=data.get('v0'),
                            rng_seed=data.get('rng_seed', 0))


def read_config(filename, out_dir=None, seed=None):
    '''
    Parse and validate a JSON scenario configuration.

    # Arguments
    filename (str): Configuration file
    out_dir (str): Directory of relative output paths [default: settings.OUTPUT_DIR]
    seed (int): Overrides rng_seed of the configuration

    # Return type
    SimulationConfig

    # Raises
    ConfigError on malformed files, ValidationError on invalid model parameters
    '''
    try:
        with open(filename, 'r') as fp_config:
            data = json.load(fp_config)
    except (OSError, json.JSONDecodeError) as error:
        raise ConfigError(f'Could not read configuration {filename}: {error}') from error

    validate_config(data)
    _as_integers(data)
    if seed is not None:
        data['rng_seed'] = seed

    base_dir = Path(filename).parent
    kernels = _kernels(data)
    outputs = {'trajectory_csv': 'trajectory.csv', 'summary_json': 'summary.json'}
    outputs.update(data.get('outputs', {}))
    out_dir = Path(out_dir or settings.OUTPUT_DIR)

    study = data.get('study', {})
    dt_list = tuple(sorted(study.get('dt_list', ()), reverse=True))
    return SimulationConfig(scenario=data['scenario'],
                            system=_system(data, kernels, base_dir),
                            kernels=kernels,
                            integrator=IntegratorConfig(**data['integrator']),
                            dt_list=dt_list,
                            min_order=study.get('min_order'),
                            diagnostics=dict(data.get('diagnostics', {})),
                            outputs={key: out_dir / value
                                     for key, value in outputs.items()},
                            rng_seed=data.get('rng_seed', 0))


def _format(value):
    return format(float(value), '.17g')


def write_trajectory_csv(traj, filename):
    """
    Columns t, d_1..d_m, v_1..v_m, E_kin, E_el, E_tot, 17 significant digits.
    """
    m = traj.n_modes
    header = ['t'] + [f'd_{k}' for k in range(1, m + 1)] + [f'v_{k}' for k in range(1, m + 1)]
    header += ['E_kin', 'E_el', 'E_tot']
    columns = np.column_stack([traj.times, traj.d, traj.v, traj.energy.kinetic,
                               traj.energy.elastic, traj.energy.total])
    _write_csv(filename, header, columns)


def write_comparison_csv(times, d, reference, filename):
    """
    Columns t, d_1..d_m, ref_1..ref_m of a stepper/reference comparison.
    """
    m = d.shape[1]
    header = ['t'] + [f'd_{k}' for k in range(1, m + 1)] + [f'ref_{k}' for k in range(1, m + 1)]
    _write_csv(filename, header, np.column_stack([times, d, reference]))


def write_weights_csv(rule, filename):
    """
    Columns lag_index, weight of a ConvolutionRule.
    """
    columns = np.column_stack([np.arange(rule.weights.size), rule.weights])
    with _open_output(filename) as fp_csv:
        writer = csv.writer(fp_csv, lineterminator='\n')
        writer.writerow(['lag_index', 'weight'])
        for lag, weight in columns:
            writer.writerow([int(lag), _format(weight)])


def _open_output(filename):
    Path(filename).parent.mkdir(parents=True, exist_ok=True)
    return open(filename, 'w', newline='')  # pylint: disable=consider-using-with


def _write_csv(filename, header, columns):
    with _open_output(filename) as fp_csv:
        writer = csv.writer(fp_csv, lineterminator='\n')
        writer.writerow(header)
        for row in columns:
            writer.writerow([_format(value) for value in row])
    logger.debug(f'Wrote {len(columns)} rows to {filename}')


def _jsonable(value):
    if isinstance(value, dict):
        return {str(key): _jsonable(item) for key, item in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [_jsonable(item) for item in value]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return float(value) if math.isfinite(value) else None
    return value


def write_summary_json(summary, filename):
    """
    Deterministic JSON summary: sorted keys, indent 2, non-finite numbers as null.
    """
    with _open_output(filename) as fp_json:
        json.dump(_jsonable(summary), fp_json, indent=2, sort_keys=True)
        fp_json.write('\n')
