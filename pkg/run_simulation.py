#!/usr/bin/env python3

import argparse
import logging
import sys

from fracvisco import __version__ as fracvisco_version
from fracvisco.errors import NumericalError, ValidationError
from fracvisco.io import read_config, write_comparison_csv, write_summary_json, \
    write_trajectory_csv, write_weights_csv
from fracvisco.scenarios import run_scenario
from fracvisco.utils import print_summary

_LOG_LEVEL_STRINGS = ['CRITICAL', 'ERROR', 'WARNING', 'INFO', 'DEBUG']

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3
EXIT_DIAGNOSTICS = 4


def _log_level_string_to_int(log_level_string):
    if log_level_string not in _LOG_LEVEL_STRINGS:
        message = f'invalid choice: {log_level_string} (choose from {_LOG_LEVEL_STRINGS})'
        raise argparse.ArgumentTypeError(message)

    log_level_int = getattr(logging, log_level_string, logging.INFO)
    # check the logging log_level_choices have not changed from our expected values
    assert isinstance(log_level_int, int)

    return log_level_int


def run(config_path, out_dir=None, seed=None, progress=True):
    '''
    Execute the scenario of a configuration file and write its outputs.

    # Returns
    Process exit code
    '''
    try:
        cfg = read_config(config_path, out_dir=out_dir, seed=seed)
        result = run_scenario(cfg, progress=progress)
    except ValidationError as error:
        logging.error(f'Invalid input: {error}')
        return EXIT_VALIDATION
    except NumericalError as error:
        logging.error(f'Numerical failure: {error}')
        return EXIT_NUMERICAL

    outputs = cfg.outputs
    if result.trajectory is not None:
        write_trajectory_csv(result.trajectory, outputs['trajectory_csv'])
    if result.comparison is not None:
        write_comparison_csv(*result.comparison,
                             outputs.get('comparison_csv',
                                         outputs['summary_json'].with_name('comparison.csv')))
    if result.weights is not None:
        write_weights_csv(result.weights, outputs['weights_csv'])
    write_summary_json(result.summary, outputs['summary_json'])

    print_summary(result.summary, printer=logging.info)
    logging.info(f"Summary written to {outputs['summary_json']}")

    if not result.passed:
        logging.warning('Diagnostics failed.')
        return EXIT_DIAGNOSTICS
    return EXIT_OK


def main():
    parser = argparse.ArgumentParser(
        description="Simulate fractional viscoelastic vibrations in modal coordinates.")
    parser.add_argument("-l",
                        "--log-level",
                        default="INFO",
                        dest="log_level",
                        type=_log_level_string_to_int,
                        nargs="?",
                        help=f"Set the logging output level. {_LOG_LEVEL_STRINGS}")
    parser.add_argument("--version",
                        action="version",
                        version=f"fracvisco {fracvisco_version}")
    subparsers = parser.add_subparsers(dest="command")

    run_parser = subparsers.add_parser("run", help="Run the scenario of a JSON configuration")
    run_parser.add_argument("config", help="Scenario configuration (JSON)")
    run_parser.add_argument("--out",
                            help="Output directory of relative output paths "
                            "[default: settings.OUTPUT_DIR]",
                            default=None)
    run_parser.add_argument("--seed",
                            help="Override the rng_seed of the configuration",
                            type=int,
                            default=None)
    run_parser.add_argument("--quiet",
                            help="Only log warnings and errors, no progress bars",
                            action="store_true")
    args = parser.parse_args()

    if args.command is None:
        parser.print_help()
        sys.exit()

    # Setting logging level
    numeric_level = logging.WARNING if args.quiet else args.log_level
    if not isinstance(numeric_level, int):
        raise ValueError("Invalid log level")
    logging.basicConfig(level=numeric_level, format="%(message)s")

    sys.exit(run(args.config, out_dir=args.out, seed=args.seed, progress=not args.quiet))


if __name__ == '__main__':
    main()
