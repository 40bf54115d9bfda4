from pathlib import Path
from tempfile import gettempdir

from decouple import config

# Basic settings
OUTPUT_DIR = config('OUTPUT_DIR', default=str(Path(gettempdir(), 'fracvisco')))
MAX_STEPS = config('MAX_STEPS', default=2_000_000, cast=int)

# Mittag-Leffler evaluation
ML_SERIES_MAX_TERMS = config('ML_SERIES_MAX_TERMS', default=250, cast=int)
ML_SERIES_ABS_TOL = config('ML_SERIES_ABS_TOL', default=1e-16, cast=float)
ML_CROSSOVER = config('ML_CROSSOVER', default=8.0, cast=float)
ML_ASYMPTOTIC_TERMS = config('ML_ASYMPTOTIC_TERMS', default=60, cast=int)
ML_CONTOUR_NODES = config('ML_CONTOUR_NODES', default=24, cast=int)
ML_CANCELLATION_LIMIT = config('ML_CANCELLATION_LIMIT', default=1e4, cast=float)

# Laplace inversion and convolution quadrature
TALBOT_NODES = config('TALBOT_NODES', default=32, cast=int)
CQ_RADIUS_EPS = config('CQ_RADIUS_EPS', default=1e-15, cast=float)

# Diagnostics
KERNEL_CHECK_RTOL = config('KERNEL_CHECK_RTOL', default=1e-6, cast=float)
POSITIVE_TYPE_TOL = config('POSITIVE_TYPE_TOL', default=1e-10, cast=float)
MONOTONICITY_TOL = config('MONOTONICITY_TOL', default=1e-8, cast=float)
L1_GAP_TOL = config('L1_GAP_TOL', default=1e-8, cast=float)
GROWTH_FACTOR = config('GROWTH_FACTOR', default=2.0, cast=float)  # sup ratio, [T/2,T] vs [0,T/2]
ENERGY_TOL = config('ENERGY_TOL', default=1e-2, cast=float)
ORACLE_GAP_FLOOR = config('ORACLE_GAP_FLOOR', default=1e-3, cast=float)
