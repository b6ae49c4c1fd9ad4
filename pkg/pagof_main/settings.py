"""
Runtime settings for pagof.

Every default used by the library, the bootstrap and the experiment harness
is read once from config/config.ini; environment variables (loaded through
python-dotenv) override the runtime and logging entries.
"""

from os import environ
from pathlib import Path
from config.configuration import ConfigurationCenter


BASE_DIR = Path(__file__).resolve().parent.parent
configuration_reader = ConfigurationCenter()

# Logging
LOG_LEVEL = configuration_reader.get_environmental(
    'PAGOF_LOG_LEVEL', configuration_reader.get_parameter('logging', 'level') or 'INFO')
LOG_DIR = configuration_reader.get_environmental(
    'PAGOF_LOG_DIR', configuration_reader.get_parameter('logging', 'log_dir') or 'logs')
environ.setdefault('PAGOF_LOG_LEVEL', LOG_LEVEL)
environ.setdefault('PAGOF_LOG_DIR', LOG_DIR)

# FPCA
VARIANCE_THRESHOLD = configuration_reader.get_float('fpca', 'variance_threshold', 0.95)

# Penalized GFLM estimation
BASIS_SIZE = configuration_reader.get_int('gflm', 'basis_size', 20)
SPLINE_DEGREE = configuration_reader.get_int('gflm', 'spline_degree', 3)
PENALTY_ORDER = configuration_reader.get_int('gflm', 'penalty_order', 2)
LAMBDA_GRID_SIZE = configuration_reader.get_int('gflm', 'lambda_grid_size', 36)
LAMBDA_GRID_MIN = configuration_reader.get_float('gflm', 'lambda_grid_min', 1e-6)
LAMBDA_GRID_MAX = configuration_reader.get_float('gflm', 'lambda_grid_max', 1e8)
SATURATION_TOL = configuration_reader.get_float('gflm', 'saturation_tol', 1e-6)
IRLS_MAX_ITER = configuration_reader.get_int('gflm', 'max_iter', 100)
IRLS_TOL = configuration_reader.get_float('gflm', 'tol', 1e-8)
IRLS_MAX_HALVINGS = configuration_reader.get_int('gflm', 'max_halvings', 20)
SEPARATION_BOUND = configuration_reader.get_float('gflm', 'separation_bound', 1e6)

# Bootstrap calibration
BOOTSTRAP_REPLICATES = configuration_reader.get_int('bootstrap', 'replicates', 500)
ALPHA = configuration_reader.get_float('bootstrap', 'alpha', 0.05)
PROBABILITY_CLAMP = configuration_reader.get_float('bootstrap', 'probability_clamp', 1e-10)
EXACT_FIT_TOL = configuration_reader.get_float('bootstrap', 'exact_fit_tol', 1e-12)
NORM_MATCHED = configuration_reader.get_bool('bootstrap', 'norm_matched', True)

# Monte Carlo experiments
EXPERIMENT_REPS = configuration_reader.get_int('experiment', 'reps', 200)
EXPERIMENT_REPLICATES = configuration_reader.get_int('experiment', 'replicates', 500)
EXPERIMENT_N_LIST = [int(v) for v in configuration_reader.get_list('experiment', 'n_list', ['50', '100'])]
EXPERIMENT_ALPHA_LIST = [float(v) for v in configuration_reader.get_list('experiment', 'alpha_list', ['0.01', '0.05', '0.10'])]
EXPERIMENT_P_MODES = configuration_reader.get_list('experiment', 'p_modes', ['auto', '5', '10'])
EXPERIMENT_SEED = configuration_reader.get_int('experiment', 'seed', 20250101)
MAX_FAILURE_FRACTION = configuration_reader.get_float('experiment', 'max_failure_fraction', 0.01)
EXPERIMENT_OUTPUT = configuration_reader.get_parameter('experiment', 'output_path') or 'results/experiment'

# Parallelism
N_JOBS = int(configuration_reader.get_environmental(
    'PAGOF_N_JOBS', str(configuration_reader.get_int('runtime', 'n_jobs', 1))))
KERNEL_CHUNK_SIZE = configuration_reader.get_int('runtime', 'kernel_chunk_size', 16)
