"""
All project configuration will be saved here

Values can be overridden from a `.env` file, a `key=value` config file passed
with `--config`, or at runtime through `update_config`.
"""

import os

from dotenv import load_dotenv

load_dotenv()

VERSION = "0.1.0"

# Master seed used when neither --seed nor a config file provides one
MASTER_SEED: int = int(os.environ.get("SVTAIL_SEED", "0"))

# Solver parameters
# Relative tolerance for extreme singular values (tail experiments reach eps down to ~1e-4)
DEFAULT_TOL: float = 1e-8
# Power / inverse iteration cap before falling back to a full SVD
MAX_ITERATIONS: int = 500

# Constant selection
BISECTION_TOL: float = 1e-6
SCHEDULE_SLACK: float = 2.0
DEFAULT_C2: float = 1.0

# Statistics
CI_LEVEL: float = 0.95
# Grid points with fewer successes are left out of the exponent fit
MIN_FIT_SUCCESSES: int = 10

# Share of the zero-corner probability the two Markov events may jointly fail with
SHIFT_FAILURE_SHARE: float = 0.01

# Script parameters
OUTPUT_DIR: str = "runs"
# Worker cap for trial pools (None means one worker per physical core)
JOBS = None
# Whether experiments print progress lines
VERBOSE: bool = True


def update_config(settings):
    """Update configuration values."""
    global MASTER_SEED, DEFAULT_TOL, MAX_ITERATIONS, BISECTION_TOL, SCHEDULE_SLACK
    global CI_LEVEL, MIN_FIT_SUCCESSES, SHIFT_FAILURE_SHARE, OUTPUT_DIR, JOBS, VERBOSE

    if 'master_seed' in settings:
        MASTER_SEED = int(settings['master_seed'])

    if 'tol' in settings:
        DEFAULT_TOL = float(settings['tol'])

    if 'max_iterations' in settings:
        MAX_ITERATIONS = int(settings['max_iterations'])

    if 'bisection_tol' in settings:
        BISECTION_TOL = float(settings['bisection_tol'])

    if 'schedule_slack' in settings:
        SCHEDULE_SLACK = float(settings['schedule_slack'])

    if 'ci_level' in settings:
        CI_LEVEL = float(settings['ci_level'])

    if 'min_fit_successes' in settings:
        MIN_FIT_SUCCESSES = int(settings['min_fit_successes'])

    if 'shift_failure_share' in settings:
        SHIFT_FAILURE_SHARE = float(settings['shift_failure_share'])

    if 'output_dir' in settings:
        OUTPUT_DIR = str(settings['output_dir'])

    if 'jobs' in settings:
        JOBS = None if settings['jobs'] is None else int(settings['jobs'])

    if 'verbose' in settings:
        VERBOSE = bool(settings['verbose'])

    return {
        'master_seed': MASTER_SEED,
        'tol': DEFAULT_TOL,
        'max_iterations': MAX_ITERATIONS,
        'bisection_tol': BISECTION_TOL,
        'schedule_slack': SCHEDULE_SLACK,
        'ci_level': CI_LEVEL,
        'min_fit_successes': MIN_FIT_SUCCESSES,
        'shift_failure_share': SHIFT_FAILURE_SHARE,
        'output_dir': OUTPUT_DIR,
        'jobs': JOBS,
        'verbose': VERBOSE,
    }
