"""Runtime Configuration Module.

Numerical defaults of the estimation pipeline and environment-driven settings
loaded from a ``.env`` file.

Environment Variables (all optional):
    HYPOCTRL_THREADS: Maximum number of concurrent estimation workers
        (default: min(4, cpu count))
    HYPOCTRL_LOG_LEVEL: Console/file log level (default: INFO)

Usage:
    # Put overrides in ~/.hypoctrl.env
    HYPOCTRL_THREADS=8
    HYPOCTRL_LOG_LEVEL=DEBUG
"""

import os
from pathlib import Path

from dotenv import load_dotenv

# Numerical defaults
SENTINEL = 1e12  # objective value returned for failed evaluations
EXPLOSION_BOUND = 1e8  # simulation aborts beyond this absolute state value
JACOBIAN_THRESHOLD = 1e-8  # relative finite-difference nonzero threshold
JITTER = 1e-12  # relative diagonal jitter for contrast covariances
H1_THRESHOLD = 1e-12  # minimal singular value accepted by the H1 check
SYMMETRY_TOL = 1e-10

# Optimizer and tracking solver defaults
SIMPLEX_MAX_EVALS = 500
SIMPLEX_TOL = 1e-6
SIMPLEX_STEP = 0.1
TRACKING_MAX_ITER = 30
TRACKING_EPS_PER_STEP = 1e-6  # epsilon defaults to this times n

# Load environment variables from .env file
env_file = Path("~").expanduser() / ".hypoctrl.env"
if env_file.exists():
    load_dotenv(env_file)


def get_worker_count() -> int:
    """Get the bound of the estimation worker pool.

    Returns:
        int: Value of HYPOCTRL_THREADS, or min(4, cpu count) when unset.

    Raises:
        ValueError: If HYPOCTRL_THREADS is not a positive integer
    """
    raw = os.getenv("HYPOCTRL_THREADS")
    if raw is None or raw == "":
        return min(4, os.cpu_count() or 1)
    try:
        workers = int(raw)
    except ValueError:
        raise ValueError(f"HYPOCTRL_THREADS must be an integer, got {raw!r}")
    if workers < 1:
        raise ValueError(f"HYPOCTRL_THREADS must be >= 1, got {workers}")
    return workers


def get_log_level() -> str:
    """Get the log level from HYPOCTRL_LOG_LEVEL (default: INFO)."""
    return os.getenv("HYPOCTRL_LOG_LEVEL", "INFO").upper()
