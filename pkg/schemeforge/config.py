# schemeforge/config.py

# This module holds run-time configuration: defaults, environment lookups and the CLI config record.

import os
from dataclasses import dataclass, field
from pathlib import Path

import structlog

logger = structlog.get_logger()

THREADS_ENV_VAR = "SCHEMEFORGE_THREADS"

# Decision process knobs
WORKER_THRESHOLD = 50
MULTISCALE_RATIO = 100.0
EPS_ZERO = 1e-12
EPS_SYM = 1e-12

# Time stepping defaults
DT_ALLEN_CAHN_1D = 0.1
DT_ALLEN_CAHN_2D = 0.05
ADVECTION_SAFETY = 0.9
NEWTON_TOL = 1e-10
NEWTON_MAX = 25

SAMPLE_EVERY = 1.0
DEFAULT_OUT_DIR = "results"

SUBCOMMANDS = ("classify", "solve", "verify", "bench")


@dataclass
class CliConfig:
    """
    Everything a subcommand needs besides the parsed problem spec.

    Overrides left as None fall back to the defaults of the problem family.
    """

    subcommand: str
    spec_path: Path
    out_dir: Path = Path(DEFAULT_OUT_DIR)
    dt: float | None = None
    h: float | None = None
    p: int | None = None
    repeats: int | None = None
    scheme: str | None = None
    threads: int | None = None
    worker_threshold: int = WORKER_THRESHOLD
    multiscale_ratio: float = MULTISCALE_RATIO
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.subcommand not in SUBCOMMANDS:
            raise ValueError(f"unknown subcommand '{self.subcommand}'")
        self.spec_path = Path(self.spec_path)
        self.out_dir = Path(self.out_dir)
        if not self.spec_path.exists():
            raise FileNotFoundError(f"spec file '{self.spec_path}' does not exist")
        if self.repeats is not None and self.repeats < 1:
            raise ValueError("repeats must be at least 1")
        if self.threads is not None and self.threads < 1:
            raise ValueError("threads must be at least 1")


def resolve_threads(flag: int | None) -> int | None:
    """
    Work out the thread cap for numerical kernels.

    Args:
        flag (int | None): Value of the --threads option.

    Returns:
        int | None: The explicit flag, else the SCHEMEFORGE_THREADS value, else None (no cap).

    Raises:
        ValueError: If the environment variable is not a positive integer.
    """
    if flag is not None:
        return flag

    raw = os.getenv(THREADS_ENV_VAR)
    if raw is None or raw.strip() == "":
        return None

    try:
        threads = int(raw)
    except ValueError as e:
        raise ValueError(f"{THREADS_ENV_VAR} must be an integer, got '{raw}'") from e
    if threads < 1:
        raise ValueError(f"{THREADS_ENV_VAR} must be at least 1, got {threads}")

    logger.debug("Thread cap from environment", threads=threads)
    return threads
