"""
Runtime settings for qotto.
Output location, worker count and log level, each overridable from the environment.
"""

import logging
import os
from pathlib import Path

from .errors import ConfigError

logger = logging.getLogger(__name__)

DEFAULT_OUTPUT_DIR = Path("qotto-out")
DEFAULT_LOG_LEVEL = "WARNING"

# Supported scenario names, in the order `qotto list-scenarios` prints them
SCENARIOS = [
    "battery-charge",
    "battery-stored-vs-eff",
    "battery-detuning-sweep",
    "battery-pump-sweep",
    "engine-short-cycle-sweep",
    "engine-threshold",
    "engine-asymptotic",
]

PRESETS = ["paper", "desk"]

CONFIG_EXTENSION = ".conf"
RESOLVED_SUFFIX = ".resolved.conf"
META_SUFFIX = ".meta.conf"


def get_output_dir() -> Path:
    """Output directory from QOTTO_OUTPUT_DIR, default ./qotto-out."""
    value = os.environ.get("QOTTO_OUTPUT_DIR")
    return Path(value) if value else DEFAULT_OUTPUT_DIR


def get_jobs() -> int:
    """Worker processes from QOTTO_JOBS, default os.cpu_count()."""
    value = os.environ.get("QOTTO_JOBS")
    if not value:
        return os.cpu_count() or 1
    try:
        jobs = int(value)
    except ValueError as e:
        raise ConfigError(f"QOTTO_JOBS must be an integer, got {value!r}") from e
    if jobs < 1:
        raise ConfigError(f"QOTTO_JOBS must be at least 1, got {jobs}")
    return jobs


def get_log_level() -> str:
    """Log level name from QOTTO_LOG_LEVEL, default WARNING."""
    value = (os.environ.get("QOTTO_LOG_LEVEL") or DEFAULT_LOG_LEVEL).upper()
    if not isinstance(logging.getLevelName(value), int):
        raise ConfigError(f"Unknown log level {value!r}")
    return value


def get_runtime_info() -> dict:
    """Return the effective runtime settings as a dictionary."""
    return {
        "output_dir": str(get_output_dir()),
        "jobs": get_jobs(),
        "log_level": get_log_level(),
        "scenarios": list(SCENARIOS),
        "presets": list(PRESETS),
    }


def ensure_output_dir(path: Path | None = None) -> Path:
    """Create the output directory if needed and return it.

    Raises:
        ConfigError: If the directory cannot be created.
    """
    directory = path or get_output_dir()
    try:
        directory.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise ConfigError(f"Cannot create output directory {directory}: {e}") from e
    logger.debug("output directory %s", directory)
    return directory
