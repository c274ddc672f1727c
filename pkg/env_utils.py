import logging
import os
import platform


def is_macos():
    """Detect if the current operating system is macOS."""
    return platform.system() == "Darwin"


def _env_int(name, default):
    raw = os.environ.get(name)
    if raw is None or raw == "":
        return default
    try:
        return int(raw)
    except ValueError:
        raise ValueError(f"{name} must be an integer, got {raw!r}") from None


def default_jobs():
    """Parallel sweep points: CPU count, capped at 4."""
    return max(1, min(4, os.cpu_count() or 1))


def configure_logging(level=None):
    """Process-wide logging setup; called once by the entry points."""
    level = (level or LOG_LEVEL).upper()
    logging.basicConfig(
        level=getattr(logging, level, logging.INFO),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )


IS_MACOS = is_macos()

OUTPUT_DIR = os.environ.get("DICKE_CERT_OUTPUT_DIR", "outputs")
CACHE_DIR = os.environ.get("DICKE_CERT_CACHE_DIR", "./cache")
LOG_LEVEL = os.environ.get("DICKE_CERT_LOG_LEVEL", "INFO")

DEFAULT_SHOTS = 16384
DEFAULT_JOBS = default_jobs()
MAX_JOBS_SERVER = _env_int("DICKE_CERT_MAX_JOBS", DEFAULT_JOBS)
# Finished jobs kept in memory for status queries.
JOB_HISTORY = _env_int("DICKE_CERT_JOB_HISTORY", 1000)
