"""
Cache Utilities

File cache for finished job results, one file per job ID.
"""

import logging
import os
from typing import Optional

logger = logging.getLogger(__name__)


def get_cache_path(job_id: str, suffix: str, cache_dir: str) -> str:
    """
    Args:
        job_id: Job ID used as the file stem
        suffix: File extension including the dot
        cache_dir: Cache directory

    Returns:
        Path of the cache file (not necessarily existing)
    """
    return os.path.join(cache_dir, f"{job_id}{suffix}")


def cache_exists(job_id: str, suffix: str, cache_dir: str) -> bool:
    return os.path.exists(get_cache_path(job_id, suffix, cache_dir))


def read_cache(path: str) -> Optional[bytes]:
    """File contents, or None if the file does not exist."""
    if not os.path.exists(path):
        return None
    with open(path, "rb") as f:
        return f.read()


def write_cache(path: str, data: bytes) -> None:
    """Write `data` through a temporary file and rename it into place."""
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    tmp_path = f"{path}.tmp"
    with open(tmp_path, "wb") as f:
        f.write(data)
    os.replace(tmp_path, path)
    logger.debug(f"Cached result at {path}")
