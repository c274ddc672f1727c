"""
Job Registry and Queue Management

Registration, creation, execution and state tracking of certification jobs.
Concurrency is bounded by an asyncio.Semaphore; jobs off-load their numerical
work to executor threads.
"""

import asyncio
import logging
import time
from collections import OrderedDict
from enum import Enum
from threading import Lock
from typing import Any, Callable, Dict, List, Optional, Set, Type

from env_utils import JOB_HISTORY
from job_system.base_job import BaseJob
from job_system.cache import cache_exists, get_cache_path, read_cache, write_cache

logger = logging.getLogger(__name__)


class JobStatus(Enum):
    PENDING = "pending"
    PROCESSING = "processing"
    COMPLETED = "completed"
    FAILED = "failed"
    CANCELLED = "cancelled"


FINAL_STATUSES = (JobStatus.COMPLETED.value, JobStatus.FAILED.value, JobStatus.CANCELLED.value)


class JobCancelled(Exception):
    """Raised inside a job when its cancellation flag is observed."""


class JobRegistry:
    """
    Class-level registry of job types and jobs.

    Manages:
    - Job type registration
    - Job creation with deduplication and the file cache
    - Semaphore-bounded async execution
    - Cancellation, status broadcast and waiting for completion
    """

    _job_types: Dict[str, Type[BaseJob]] = {}
    _jobs: Dict[str, Dict[str, Any]] = {}
    _lock = Lock()
    _semaphore: Optional[asyncio.Semaphore] = None
    _semaphore_loop: Optional[asyncio.AbstractEventLoop] = None
    _max_concurrency: int = 1
    _max_finished: int = JOB_HISTORY
    _broadcast_callback: Optional[Callable[[str, dict], None]] = None
    _cancelled_jobs: Set[str] = set()
    _client_jobs: Dict[str, Set[str]] = {}
    # finished job IDs, earliest first
    _finished: "OrderedDict[str, None]" = OrderedDict()
    _tasks: Set[asyncio.Task] = set()

    @classmethod
    def initialize(cls, max_concurrency: int = 1, max_finished: Optional[int] = None):
        """
        Configure the registry before jobs are created.

        Args:
            max_concurrency: Jobs allowed to run at the same time.
            max_finished: Finished entries kept for status queries; the oldest
                are evicted beyond it. Defaults to DICKE_CERT_JOB_HISTORY.
        """
        if max_concurrency < 1:
            raise ValueError(f"max_concurrency must be >= 1, got {max_concurrency}")
        max_finished = JOB_HISTORY if max_finished is None else max_finished
        if max_finished < 1:
            raise ValueError(f"max_finished must be >= 1, got {max_finished}")
        cls._max_concurrency = max_concurrency
        cls._max_finished = max_finished
        cls._semaphore = None

    @classmethod
    def set_broadcast_callback(cls, callback: Optional[Callable[[str, dict], None]]):
        """`callback(job_id, message)` receives every status and progress message."""
        cls._broadcast_callback = callback

    @classmethod
    def register(cls, task_type: str, job_class: Type[BaseJob]):
        cls._job_types[task_type] = job_class

    @classmethod
    def get_job_class(cls, task_type: str) -> Optional[Type[BaseJob]]:
        return cls._job_types.get(task_type)

    @classmethod
    def get_job(cls, job_id: str) -> Optional[Dict[str, Any]]:
        return cls._jobs.get(job_id)

    @classmethod
    def cancel_job(cls, job_id: str) -> bool:
        """Mark a pending or processing job as cancelled; False if there is nothing to cancel."""
        with cls._lock:
            job = cls._jobs.get(job_id)
            if job is None or job["status"] in FINAL_STATUSES:
                return False
            cls._cancelled_jobs.add(job_id)
            if job["status"] == JobStatus.PENDING.value:
                cls._finish(job, status=JobStatus.CANCELLED.value)
        logger.info(f"Job {job_id[:12]} marked for cancellation")
        return True

    @classmethod
    def is_cancelled(cls, job_id: str) -> bool:
        return job_id in cls._cancelled_jobs

    @classmethod
    def _new_entry(cls, job_id: str, task_type: str, params: Dict[str, Any], client_id: Optional[str]) -> Dict[str, Any]:
        return {
            "id": job_id,
            "task_type": task_type,
            "params": params,
            "status": JobStatus.PENDING.value,
            "result": None,
            "error": None,
            "error_type": None,
            "created_at": time.time(),
            "completed_at": None,
            "client_id": client_id,
        }

    @classmethod
    def _finish(cls, entry: Dict[str, Any], **fields: Any):
        """Mark an entry final (caller holds the lock); its params are no longer needed."""
        entry.update(fields, params=None, completed_at=time.time())
        cls._finished.pop(entry["id"], None)
        cls._finished[entry["id"]] = None
        cls._prune_finished()

    @classmethod
    def _prune_finished(cls):
        """Evict the earliest finished entries beyond `_max_finished`."""
        evicted = set()
        while len(cls._finished) > cls._max_finished:
            job_id, _ = cls._finished.popitem(last=False)
            entry = cls._jobs.get(job_id)
            if entry is not None and entry["status"] in FINAL_STATUSES:
                del cls._jobs[job_id]
                cls._cancelled_jobs.discard(job_id)
                evicted.add(job_id)
        if not evicted:
            return
        for client_id in list(cls._client_jobs):
            cls._client_jobs[client_id] -= evicted
            if not cls._client_jobs[client_id]:
                del cls._client_jobs[client_id]
        logger.debug(f"Evicted {len(evicted)} finished job(s)")

    @classmethod
    async def create_job(cls, task_type: str, params: Dict[str, Any], client_id: Optional[str] = None) -> Optional[Dict[str, Any]]:
        """
        Create a job or return the existing one with the same ID.

        Pending, processing and completed jobs are returned as they are; a
        cached result completes the job immediately; failed and cancelled
        jobs are retried.

        Args:
            task_type: Registered task type name
            params: Raw job parameters, validated by the job class
            client_id: Client to associate the job with, if any

        Returns:
            The job entry, or None for an unknown task type
        """
        if task_type not in cls._job_types:
            return None

        job = cls._job_types[task_type](params)
        job_id = job.job_id

        with cls._lock:
            existing = cls._jobs.get(job_id)
            if existing is not None:
                if existing["status"] in (JobStatus.PENDING.value, JobStatus.PROCESSING.value, JobStatus.COMPLETED.value):
                    logger.debug(f"Job {job_id[:12]} already {existing['status']}, returning existing")
                    cls._track_client(client_id, job_id)
                    return existing
                logger.info(f"Job {job_id[:12]} previously {existing['status']}, retrying")
                cls._finished.pop(job_id, None)

            if job.should_use_cache() and cache_exists(job_id, job.get_cache_suffix(), job.get_cache_dir()):
                cache_path = get_cache_path(job_id, job.get_cache_suffix(), job.get_cache_dir())
                try:
                    cached = read_cache(cache_path)
                    if cached:
                        entry = cls._new_entry(job_id, task_type, params, client_id)
                        cls._jobs[job_id] = entry
                        cls._track_client(client_id, job_id)
                        cls._finish(entry, status=JobStatus.COMPLETED.value, result=job.deserialize_result(cached))
                        logger.info(f"Job {job_id[:12]} served from cache {cache_path}")
                        return entry
                except Exception as e:
                    logger.warning(f"Ignoring unreadable cache for {job_id[:12]}: {e}")

            cls._jobs[job_id] = cls._new_entry(job_id, task_type, params, client_id)
            cls._track_client(client_id, job_id)

        logger.info(f"Job {job_id[:12]} created ({task_type})")
        task = asyncio.create_task(cls._execute_job(job, task_type))
        cls._tasks.add(task)
        task.add_done_callback(cls._tasks.discard)
        return cls._jobs[job_id]

    @classmethod
    def _track_client(cls, client_id: Optional[str], job_id: str):
        if client_id:
            cls._client_jobs.setdefault(client_id, set()).add(job_id)

    @classmethod
    def _get_semaphore(cls) -> asyncio.Semaphore:
        loop = asyncio.get_running_loop()
        if cls._semaphore is None or cls._semaphore_loop is not loop:
            cls._semaphore = asyncio.Semaphore(cls._max_concurrency)
            cls._semaphore_loop = loop
        return cls._semaphore

    @classmethod
    async def _execute_job(cls, job: BaseJob, task_type: str):
        job_id = job.job_id

        async with cls._get_semaphore():
            with cls._lock:
                entry = cls._jobs.get(job_id)
                if entry is None or entry["status"] == JobStatus.CANCELLED.value:
                    cls._cancelled_jobs.discard(job_id)
                    return
                entry["status"] = JobStatus.PROCESSING.value

            cls._broadcast_status(job_id, JobStatus.PROCESSING.value)
            job.on_progress = lambda progress: cls._broadcast_progress(job_id, progress)
            job.on_status_update = lambda s, d: cls._update_job_status(job_id, s, d)

            try:
                result = await job.execute()
                if cls.is_cancelled(job_id):
                    raise JobCancelled("Job cancelled by user")

                with cls._lock:
                    if job_id in cls._jobs:
                        cls._finish(cls._jobs[job_id], status=JobStatus.COMPLETED.value, result=result)

                if job.should_use_cache():
                    try:
                        cache_path = get_cache_path(job_id, job.get_cache_suffix(), job.get_cache_dir())
                        write_cache(cache_path, job.serialize_result(result))
                    except Exception as e:
                        logger.warning(f"Error writing cache for {job_id[:12]}: {e}")

                logger.info(f"Job {job_id[:12]} completed ({task_type})")
                cls._broadcast_status(job_id, JobStatus.COMPLETED.value, result=result)

            except Exception as e:
                error_msg = str(e)
                with cls._lock:
                    status = JobStatus.CANCELLED.value if job_id in cls._cancelled_jobs else JobStatus.FAILED.value
                    if job_id in cls._jobs:
                        cls._finish(cls._jobs[job_id], status=status, error=error_msg, error_type=type(e).__name__)
                if status == JobStatus.FAILED.value:
                    logger.warning(f"Job {job_id[:12]} failed: {type(e).__name__}: {error_msg}")
                else:
                    logger.info(f"Job {job_id[:12]} cancelled")
                cls._broadcast_status(job_id, status, error=error_msg)
            finally:
                with cls._lock:
                    cls._cancelled_jobs.discard(job_id)

    @classmethod
    async def wait(cls, job_id: str, poll_interval: float = 0.02) -> Dict[str, Any]:
        """
        Block until a job reaches a final status.

        Args:
            job_id: Job to wait for
            poll_interval: Seconds between status checks

        Returns:
            The final job entry

        Raises:
            KeyError: if the job is unknown or was evicted from the history
        """
        while True:
            entry = cls._jobs.get(job_id)
            if entry is None:
                raise KeyError(f"Job not found: {job_id}")
            if entry["status"] in FINAL_STATUSES:
                return entry
            await asyncio.sleep(poll_interval)

    @classmethod
    def _update_job_status(cls, job_id: str, status: str, extra_data: Optional[Dict[str, Any]] = None):
        """Status change requested by a running job; final states are never overwritten."""
        with cls._lock:
            entry = cls._jobs.get(job_id)
            if entry is not None and entry["status"] not in FINAL_STATUSES:
                entry["status"] = status
        cls._broadcast_status(job_id, status, result=extra_data)

    @classmethod
    def _broadcast(cls, job_id: str, message: Dict[str, Any]):
        if cls._broadcast_callback is None:
            return
        try:
            cls._broadcast_callback(job_id, message)
        except Exception as e:
            logger.warning(f"Error in broadcast callback: {e}")

    @classmethod
    def _broadcast_status(cls, job_id: str, status: str, result: Optional[Dict[str, Any]] = None, error: Optional[str] = None):
        logger.debug(f"Broadcasting status for {job_id[:12]}: {status}")
        message = {"type": "job_status", "job_id": job_id, "status": status}
        if result is not None:
            message["result"] = result
        if error is not None:
            message["error"] = error
        cls._broadcast(job_id, message)

    @classmethod
    def _broadcast_progress(cls, job_id: str, progress: Dict[str, Any]):
        cls._broadcast(job_id, {"type": "job_progress", "job_id": job_id, "progress": progress})

    @classmethod
    def get_client_jobs(cls, client_id: str) -> List[Dict[str, Any]]:
        """
        Args:
            client_id: Client whose jobs to list

        Returns:
            Copies of the client's job entries still held in memory
        """
        with cls._lock:
            job_ids = cls._client_jobs.get(client_id, set())
            return [cls._jobs[job_id].copy() for job_id in job_ids if job_id in cls._jobs]

    @classmethod
    def clear_jobs(cls):
        """Forget all jobs (tests and repeated CLI runs)."""
        with cls._lock:
            cls._jobs.clear()
            cls._client_jobs.clear()
            cls._cancelled_jobs.clear()
            cls._finished.clear()

    @classmethod
    def clear_registrations(cls):
        cls._job_types.clear()
