"""
Base Job Abstract Class

Interface every certification job follows. Job IDs are content hashes of the
parameters, so identical requests deduplicate and hit the file cache.
"""

import hashlib
import json
from abc import ABC, abstractmethod
from typing import Any, Callable, Dict, Optional, Type

from pydantic import BaseModel, ValidationError

from env_utils import CACHE_DIR

# Parameters that steer execution but do not change the result.
NON_IDENTITY_PARAMS = ("use_cache", "request_id", "write_report")


class BaseJob(ABC):
    """
    Abstract base class for all job implementations.

    Subclasses implement `execute()`; the default `generate_job_id` hashes
    the canonical JSON of the parameters prefixed with `task_type`.

    Optional overrides:
    - get_cache_suffix(): cache file extension (default ".json")
    - should_use_cache(): honours params["use_cache"] (default True)
    - get_cache_dir(): directory for cache files (default env CACHE_DIR)
    """

    task_type: str = "job"
    params_model: Optional[Type[BaseModel]] = None

    def __init__(self, params: Dict[str, Any]):
        self.params = params
        self._job_id: Optional[str] = None
        self.on_progress: Optional[Callable[[Dict[str, Any]], None]] = None
        self.on_status_update: Optional[Callable[[str, Optional[Dict[str, Any]]], None]] = None

    @property
    def job_id(self) -> str:
        if self._job_id is None:
            self._job_id = self.generate_job_id(self.params)
        return self._job_id

    def generate_job_id(self, params: Dict[str, Any]) -> str:
        """
        sha256 over task type and the parameters that determine the result.

        Used for deduplication, cache file naming and client subscriptions.

        Args:
            params: Job parameters; delivery-only keys are ignored

        Returns:
            Hex digest identifying the job
        """
        identity = {k: v for k, v in params.items() if k not in NON_IDENTITY_PARAMS}
        if self.params_model is not None:
            try:
                identity = self.params_model.model_validate(identity).model_dump(mode="json")
            except ValidationError:
                pass
        canonical = json.dumps({"task_type": self.task_type, "params": identity}, sort_keys=True)
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()

    @abstractmethod
    async def execute(self) -> Dict[str, Any]:
        """
        Run the job and return the JSON-ready result sent to subscribers.

        Any exception fails the job; its class name and message are recorded.

        Returns:
            Result dictionary, also written to the cache when caching is on
        """

    def parsed_params(self) -> Any:
        """Parameters validated against `params_model` (raw dict when there is none)."""
        if self.params_model is None:
            return self.params
        return self.params_model.model_validate(self.params)

    def report_progress(self, progress: Dict[str, Any]):
        if self.on_progress:
            self.on_progress(progress)

    def update_status(self, status: str, extra_data: Optional[Dict[str, Any]] = None):
        if self.on_status_update:
            self.on_status_update(status, extra_data)

    def get_cache_suffix(self) -> str:
        return ".json"

    def should_use_cache(self) -> bool:
        return bool(self.params.get("use_cache", True))

    def get_cache_dir(self) -> str:
        return CACHE_DIR

    def serialize_result(self, result: Dict[str, Any]) -> bytes:
        """
        Args:
            result: Result dictionary from execute()

        Returns:
            Bytes to write to the cache file
        """
        return json.dumps(result, sort_keys=True).encode("utf-8")

    def deserialize_result(self, data: bytes) -> Dict[str, Any]:
        return json.loads(data.decode("utf-8"))
