from job_system.base_job import BaseJob
from job_system.registry import JobCancelled, JobRegistry, JobStatus

__all__ = ["BaseJob", "JobCancelled", "JobRegistry", "JobStatus"]
