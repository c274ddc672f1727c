import asyncio
import logging
import os

from pydantic import BaseModel, ConfigDict, Field

from certification.pipeline import certify_point
from certification.records import run_label, write_report
from certification.sim import MAX_SIM_QUBITS
from env_utils import DEFAULT_SHOTS, OUTPUT_DIR
from job_system.base_job import BaseJob
from job_system.registry import JobCancelled, JobRegistry

logger = logging.getLogger(__name__)


class CertifyPointParams(BaseModel):
    model_config = ConfigDict(extra="ignore")

    n: int = Field(..., ge=2, le=MAX_SIM_QUBITS)
    k: int = Field(1, ge=0)
    shots: int = Field(DEFAULT_SHOTS, ge=2)
    seed: int = Field(0, ge=0)
    noise_p: float = Field(0.0, ge=0.0, le=1.0)
    noise_lambda: float = Field(0.0, ge=0.0, le=1.0)
    verify: bool = True


class CertifyPointJob(BaseJob):
    """
    Simulate one (n, k, seed) point, estimate its energy and certify it.
    """

    task_type = "certify_point"
    params_model = CertifyPointParams

    async def execute(self):
        params = self.parsed_params()
        loop = asyncio.get_running_loop()

        def _progress(progress):
            if JobRegistry.is_cancelled(self.job_id):
                raise JobCancelled("Job cancelled by user")
            self.report_progress(progress)

        def _certify():
            return certify_point(
                params.n,
                params.k,
                params.shots,
                params.seed,
                noise_p=params.noise_p,
                noise_lambda=params.noise_lambda,
                verify=params.verify,
                progress=_progress,
            )

        report = await loop.run_in_executor(None, _certify)
        label = run_label(params.n, params.k, params.seed, params.noise_p, params.noise_lambda)
        result = {"label": label, "report": report.model_dump(mode="json")}

        if self.params.get("write_report", True):
            filename = f"{label}-{self.job_id[:8]}.json"
            write_report(report, os.path.join(OUTPUT_DIR, "reports", filename))
            result["filename"] = filename
        return result
