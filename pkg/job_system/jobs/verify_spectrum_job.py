import asyncio

from pydantic import BaseModel, ConfigDict, Field

from certification.parent_ham import verify_spectrum
from job_system.base_job import BaseJob


class VerifySpectrumParams(BaseModel):
    model_config = ConfigDict(extra="ignore")

    n: int = Field(..., ge=2, le=10)
    k: int = Field(1, ge=0)


class VerifySpectrumJob(BaseJob):
    """Dense spectral certificate of one parent Hamiltonian."""

    task_type = "verify_spectrum"
    params_model = VerifySpectrumParams

    async def execute(self):
        params = self.parsed_params()
        self.report_progress({"stage": "diagonalizing", "basis": None, "percent": 0})
        loop = asyncio.get_running_loop()
        spectrum = await loop.run_in_executor(None, verify_spectrum, params.n, params.k)
        return {"spectrum": spectrum.model_dump(mode="json")}
