import asyncio
import logging
import os
from contextlib import asynccontextmanager
from typing import Optional

import uvicorn
from fastapi import FastAPI, HTTPException, Query
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import FileResponse
from pydantic import BaseModel, Field

from certification.dicke import DickeSpec, alpha_bruteforce_exact, alpha_closed_form_exact, alpha_threshold
from certification.errors import InputError
from env_utils import IS_MACOS, MAX_JOBS_SERVER, OUTPUT_DIR, configure_logging
from job_system import JobRegistry
from job_system.jobs.certify_point_job import CertifyPointJob
from job_system.jobs.certify_records_job import CertifyRecordsJob
from job_system.jobs.verify_spectrum_job import VerifySpectrumJob
from ws_manager import websocket_router, ws_manager

logger = logging.getLogger(__name__)

REPORTS_DIR = os.path.join(OUTPUT_DIR, "reports")

JOB_TYPES = (CertifyPointJob, VerifySpectrumJob, CertifyRecordsJob)


# --- Pydantic Models for Documentation ---

class HealthResponse(BaseModel):
    status: str = Field(..., examples=["ok"])


class AlphaResponse(BaseModel):
    n: int
    k: int
    alpha: float
    method: str
    vacuous: bool
    closed_form: Optional[str] = Field(None, description="exact rational, 1 <= k <= n-1 only")
    bruteforce: str


@asynccontextmanager
async def lifespan(app: FastAPI):
    logger.info("Certification server starting up")
    JobRegistry.initialize(max_concurrency=MAX_JOBS_SERVER)
    for job_class in JOB_TYPES:
        JobRegistry.register(job_class.task_type, job_class)

    # Jobs report from executor threads; bridge into the server loop.
    JobRegistry.set_broadcast_callback(ws_manager.broadcast_to_job_threadsafe)
    ws_manager.set_event_loop(asyncio.get_running_loop())
    os.makedirs(REPORTS_DIR, exist_ok=True)

    yield

    JobRegistry.set_broadcast_callback(None)
    logger.info("Certification server shutting down")


app = FastAPI(
    title="Dicke Certification Server",
    description="""
Tomography-free certification of Dicke and W states from three-basis shot data.

### Features:
* **certify_point**: simulate, estimate and certify one (n, k, seed) point.
* **verify_spectrum**: dense spectral certificate of a parent Hamiltonian.
* **certify_records**: certify externally measured shot records.
* **WebSocket API**: asynchronous jobs with status and progress messages.
""",
    version="1.0.0",
    lifespan=lifespan,
    openapi_url="/openapi.json",
    docs_url="/docs",
    redoc_url="/redoc",
)

app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)

app.include_router(websocket_router, prefix="/api", tags=["WebSocket"])


@app.get("/api/health", response_model=HealthResponse, tags=["System"])
async def health_check():
    return {"status": "ok"}


@app.get("/api/alpha", response_model=AlphaResponse, tags=["Certification"])
async def get_alpha(n: int = Query(..., ge=1, le=64), k: int = Query(..., ge=0)):
    """Biseparable threshold of |D_n^(k)>: the value used by the witness plus both derivations."""
    try:
        spec = DickeSpec(n, k)
    except InputError as e:
        raise HTTPException(status_code=422, detail=str(e))
    threshold = alpha_threshold(spec)
    closed = alpha_closed_form_exact(spec) if not spec.is_product_sector else None
    return AlphaResponse(
        n=n,
        k=k,
        alpha=threshold.value,
        method=threshold.method,
        vacuous=threshold.vacuous,
        closed_form=str(closed) if closed is not None else None,
        bruteforce=str(alpha_bruteforce_exact(spec)),
    )


@app.get(
    "/api/reports/{filename}",
    responses={
        200: {"content": {"application/json": {}}},
        404: {"description": "Report not found"},
    },
    tags=["Reports"],
)
async def get_report(filename: str):
    """Certification report written by a certify_point job."""
    if os.path.basename(filename) != filename or not filename.endswith(".json"):
        raise HTTPException(status_code=404, detail="Report not found")
    file_path = os.path.join(REPORTS_DIR, filename)
    if not os.path.exists(file_path):
        raise HTTPException(status_code=404, detail="Report not found")
    return FileResponse(file_path, media_type="application/json")


if __name__ == "__main__":
    configure_logging()
    uvicorn.run("server:app", host="0.0.0.0", port=8004, reload=IS_MACOS)
