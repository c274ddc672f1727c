import asyncio
import json
from typing import Any, Dict, Optional

from pydantic import BaseModel, ConfigDict

from certification.errors import InputError
from certification.pauli import PauliSum
from certification.pipeline import certify_ingested
from certification.records import parse_shot_record
from job_system.base_job import BaseJob


class CertifyRecordsParams(BaseModel):
    """Hamiltonian JSON plus one record payload per basis, as in the file formats."""

    model_config = ConfigDict(extra="ignore")

    hamiltonian: Dict[str, Any]
    records: Dict[str, Dict[str, Any]]
    k: Optional[int] = None
    verify: bool = True


class CertifyRecordsJob(BaseJob):
    """
    Certify externally measured records submitted over the WebSocket API.

    Payloads can be large and are certified once, so results are not cached.
    """

    task_type = "certify_records"
    params_model = CertifyRecordsParams

    def should_use_cache(self):
        return False

    async def execute(self):
        params = self.parsed_params()
        h = PauliSum.from_dict(params.hamiltonian, source="hamiltonian")
        records = {}
        for name, payload in params.records.items():
            record = parse_shot_record(json.dumps(payload, indent=2), source=f"records.{name}")
            if record.basis in records:
                raise InputError(f"two records for basis {record.basis}")
            records[record.basis] = record

        loop = asyncio.get_running_loop()
        report = await loop.run_in_executor(None, lambda: certify_ingested(h, records, params.k, params.verify))
        return {"report": report.model_dump(mode="json")}
