"""
Sweeps

Runs a grid of (n, seed) certification points as certify_point jobs through
the JobRegistry, at most `jobs` at a time, and writes the plot-ready CSV, the
per-point report JSONs and a plotting script template.
"""

import csv
import io
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field, ValidationError, model_validator

from certification.certify import CSV_COLUMNS, CertificationReport
from certification.errors import InputError, SchemaError, SchemaIssue
from certification.records import write_report
from certification.sim import MAX_SIM_QUBITS
from env_utils import DEFAULT_JOBS, DEFAULT_SHOTS, JOB_HISTORY, OUTPUT_DIR
from job_system import JobRegistry, JobStatus
from job_system.jobs.certify_point_job import CertifyPointJob

logger = logging.getLogger(__name__)

CSV_NAME = "sweep.csv"
FAILURES_NAME = "failures.json"
PLOT_SCRIPT_NAME = "plot_sweep.py"

PLOT_SCRIPT_TEMPLATE = '''"""Plot a certification sweep: energy and fidelity lower bound against n."""
import csv
import sys
from collections import defaultdict

import matplotlib.pyplot as plt

path = sys.argv[1] if len(sys.argv) > 1 else "{csv_name}"
by_n = defaultdict(list)
with open(path, newline="") as f:
    for row in csv.DictReader(f):
        by_n[int(row["n"])].append(row)

ns = sorted(by_n)
mean = lambda rows, key: sum(float(r[key]) for r in rows) / len(rows)
energy = [mean(by_n[n], "energy") for n in ns]
sem = [mean(by_n[n], "sem") for n in ns]
f_lower = [mean(by_n[n], "f_lower") for n in ns]
alpha = [mean(by_n[n], "alpha") for n in ns]

fig, (ax_e, ax_f) = plt.subplots(1, 2, figsize=(10, 4))
ax_e.errorbar(ns, energy, yerr=sem, fmt="o-", label="<H>")
ax_e.axhline(1.0, color="gray", ls="--", label="gap")
ax_e.set_xlabel("n")
ax_e.set_ylabel("energy")
ax_e.legend()
ax_f.plot(ns, f_lower, "o-", label="fidelity lower bound")
ax_f.plot(ns, alpha, "k--", label="alpha")
ax_f.set_xlabel("n")
ax_f.set_ylabel("fidelity")
ax_f.legend()
fig.tight_layout()
fig.savefig(path.rsplit(".", 1)[0] + ".png", dpi=150)
'''


class SweepConfig(BaseModel):
    """Grid and settings of one sweep; accepted from flags or a JSON file."""

    n_range: List[int] = Field(..., min_length=1)
    k: int = Field(1, ge=0)
    shots: int = Field(DEFAULT_SHOTS, ge=2)
    seeds: List[int] = Field(default_factory=lambda: [0], min_length=1)
    noise_p: float = Field(0.0, ge=0.0, le=1.0)
    noise_lambda: float = Field(0.0, ge=0.0, le=1.0)
    output_dir: str = OUTPUT_DIR
    jobs: int = Field(DEFAULT_JOBS, ge=1)
    verify: bool = True
    use_cache: bool = True

    @model_validator(mode="after")
    def _check_grid(self):
        smallest = max(2, self.k + 1)
        bad = [n for n in self.n_range if not smallest <= n <= MAX_SIM_QUBITS]
        if bad:
            raise ValueError(f"every n must lie in [{smallest}, {MAX_SIM_QUBITS}] for k={self.k}, got {bad}")
        if any(s < 0 for s in self.seeds):
            raise ValueError("seeds must be non-negative")
        if self.noise_p > 0.0 and self.k != 1:
            raise ValueError("two-qubit gate noise needs the W circuit (k=1)")
        return self


def load_sweep_config(path: Optional[str] = None, **overrides: Any) -> SweepConfig:
    """Config from an optional JSON file; overrides that are not None win."""
    data: Dict[str, Any] = {}
    source = path or "<flags>"
    if path is not None:
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except OSError as exc:
            raise InputError(f"cannot read sweep config {path}: {exc}") from None
        except json.JSONDecodeError as exc:
            raise SchemaError(source, [SchemaIssue("$", f"invalid JSON: {exc.msg}", exc.lineno)]) from None
        if not isinstance(data, dict):
            raise SchemaError(source, [SchemaIssue("$", "expected a JSON object")])
    data.update({k: v for k, v in overrides.items() if v is not None})
    try:
        return SweepConfig.model_validate(data)
    except ValidationError as exc:
        issues = [SchemaIssue(".".join(str(p) for p in e["loc"]) or "$", e["msg"]) for e in exc.errors()]
        raise SchemaError(source, issues) from None


@dataclass
class SweepOutcome:
    reports: Dict[str, CertificationReport] = field(default_factory=dict)
    rows: List[Dict[str, Any]] = field(default_factory=list)
    failures: List[Dict[str, Any]] = field(default_factory=list)

    @property
    def failure_types(self) -> List[str]:
        return [f["error_type"] for f in self.failures]


def point_params(config: SweepConfig, n: int, seed: int) -> Dict[str, Any]:
    return {
        "n": n,
        "k": config.k,
        "shots": config.shots,
        "seed": seed,
        "noise_p": config.noise_p,
        "noise_lambda": config.noise_lambda,
        "verify": config.verify,
        "use_cache": config.use_cache,
        "write_report": False,
    }


async def run_sweep(config: SweepConfig) -> SweepOutcome:
    """
    Certify every (n, seed) point. A failing point is recorded and the sweep
    continues; results do not depend on `config.jobs`.
    """
    # Every point must stay readable until it is collected below.
    grid_size = len(config.n_range) * len(config.seeds)
    JobRegistry.initialize(max_concurrency=config.jobs, max_finished=max(JOB_HISTORY, grid_size))
    JobRegistry.register(CertifyPointJob.task_type, CertifyPointJob)

    points = []
    for n in config.n_range:
        for seed in config.seeds:
            entry = await JobRegistry.create_job(CertifyPointJob.task_type, point_params(config, n, seed))
            points.append((n, seed, entry["id"]))
    logger.info(f"Sweep queued {len(points)} points (k={config.k}, jobs={config.jobs})")

    outcome = SweepOutcome()
    for n, seed, job_id in points:
        entry = await JobRegistry.wait(job_id)
        if entry["status"] != JobStatus.COMPLETED.value:
            logger.warning(f"Point n={n} seed={seed} {entry['status']}: {entry.get('error')}")
            outcome.failures.append({
                "n": n,
                "k": config.k,
                "seed": seed,
                "status": entry["status"],
                "error_type": entry.get("error_type") or "CertificationError",
                "error": entry.get("error"),
            })
            continue
        result = entry["result"]
        report = CertificationReport.model_validate(result["report"])
        outcome.reports[result["label"]] = report
        outcome.rows.append(report.csv_row())

    outcome.rows.sort(key=lambda row: (row["n"], row["seed"]))
    return outcome


def sweep_csv(rows: List[Dict[str, Any]]) -> str:
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buffer.getvalue()


def write_sweep_outputs(outcome: SweepOutcome, output_dir: str) -> Path:
    """CSV, per-point reports, failures (if any) and the plot template; returns the CSV path."""
    directory = Path(output_dir)
    directory.mkdir(parents=True, exist_ok=True)
    csv_path = directory / CSV_NAME
    csv_path.write_text(sweep_csv(outcome.rows), encoding="utf-8")
    for label, report in sorted(outcome.reports.items()):
        write_report(report, directory / "reports" / f"{label}.json")
    if outcome.failures:
        (directory / FAILURES_NAME).write_text(json.dumps(outcome.failures, indent=2) + "\n", encoding="utf-8")
    (directory / PLOT_SCRIPT_NAME).write_text(PLOT_SCRIPT_TEMPLATE.format(csv_name=CSV_NAME), encoding="utf-8")
    logger.info(f"Sweep wrote {len(outcome.rows)} rows to {csv_path}")
    return csv_path
