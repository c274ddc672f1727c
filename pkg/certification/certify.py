"""
Certification

Converts energies into fidelity bounds (lower from the gap, optional upper
from the largest eigenvalue) and fidelity-witness verdicts, and assembles the
certification report.

A sweep CSV row carries `k` and `seed` alongside `n, energy, sem, delta_line,
f_lower, alpha, gme_certified` so rows from different sweeps stay
distinguishable when concatenated.
"""

import logging
from dataclasses import dataclass
from datetime import datetime, timezone
from typing import Any, Dict, List, Literal, Optional

from pydantic import BaseModel, Field

from certification.dicke import DickeSpec, alpha_threshold
from certification.errors import InputError
from certification.estimate import EnergyEstimate
from certification.parent_ham import HamiltonianSpec, SpectrumReport

logger = logging.getLogger(__name__)

ENERGY_TOLERANCE = 1e-9
NEGATIVE_ENERGY_SEMS = 10.0
CONSERVATIVE_SEMS = 2.0
SANDWICH_SLACK = 1e-9

CSV_COLUMNS = ["n", "k", "seed", "energy", "sem", "delta_line", "f_lower", "alpha", "gme_certified"]


@dataclass(frozen=True)
class FidelityBounds:
    lower: float
    upper: Optional[float] = None
    clamped: bool = False


@dataclass(frozen=True)
class WitnessVerdict:
    gme_certified: bool
    alpha: float
    margin: float
    vacuous: bool = False
    alpha_method: str = "closed-form"


class RunMetadata(BaseModel):
    source: Literal["simulated", "ingested"]
    seeds: List[int] = Field(default_factory=list)
    shots: Dict[str, int] = Field(default_factory=dict)
    noise: Dict[str, float] = Field(default_factory=dict)
    gates: Dict[str, int] = Field(default_factory=dict)
    timestamp: str = Field(default_factory=lambda: datetime.now(timezone.utc).isoformat())
    variance_denominator: str = "S-1"
    constant_basis: str = "Z"
    delta_source: str = "analytic"
    files: Dict[str, str] = Field(default_factory=dict)


class CertificationReport(BaseModel):
    n: int
    k: int
    energy: EnergyEstimate
    delta: float
    f_lower: float = Field(..., ge=0.0, le=1.0)
    f_lower_sem: float
    f_lower_clamped: bool
    f_upper: Optional[float] = None
    f_upper_approximate: bool = False
    alpha: float
    alpha_method: str
    gme_certified: bool
    gme_certified_conservative: bool
    witness_vacuous: bool
    margin: float
    metadata: RunMetadata

    def csv_row(self) -> Dict[str, Any]:
        seed = self.metadata.seeds[0] if self.metadata.seeds else ""
        return {
            "n": self.n,
            "k": self.k,
            "seed": seed,
            "energy": repr(self.energy.mean),
            "sem": repr(self.energy.sem),
            "delta_line": repr(self.delta),
            "f_lower": repr(self.f_lower),
            "alpha": repr(self.alpha),
            "gme_certified": str(self.gme_certified).lower(),
        }


def fidelity_bounds(
    energy: float,
    delta: float,
    max_h: Optional[float] = None,
    sem: float = 0.0,
) -> FidelityBounds:
    """
    lower = max(0, 1 - E/delta); upper = min(1, 1 - E/max H) when max H is known.

    Energies slightly below zero (statistical fluctuation) are clamped to 0
    with a warning; energies below -10 SEM signal corrupted input.

    Args:
        energy: Estimated <H>
        delta: Certified spectral gap, at least 1
        max_h: Largest eigenvalue of H, if known
        sem: Standard error of `energy`

    Returns:
        FidelityBounds with `clamped` set when 1 - E/delta fell below 0
    """
    if delta < 1.0:
        raise InputError(f"certified gap must be >= 1, got {delta}")
    if max_h is not None and max_h < delta:
        raise InputError(f"max eigenvalue {max_h} is below the gap {delta}")
    if energy < -max(NEGATIVE_ENERGY_SEMS * sem, ENERGY_TOLERANCE):
        raise InputError(f"energy {energy:.6g} lies more than {NEGATIVE_ENERGY_SEMS:g} SEM below zero")
    if energy < 0.0:
        logger.warning("Clamping negative energy %.3e to 0", energy)
        energy = 0.0
    raw = 1.0 - energy / delta
    lower = max(0.0, raw)
    upper = None
    if max_h is not None:
        upper = min(1.0, max(0.0, 1.0 - energy / max_h))
    return FidelityBounds(lower=lower, upper=upper, clamped=raw < 0.0)


def witness_verdict(f_lower: float, spec: DickeSpec) -> WitnessVerdict:
    """GME is certified only when f_lower exceeds alpha strictly."""
    if not 0.0 <= f_lower <= 1.0:
        raise InputError(f"fidelity lower bound must lie in [0, 1], got {f_lower}")
    alpha = alpha_threshold(spec)
    if alpha.vacuous:
        return WitnessVerdict(False, alpha.value, f_lower - alpha.value, vacuous=True, alpha_method=alpha.method)
    return WitnessVerdict(
        gme_certified=f_lower > alpha.value,
        alpha=alpha.value,
        margin=f_lower - alpha.value,
        alpha_method=alpha.method,
    )


def build_report(
    estimate: EnergyEstimate,
    ham: HamiltonianSpec,
    spec: DickeSpec,
    spectrum: Optional[SpectrumReport] = None,
    meta: Optional[RunMetadata] = None,
    max_h: Optional[float] = None,
    max_h_approximate: bool = False,
) -> CertificationReport:
    """
    Assemble a report. The upper bound is filled from `spectrum.max_eig`
    (or an explicit `max_h`); the lower bound never depends on it.

    Args:
        estimate: Energy estimate from the shot records
        ham: Hamiltonian parameters, including the certified gap
        spec: Target Dicke state
        spectrum: Dense verification result, when one was run
        meta: Provenance recorded in the report
        max_h: Largest eigenvalue when no spectrum is given
        max_h_approximate: Whether `max_h` came from power iteration

    Returns:
        The assembled CertificationReport
    """
    if (ham.n, ham.k) != (spec.n, spec.k):
        raise InputError(f"Hamiltonian ({ham.n}, {ham.k}) does not match target ({spec.n}, {spec.k})")
    if spectrum is not None:
        if (spectrum.n, spectrum.k) != (spec.n, spec.k):
            raise InputError(f"spectrum ({spectrum.n}, {spectrum.k}) does not match target ({spec.n}, {spec.k})")
        max_h, max_h_approximate = spectrum.max_eig, spectrum.max_eig_approximate
    meta = meta or RunMetadata(source="simulated")
    if spectrum is not None and not spectrum.max_eig_approximate:
        meta = meta.model_copy(update={"delta_source": spectrum.gap_source})

    bounds = fidelity_bounds(estimate.mean, ham.delta, max_h, estimate.sem)
    verdict = witness_verdict(bounds.lower, spec)
    f_lower_sem = 0.0 if bounds.clamped else estimate.sem / ham.delta
    conservative = (bounds.lower - CONSERVATIVE_SEMS * f_lower_sem) > verdict.alpha and not verdict.vacuous
    if bounds.upper is not None and bounds.lower > bounds.upper + SANDWICH_SLACK:
        logger.warning("Lower bound %.6f exceeds upper bound %.6f", bounds.lower, bounds.upper)

    return CertificationReport(
        n=spec.n,
        k=spec.k,
        energy=estimate,
        delta=ham.delta,
        f_lower=bounds.lower,
        f_lower_sem=f_lower_sem,
        f_lower_clamped=bounds.clamped,
        f_upper=bounds.upper,
        f_upper_approximate=max_h_approximate if bounds.upper is not None else False,
        alpha=verdict.alpha,
        alpha_method=verdict.alpha_method,
        gme_certified=verdict.gme_certified,
        gme_certified_conservative=conservative,
        witness_vacuous=verdict.vacuous,
        margin=verdict.margin,
        metadata=meta,
    )
