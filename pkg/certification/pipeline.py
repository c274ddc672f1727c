"""
Certification Pipeline

End-to-end runs for one (n, k) point: prepare the target state (the W cascade
for k = 1, the exact vector otherwise), sample three global bases, estimate
the energy and certify it. Also certifies externally supplied records.
"""

import logging
from typing import Callable, Dict, Mapping, Optional

import numpy as np

from certification.certify import CertificationReport, RunMetadata, build_report
from certification.dicke import DickeSpec, dicke_state
from certification.errors import InputError
from certification.estimate import estimate_energy
from certification.parent_ham import (
    MAX_VERIFY_QUBITS,
    SpectrumReport,
    build_pauli,
    hamiltonian_spec,
    verify_spectrum,
)
from certification.pauli import BASES, PauliSum
from certification.sim import (
    MAX_SIM_QUBITS,
    NoiseModel,
    ShotRecord,
    run_statevector,
    sample_circuit_shots,
    sample_shots,
    w_prep_circuit,
)

logger = logging.getLogger(__name__)

ProgressCallback = Callable[[Dict[str, object]], None]

HAMILTONIAN_MATCH_TOLERANCE = 1e-12


def prepare_state(spec: DickeSpec) -> np.ndarray:
    """Noiseless target: the W circuit output for k = 1, the exact Dicke vector otherwise."""
    if spec.k == 1 and spec.n >= 2:
        return run_statevector(w_prep_circuit(spec.n))
    return dicke_state(spec)


def preparation_gate_counts(spec: DickeSpec) -> Dict[str, int]:
    """Two- and single-qubit gate counts of the W circuit; empty when the exact vector is used."""
    if spec.k == 1 and spec.n >= 2:
        return w_prep_circuit(spec.n).gate_counts()
    return {}


def simulate_records(
    spec: DickeSpec,
    shots: int,
    seed: int,
    noise: Optional[NoiseModel] = None,
    progress: Optional[ProgressCallback] = None,
) -> Dict[str, ShotRecord]:
    """
    One ShotRecord per basis. Two-qubit gate noise needs a circuit, so it is
    only available for k = 1; other sectors take the global depolarizing
    channel.
    """
    if spec.n > MAX_SIM_QUBITS:
        raise InputError(f"simulation is limited to {MAX_SIM_QUBITS} qubits, got n={spec.n}")
    noise = noise or NoiseModel()
    use_circuit = spec.k == 1 and spec.n >= 2
    if noise.two_qubit_depolarizing_p > 0.0 and not use_circuit:
        raise InputError(f"two-qubit gate noise needs the W circuit (k=1), got k={spec.k}")
    psi = None if use_circuit else dicke_state(spec)
    circuit = w_prep_circuit(spec.n) if use_circuit else None

    records: Dict[str, ShotRecord] = {}
    for i, basis in enumerate(BASES):
        if progress:
            progress({"stage": "sampling", "basis": basis, "percent": round(100 * i / len(BASES))})
        if circuit is not None:
            records[basis] = sample_circuit_shots(circuit, noise, basis, shots, seed)
        else:
            records[basis] = sample_shots(psi, basis, shots, seed, noise.global_depolarizing_lambda)
    return records


def certify_records(
    h: PauliSum,
    records: Mapping[str, ShotRecord],
    spec: DickeSpec,
    spectrum: Optional[SpectrumReport] = None,
    meta: Optional[RunMetadata] = None,
) -> CertificationReport:
    estimate = estimate_energy(records, h)
    return build_report(estimate, hamiltonian_spec(spec.n, spec.k), spec, spectrum=spectrum, meta=meta)


def spectrum_if_affordable(n: int, k: int, verify: bool = True) -> Optional[SpectrumReport]:
    """Dense certificate for n <= 10; None beyond, leaving the gap analytic and no upper bound."""
    if not verify or n > MAX_VERIFY_QUBITS:
        return None
    return verify_spectrum(n, k)


def certify_point(
    n: int,
    k: int,
    shots: int,
    seed: int,
    noise_p: float = 0.0,
    noise_lambda: float = 0.0,
    verify: bool = True,
    progress: Optional[ProgressCallback] = None,
) -> CertificationReport:
    """
    Simulate and certify one point of a sweep.

    Args:
        n: Number of qubits, at most MAX_SIM_QUBITS
        k: Excitation number
        shots: Shots per measurement basis
        seed: Root seed for every random draw
        noise_p: Two-qubit gate depolarizing probability (W circuit only)
        noise_lambda: Global depolarizing strength
        verify: Run dense spectral verification when n allows it
        progress: Callback receiving stage updates

    Returns:
        CertificationReport for the simulated records
    """
    spec = DickeSpec(n, k)
    if shots < 2:
        raise InputError(f"shots must be >= 2, got {shots}")
    if n > MAX_SIM_QUBITS:
        raise InputError(f"simulation is limited to {MAX_SIM_QUBITS} qubits, got n={n}")
    noise = NoiseModel(noise_p, noise_lambda)
    if progress:
        progress({"stage": "spectrum", "basis": None, "percent": 0})
    spectrum = spectrum_if_affordable(n, k, verify)
    records = simulate_records(spec, shots, seed, noise, progress)
    if progress:
        progress({"stage": "certifying", "basis": None, "percent": 100})
    meta = RunMetadata(
        source="simulated",
        seeds=[seed],
        shots={b: r.shots for b, r in records.items()},
        noise={"two_qubit_depolarizing_p": noise_p, "global_depolarizing_lambda": noise_lambda},
        gates=preparation_gate_counts(spec),
    )
    report = certify_records(build_pauli(n, k), records, spec, spectrum, meta)
    logger.info(
        "n=%d k=%d seed=%d: E=%.6f +/- %.6f f_lower=%.6f certified=%s",
        n, k, seed, report.energy.mean, report.energy.sem, report.f_lower, report.gme_certified,
    )
    return report


def infer_k(h: PauliSum) -> int:
    """Excitation number read off the single-Z coefficient -(n/2 - k)."""
    coefficient = h.coefficient("Z" + "I" * (h.n - 1))
    value = h.n / 2 + coefficient
    k = int(round(value))
    if abs(value - k) > 1e-9 or not 0 <= k <= h.n:
        raise InputError(f"cannot infer k from the Z coefficient {coefficient}")
    return k


def check_parent_hamiltonian(h: PauliSum, k: int) -> None:
    """The gap is only certified for the parent Hamiltonian itself."""
    reference = build_pauli(h.n, k)
    strings = {t.letters for t in h} | {t.letters for t in reference}
    worst = max(abs(h.coefficient(s) - reference.coefficient(s)) for s in strings)
    if worst > HAMILTONIAN_MATCH_TOLERANCE:
        raise InputError(f"Hamiltonian is not the (n={h.n}, k={k}) parent Hamiltonian (max deviation {worst:.3e})")


def certify_ingested(
    h: PauliSum,
    records: Mapping[str, ShotRecord],
    k: Optional[int] = None,
    verify: bool = True,
    files: Optional[Mapping[str, str]] = None,
) -> CertificationReport:
    """Certification report from external records; no simulation involved."""
    k = infer_k(h) if k is None else k
    spec = DickeSpec(h.n, k)
    check_parent_hamiltonian(h, k)
    missing = [b for b in BASES if b not in records]
    if missing:
        raise InputError(f"missing record for basis {', '.join(missing)}")
    for basis, record in records.items():
        if record.n != h.n:
            raise InputError(f"{basis} record has n={record.n}, Hamiltonian has n={h.n}")
    meta = RunMetadata(
        source="ingested",
        shots={b: r.shots for b, r in records.items()},
        files=dict(files or {}),
    )
    return certify_records(h, records, spec, spectrum_if_affordable(h.n, k, verify), meta)
