import numpy as np
import pytest

from certification.dicke import DickeSpec, dicke_state
from certification.errors import InputError
from certification.parent_ham import build_pauli
from certification.pauli import PauliSum
from certification.pipeline import (
    certify_ingested,
    certify_point,
    certify_records,
    check_parent_hamiltonian,
    infer_k,
    prepare_state,
    simulate_records,
)
from certification.records import find_record_files, read_record_set, run_label, write_record_set
from certification.sim import MAX_SIM_QUBITS, NoiseModel


def test_noiseless_w4_is_certified():
    report = certify_point(4, 1, shots=16384, seed=0)
    assert report.f_lower >= 0.99
    assert report.gme_certified
    assert report.f_upper is not None
    assert report.metadata.source == "simulated"
    assert report.metadata.shots == {"X": 16384, "Y": 16384, "Z": 16384}


def test_noiseless_balanced_dicke_is_certified():
    report = certify_point(4, 2, shots=16384, seed=1)
    assert report.gme_certified
    assert report.alpha == pytest.approx(2 / 3)


def test_full_depolarization_reaches_identity_coefficient():
    report = certify_point(4, 2, shots=16384, seed=2, noise_lambda=1.0)
    assert abs(report.energy.mean - 1.75) <= 5 * report.energy.sem
    assert report.f_lower == 0.0
    assert not report.gme_certified


def test_partial_depolarization_follows_linear_curve():
    lam = 0.3
    report = certify_point(4, 1, shots=16384, seed=3, noise_lambda=lam)
    assert abs(report.energy.mean - lam * 2.75) <= 5 * report.energy.sem


def test_gate_noise_raises_energy():
    report = certify_point(4, 1, shots=8192, seed=4, noise_p=0.01)
    assert report.energy.mean > 0.0
    assert report.f_lower < 1.0


def test_gate_noise_needs_w_circuit():
    with pytest.raises(InputError):
        simulate_records(DickeSpec(4, 2), 100, seed=0, noise=NoiseModel(two_qubit_depolarizing_p=0.1))


def test_shot_count_guard():
    with pytest.raises(InputError):
        certify_point(4, 1, shots=1, seed=0)


def test_simulation_size_guard():
    with pytest.raises(InputError):
        simulate_records(DickeSpec(40, 2), 10, seed=0)
    with pytest.raises(InputError):
        certify_point(MAX_SIM_QUBITS + 1, 2, shots=10, seed=0)
    with pytest.raises(InputError):
        dicke_state(DickeSpec(30, 2))


def test_report_carries_w_circuit_gate_counts():
    assert certify_point(5, 1, shots=256, seed=0).metadata.gates == {"two_qubit": 7, "single_qubit": 2}
    assert certify_point(4, 2, shots=256, seed=0).metadata.gates == {}


def test_runs_are_reproducible():
    first = certify_point(3, 1, shots=2048, seed=11, noise_p=0.05)
    second = certify_point(3, 1, shots=2048, seed=11, noise_p=0.05)
    assert first.energy == second.energy
    assert first.f_lower == second.f_lower


def test_progress_stages():
    seen = []
    certify_point(3, 1, shots=64, seed=0, progress=seen.append)
    stages = [message["stage"] for message in seen]
    assert stages[0] == "spectrum"
    assert stages[-1] == "certifying"
    assert [m["basis"] for m in seen if m["stage"] == "sampling"] == ["X", "Y", "Z"]


def test_prepare_state_uses_circuit_for_w():
    psi = prepare_state(DickeSpec(3, 1))
    np.testing.assert_allclose(np.abs(psi[[1, 2, 4]]) ** 2, 1 / 3, atol=1e-12)


def test_infer_k_and_hamiltonian_check():
    assert infer_k(build_pauli(5, 2)) == 2
    assert infer_k(build_pauli(4, 2)) == 2
    check_parent_hamiltonian(build_pauli(4, 1), 1)
    with pytest.raises(InputError):
        check_parent_hamiltonian(build_pauli(4, 1) * 2.0, 1)
    with pytest.raises(InputError):
        infer_k(PauliSum.from_terms(2, [("ZI", 0.3)]))


def test_ingestion_matches_in_memory_certification(tmp_path):
    spec = DickeSpec(4, 1)
    h = build_pauli(4, 1)
    records = simulate_records(spec, 4096, seed=5, noise=NoiseModel(0.02, 0.0))
    write_record_set(records, tmp_path, run_label(4, 1, 5, 0.02), form="outcomes")
    loaded = read_record_set(find_record_files(tmp_path))

    ingested = certify_ingested(h, loaded)
    direct = certify_records(h, records, spec)
    assert ingested.energy == direct.energy
    assert ingested.f_lower == direct.f_lower
    assert ingested.gme_certified == direct.gme_certified
    assert ingested.metadata.source == "ingested"


def test_ingestion_rejects_incomplete_or_foreign_input():
    spec = DickeSpec(3, 1)
    records = simulate_records(spec, 100, seed=0)
    with pytest.raises(InputError):
        certify_ingested(build_pauli(3, 1), {"X": records["X"], "Z": records["Z"]})
    with pytest.raises(InputError):
        certify_ingested(build_pauli(4, 1), records, k=1)
    with pytest.raises(InputError):
        certify_ingested(build_pauli(3, 1) * 0.5, records, k=1)


@pytest.mark.slow
def test_noiseless_w_states_estimate_zero_energy():
    for n in range(2, 11):
        within = 0
        for seed in range(20):
            report = certify_point(n, 1, shots=16384, seed=seed)
            assert report.gme_certified, (n, seed)
            if abs(report.energy.mean) <= 5 * report.energy.sem:
                within += 1
        assert within >= 19, n


@pytest.mark.slow
def test_depolarizing_sweep_flips_verdict_at_threshold():
    n, k, step = 6, 1, 1e-3
    c_const = build_pauli(n, k).identity_coefficient
    baseline = certify_point(n, k, shots=1024, seed=0)
    threshold = (1.0 - baseline.alpha) * baseline.delta / c_const
    for lam in np.round(np.arange(15, 36) * step, 3):
        report = certify_point(n, k, shots=200_000, seed=0, noise_lambda=float(lam))
        assert abs(report.energy.mean - lam * c_const) <= 5 * report.energy.sem, lam
        if lam <= threshold - step:
            assert report.gme_certified, lam
        elif lam >= threshold + step:
            assert not report.gme_certified, lam
