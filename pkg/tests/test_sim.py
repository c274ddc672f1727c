import numpy as np
import pytest

from certification.dicke import DickeSpec, dicke_state, fidelity_pure
from certification.errors import InputError
from certification.parent_ham import build_pauli
from certification.pauli import PauliSum, expectation
from certification.sim import (
    PAULI,
    Circuit,
    NoiseModel,
    ShotRecord,
    apply_trajectory_noise,
    basis_state,
    cnot,
    global_depolarized_energy,
    pauli_x,
    random_state,
    rotate_to_basis,
    run_statevector,
    sample_circuit_shots,
    sample_shots,
    w_prep_circuit,
)


def test_w_circuit_gate_count():
    for n in range(2, 17):
        assert w_prep_circuit(n).two_qubit_count == 2 * n - 3


def test_w_circuit_prepares_w_state():
    for n in range(2, 11):
        psi = run_statevector(w_prep_circuit(n))
        assert fidelity_pure(psi, DickeSpec(n, 1)) >= 1 - 1e-12


@pytest.mark.slow
def test_w_circuit_prepares_w_state_large():
    for n in range(11, 17):
        psi = run_statevector(w_prep_circuit(n))
        assert fidelity_pure(psi, DickeSpec(n, 1)) >= 1 - 1e-12


def test_w2_amplitudes():
    psi = run_statevector(w_prep_circuit(2))
    np.testing.assert_allclose(np.abs(psi), [0.0, 1 / np.sqrt(2), 1 / np.sqrt(2), 0.0], atol=1e-12)


def test_w5_amplitudes():
    probabilities = np.abs(run_statevector(w_prep_circuit(5))) ** 2
    support = np.flatnonzero(probabilities > 1e-12)
    assert sorted(support.tolist()) == [1, 2, 4, 8, 16]
    np.testing.assert_allclose(probabilities[support], 0.2, atol=1e-12)


def test_empty_circuit_and_single_x():
    np.testing.assert_allclose(run_statevector(Circuit(3)), basis_state("000"))
    np.testing.assert_allclose(run_statevector(Circuit(1, (pauli_x(0),))), basis_state("1"))


def test_cnot_acts_on_control_one():
    circuit = Circuit(2, (cnot(0, 1),))
    np.testing.assert_allclose(run_statevector(circuit, basis_state("10")), basis_state("11"))
    np.testing.assert_allclose(run_statevector(circuit, basis_state("01")), basis_state("01"))


def test_circuit_validation():
    with pytest.raises(InputError):
        Circuit(2, (cnot(0, 2),))
    with pytest.raises(InputError):
        Circuit(2, (cnot(1, 1),))
    with pytest.raises(InputError):
        w_prep_circuit(1)


def test_random_state_is_normalized_and_evolution_unitary():
    psi = random_state(5, 9)
    assert np.linalg.norm(psi) == pytest.approx(1.0)
    out = run_statevector(w_prep_circuit(5), psi)
    assert np.linalg.norm(out) == pytest.approx(1.0)


def test_basis_rotation_maps_eigenstates():
    plus = np.array([1.0, 1.0]) / np.sqrt(2)
    plus_i = np.array([1.0, 1j]) / np.sqrt(2)
    np.testing.assert_allclose(np.abs(rotate_to_basis(plus, "X")), [1.0, 0.0], atol=1e-12)
    np.testing.assert_allclose(np.abs(rotate_to_basis(plus_i, "Y")), [1.0, 0.0], atol=1e-12)
    with pytest.raises(InputError):
        rotate_to_basis(plus, "Q")


def test_zero_state_z_shots_are_all_zero():
    record = sample_shots(basis_state("0"), "Z", 1000, seed=1)
    assert record.outcomes.tolist() == [0]
    assert record.counts.tolist() == [1000]


def test_zero_state_x_shots_are_balanced():
    shots = 16384
    record = sample_shots(basis_state("0"), "X", shots, seed=2)
    zeros = record.counts_dict().get("0", 0)
    assert abs(zeros / shots - 0.5) <= 4 / np.sqrt(shots)


def test_w2_z_shots_have_one_excitation():
    record = sample_shots(dicke_state(DickeSpec(2, 1)), "Z", 4096, seed=3)
    assert set(record.outcomes.tolist()) <= {1, 2}
    m = record.eigenvalues()
    assert np.all(m[:, 0] * m[:, 1] == -1)


def test_sampling_is_deterministic():
    psi = random_state(4, 0)
    first = sample_shots(psi, "Y", 2000, seed=5)
    assert sample_shots(psi, "Y", 2000, seed=5) == first
    assert sample_shots(psi, "Y", 2000, seed=6) != first
    assert sample_shots(psi, "X", 2000, seed=5) != first


def test_sampled_correlators_match_exact_values():
    shots = 100_000
    psi = random_state(3, 21)
    for letters in ("XXI", "IYY", "ZII", "ZIZ"):
        basis = letters.replace("I", "")[0]
        support = [j for j, c in enumerate(letters) if c != "I"]
        exact = expectation(PauliSum.from_terms(3, [(letters, 1.0)]), psi)
        record = sample_shots(psi, basis, shots, seed=4)
        products = np.prod(record.eigenvalues()[:, support], axis=1)
        sampled = float(np.sum(products * record.counts) / shots)
        assert abs(sampled - exact) <= 5 / np.sqrt(shots), letters


def test_full_depolarization_is_uniform():
    shots = 20_000
    record = sample_shots(basis_state("00"), "Z", shots, seed=8, depolarizing_lambda=1.0)
    counts = record.counts_dict()
    assert set(counts) == {"00", "01", "10", "11"}
    for count in counts.values():
        assert abs(count / shots - 0.25) <= 5 * np.sqrt(0.25 * 0.75 / shots)


def test_shot_record_forms_agree():
    from_outcomes = ShotRecord.from_outcomes("Z", 2, [1, 2, 2, 1, 2])
    from_counts = ShotRecord.from_counts("Z", 2, {"01": 2, "10": 3, "11": 0})
    assert from_outcomes == from_counts
    assert from_counts.shots == 5
    assert from_counts.expanded().tolist() == [1, 1, 2, 2, 2]
    assert from_counts.bitstrings() == ["01", "10"]


def test_shot_record_validation():
    with pytest.raises(InputError):
        ShotRecord.from_outcomes("Z", 2, [4])
    with pytest.raises(InputError):
        ShotRecord.from_outcomes("W", 2, [0])


def test_noise_model_ranges():
    assert NoiseModel().is_noiseless
    with pytest.raises(InputError):
        NoiseModel(two_qubit_depolarizing_p=1.5)
    with pytest.raises(InputError):
        NoiseModel(global_depolarizing_lambda=-0.1)


def test_trajectory_noise_extremes():
    circuit = w_prep_circuit(4)
    assert apply_trajectory_noise(circuit, NoiseModel(0.0), 123) is circuit
    noisy = apply_trajectory_noise(circuit, NoiseModel(1.0), 123)
    inserted = [i for i, g in enumerate(noisy.gates) if g.kind == PAULI]
    assert len(inserted) == circuit.two_qubit_count
    for i in inserted:
        assert noisy.gates[i - 1].is_two_qubit
        assert noisy.gates[i].qubits == noisy.gates[i - 1].qubits


def test_noiseless_circuit_sampling_matches_statevector_sampling():
    circuit = w_prep_circuit(4)
    from_circuit = sample_circuit_shots(circuit, NoiseModel(), "X", 3000, seed=10)
    direct = sample_shots(run_statevector(circuit), "X", 3000, seed=10)
    assert from_circuit == direct


def test_noisy_circuit_sampling_is_deterministic():
    circuit = w_prep_circuit(3)
    model = NoiseModel(two_qubit_depolarizing_p=0.2)
    first = sample_circuit_shots(circuit, model, "Z", 500, seed=4)
    assert sample_circuit_shots(circuit, model, "Z", 500, seed=4) == first
    # With noise some shots leave the single-excitation sector.
    weights = first.bits().sum(axis=1)
    assert np.any(weights != 1)


def test_global_depolarized_energy():
    h4 = build_pauli(4, 1)
    w4 = dicke_state(DickeSpec(4, 1))
    assert global_depolarized_energy(h4, w4, 0.0) == pytest.approx(0.0, abs=1e-12)
    assert global_depolarized_energy(h4, w4, 1.0) == pytest.approx(2.75)
    w2 = dicke_state(DickeSpec(2, 1))
    assert global_depolarized_energy(build_pauli(2, 1), w2, 0.5) == pytest.approx(0.375)
    with pytest.raises(InputError):
        global_depolarized_energy(h4, w4, 1.5)


def test_global_depolarized_energy_grows_with_noise():
    grid = np.linspace(0.0, 1.0, 21)
    for n, k in ((3, 1), (5, 2), (6, 3)):
        h = build_pauli(n, k)
        psi = dicke_state(DickeSpec(n, k))
        energies = np.array([global_depolarized_energy(h, psi, lam) for lam in grid])
        assert np.all(np.diff(energies) >= -1e-12), (n, k)
        np.testing.assert_allclose(energies, grid * h.identity_coefficient, atol=1e-12)
    # Any state below the maximally mixed energy drifts upward as well.
    h = build_pauli(4, 1)
    psi = random_state(4, 7)
    assert expectation(h, psi) <= h.identity_coefficient
    energies = np.array([global_depolarized_energy(h, psi, lam) for lam in grid])
    assert np.all(np.diff(energies) >= -1e-12)
