"""
Statevector Simulation

W-state preparation circuits, gate-by-gate statevector evolution, stochastic
two-qubit Pauli noise trajectories and basis-rotated shot sampling.

Noise is simulated as quantum trajectories (one sampled Pauli-insertion
pattern per shot) so memory stays at 2^n amplitudes; density matrices only
appear implicitly through averaging over shots.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from certification import rng
from certification.errors import InputError
from certification.pauli import BASES, PAULI_MATRICES, PauliSum, check_state, expectation

logger = logging.getLogger(__name__)

MAX_SIM_QUBITS = 26
# Outcome indices are int64 basis indices.
MAX_RECORD_QUBITS = 62

ROTATION = "rot"
CONTROLLED_RY = "cry"
CNOT = "cx"
PAULI_X = "x"
PAULI = "pauli"

TWO_QUBIT_KINDS = (CONTROLLED_RY, CNOT)
TWO_QUBIT_PAULIS = tuple(a + b for a in "IXYZ" for b in "IXYZ")[1:]

_HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
_S_DAG = np.array([[1, 0], [0, -1j]], dtype=complex)
BASIS_ROTATIONS: Dict[str, Optional[np.ndarray]] = {
    "X": _HADAMARD,
    "Y": _HADAMARD @ _S_DAG,
    "Z": None,
}


def rotation_matrix(axis: str, angle: float) -> np.ndarray:
    c, s = math.cos(angle / 2), math.sin(angle / 2)
    if axis == "X":
        return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)
    if axis == "Y":
        return np.array([[c, -s], [s, c]], dtype=complex)
    if axis == "Z":
        return np.array([[c - 1j * s, 0], [0, c + 1j * s]], dtype=complex)
    raise InputError(f"unknown rotation axis {axis!r}")


@dataclass(frozen=True)
class Gate:
    """
    One gate application.

    kind is one of rot (axis, angle, target), cry (angle, control, target),
    cx (control, target), x (target) or pauli (letters on qubits; only
    inserted by the noise model).
    """

    kind: str
    qubits: Tuple[int, ...]
    angle: float = 0.0
    axis: str = ""

    @property
    def is_two_qubit(self) -> bool:
        return self.kind in TWO_QUBIT_KINDS

    def matrix(self) -> np.ndarray:
        if self.kind == ROTATION:
            return rotation_matrix(self.axis, self.angle)
        if self.kind == CONTROLLED_RY:
            return rotation_matrix("Y", self.angle)
        if self.kind in (CNOT, PAULI_X):
            return PAULI_MATRICES["X"]
        raise InputError(f"gate kind {self.kind!r} has no single matrix")


def rotation(axis: str, angle: float, target: int) -> Gate:
    return Gate(ROTATION, (target,), float(angle), axis)


def controlled_ry(angle: float, control: int, target: int) -> Gate:
    return Gate(CONTROLLED_RY, (control, target), float(angle))


def cnot(control: int, target: int) -> Gate:
    return Gate(CNOT, (control, target))


def pauli_x(target: int) -> Gate:
    return Gate(PAULI_X, (target,))


@dataclass(frozen=True)
class Circuit:
    n: int
    gates: Tuple[Gate, ...] = ()

    def __post_init__(self):
        if self.n < 1:
            raise InputError(f"circuit needs at least one qubit, got {self.n}")
        for gate in self.gates:
            if any(not 0 <= q < self.n for q in gate.qubits):
                raise InputError(f"gate {gate} addresses a qubit outside [0, {self.n})")
            if len(set(gate.qubits)) != len(gate.qubits):
                raise InputError(f"gate {gate} repeats a qubit")
            if not math.isfinite(gate.angle):
                raise InputError(f"gate {gate} has a non-finite angle")

    @property
    def two_qubit_count(self) -> int:
        return sum(1 for g in self.gates if g.is_two_qubit)

    @property
    def single_qubit_count(self) -> int:
        return sum(1 for g in self.gates if g.kind in (ROTATION, PAULI_X))

    def gate_counts(self) -> Dict[str, int]:
        return {"two_qubit": self.two_qubit_count, "single_qubit": self.single_qubit_count}


@dataclass(frozen=True)
class NoiseModel:
    """
    Synthetic noise: two-qubit Pauli insertions and an optional global
    depolarizing channel. Random draws are keyed by the sampler's seed.
    """

    two_qubit_depolarizing_p: float = 0.0
    global_depolarizing_lambda: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.two_qubit_depolarizing_p <= 1.0:
            raise InputError(f"two-qubit noise probability out of range: {self.two_qubit_depolarizing_p}")
        if not 0.0 <= self.global_depolarizing_lambda <= 1.0:
            raise InputError(f"global depolarizing lambda out of range: {self.global_depolarizing_lambda}")

    @property
    def is_noiseless(self) -> bool:
        return self.two_qubit_depolarizing_p == 0.0 and self.global_depolarizing_lambda == 0.0


@dataclass(frozen=True, eq=False)
class ShotRecord:
    """
    Outcomes of one global measurement setting.

    Stored as sorted distinct basis indices with their counts; a per-shot
    list is the same record with counts expanded. Bit j of a row belongs to
    qubit j (qubit 0 first) and maps to the eigenvalue (-1)^bit.
    """

    basis: str
    n: int
    outcomes: np.ndarray = field(repr=False)
    counts: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.basis not in BASES:
            raise InputError(f"unknown basis {self.basis!r}")
        if not 1 <= self.n <= MAX_RECORD_QUBITS:
            raise InputError(f"record needs 1 <= n <= {MAX_RECORD_QUBITS}, got {self.n}")
        if self.outcomes.shape != self.counts.shape:
            raise InputError("outcomes and counts differ in length")
        if np.any(self.outcomes < 0) or np.any(self.outcomes >= 1 << self.n):
            raise InputError(f"outcome index outside the {self.n}-qubit range")
        if np.any(self.counts < 1) or self.shots < 1:
            raise InputError("a record needs S >= 1 and positive counts")

    @classmethod
    def from_outcomes(cls, basis: str, n: int, indices: Sequence[int]) -> "ShotRecord":
        if not 1 <= n <= MAX_RECORD_QUBITS:
            raise InputError(f"record needs 1 <= n <= {MAX_RECORD_QUBITS}, got {n}")
        values, counts = np.unique(np.asarray(indices, dtype=np.int64), return_counts=True)
        return cls(basis, n, values, counts.astype(np.int64))

    @classmethod
    def from_counts(cls, basis: str, n: int, counts: Mapping[str, int]) -> "ShotRecord":
        if not 1 <= n <= MAX_RECORD_QUBITS:
            raise InputError(f"record needs 1 <= n <= {MAX_RECORD_QUBITS}, got {n}")
        merged: Dict[int, int] = {}
        for bits, count in counts.items():
            if count:
                index = int(bits, 2)
                merged[index] = merged.get(index, 0) + int(count)
        keys = sorted(merged)
        return cls(basis, n, np.array(keys, dtype=np.int64), np.array([merged[i] for i in keys], dtype=np.int64))

    @property
    def shots(self) -> int:
        return int(self.counts.sum())

    def bits(self) -> np.ndarray:
        """Distinct outcomes as a (rows, n) 0/1 matrix."""
        shifts = np.arange(self.n - 1, -1, -1, dtype=np.int64)
        return ((self.outcomes[:, None] >> shifts) & 1).astype(np.int8)

    def eigenvalues(self) -> np.ndarray:
        """Distinct outcomes as (rows, n) matrices of m_j = (-1)^b_j."""
        return (1 - 2 * self.bits()).astype(np.int64)

    def bitstrings(self) -> List[str]:
        return [format(int(i), f"0{self.n}b") for i in self.outcomes]

    def counts_dict(self) -> Dict[str, int]:
        return dict(zip(self.bitstrings(), (int(c) for c in self.counts)))

    def expanded(self) -> np.ndarray:
        """Per-shot basis indices in sorted order."""
        return np.repeat(self.outcomes, self.counts)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ShotRecord):
            return NotImplemented
        return (
            self.basis == other.basis
            and self.n == other.n
            and np.array_equal(self.outcomes, other.outcomes)
            and np.array_equal(self.counts, other.counts)
        )


def w_prep_circuit(n: int) -> Circuit:
    """
    Cascade preparation of W_n with 2n-3 two-qubit gates.

    X puts the excitation on qubit 0; each step j splits amplitude
    sqrt(1/(n-j)) off to qubit j+1 with a controlled Ry(theta_j),
    theta_j = 2 arccos(sqrt(1/(n-j))), then a CNOT from j+1 to j moves the
    excitation. At j = 0 the control qubit is |1> with certainty, so that
    controlled rotation is applied as a plain Ry.
    """
    if n < 2:
        raise InputError(f"W preparation needs n >= 2, got {n}")
    gates = [pauli_x(0)]
    for j in range(n - 1):
        theta = 2.0 * math.acos(math.sqrt(1.0 / (n - j)))
        gates.append(rotation("Y", theta, j + 1) if j == 0 else controlled_ry(theta, j, j + 1))
        gates.append(cnot(j + 1, j))
    return Circuit(n, tuple(gates))


def _apply_matrix(state: np.ndarray, matrix: np.ndarray, axis: int) -> np.ndarray:
    return np.moveaxis(np.tensordot(matrix, state, axes=([1], [axis])), 0, axis)


def _apply_gate(state: np.ndarray, gate: Gate) -> np.ndarray:
    if gate.kind == PAULI:
        for letter, q in zip(gate.axis, gate.qubits):
            if letter != "I":
                state = _apply_matrix(state, PAULI_MATRICES[letter], q)
        return state
    if gate.kind in (ROTATION, PAULI_X):
        return _apply_matrix(state, gate.matrix(), gate.qubits[0])
    control, target = gate.qubits
    selector = [slice(None)] * state.ndim
    selector[control] = 1
    selector = tuple(selector)
    axis = target - 1 if target > control else target
    state = state.copy()
    state[selector] = _apply_matrix(state[selector], gate.matrix(), axis)
    return state


def run_statevector(circuit: Circuit, initial: Optional[np.ndarray] = None) -> np.ndarray:
    """Apply the circuit gate by gate to |0...0> (or `initial`)."""
    n = circuit.n
    if n > MAX_SIM_QUBITS:
        raise InputError(f"statevector simulation limited to {MAX_SIM_QUBITS} qubits, got {n}")
    if initial is None:
        psi = np.zeros(1 << n, dtype=complex)
        psi[0] = 1.0
    else:
        psi = check_state(initial, n).copy()
    state = psi.reshape([2] * n)
    for gate in circuit.gates:
        state = _apply_gate(state, gate)
    return np.ascontiguousarray(state).reshape(-1)


def rotate_to_basis(psi: np.ndarray, basis: str) -> np.ndarray:
    """Rotate every qubit so that a Z measurement reads out `basis` (H for X, H S^dag for Y)."""
    if basis not in BASIS_ROTATIONS:
        raise InputError(f"unknown basis {basis!r}")
    matrix = BASIS_ROTATIONS[basis]
    if matrix is None:
        return psi
    n = psi.shape[0].bit_length() - 1
    state = psi.reshape([2] * n)
    for q in range(n):
        state = _apply_matrix(state, matrix, q)
    return np.ascontiguousarray(state).reshape(-1)


def _draw_indices(psi: np.ndarray, basis: str, uniforms: np.ndarray) -> np.ndarray:
    probabilities = np.abs(rotate_to_basis(psi, basis)) ** 2
    cdf = np.cumsum(probabilities)
    cdf /= cdf[-1]
    indices = np.searchsorted(cdf, uniforms, side="right")
    return np.minimum(indices, psi.shape[0] - 1).astype(np.int64)


def _depolarize(indices: np.ndarray, n: int, basis: str, seed: int, lam: float) -> np.ndarray:
    if lam <= 0.0:
        return indices
    draws = rng.stream(seed, "depolarize", rng.BASIS_TAGS[basis]).random((indices.shape[0], 2))
    uniform = np.minimum((draws[:, 1] * (1 << n)).astype(np.int64), (1 << n) - 1)
    return np.where(draws[:, 0] < lam, uniform, indices)


def sample_shots(
    psi: np.ndarray,
    basis: str,
    shots: int,
    seed: int,
    depolarizing_lambda: float = 0.0,
) -> ShotRecord:
    """
    Sample `shots` outcomes of measuring every qubit in `basis`.

    Shot s uses the s-th draw of a Philox stream keyed by (seed, basis), so
    records are bit-identical across runs. With `depolarizing_lambda` > 0
    each shot is drawn from (1 - lambda)|psi><psi| + lambda * 1/2^n.

    Args:
        psi: Normalized state vector
        basis: "X", "Y" or "Z"
        shots: Number of outcomes to draw
        seed: Root seed of the run
        depolarizing_lambda: Global depolarizing strength in [0, 1]

    Returns:
        ShotRecord holding one outcome index per shot
    """
    if shots < 1:
        raise InputError(f"shots must be >= 1, got {shots}")
    psi = np.asarray(psi, dtype=complex)
    n = psi.shape[0].bit_length() - 1
    psi = check_state(psi, n)
    indices = _draw_indices(psi, basis, rng.shot_uniforms(seed, "sample", basis, shots))
    indices = _depolarize(indices, n, basis, seed, depolarizing_lambda)
    return ShotRecord.from_outcomes(basis, n, indices)


def apply_trajectory_noise(circuit: Circuit, model: NoiseModel, trajectory_seed: int) -> Circuit:
    """After each two-qubit gate insert, with probability p, one of the 15 non-identity two-qubit Paulis."""
    p = model.two_qubit_depolarizing_p
    if p == 0.0:
        return circuit
    generator = np.random.Generator(np.random.Philox(trajectory_seed))
    gates: List[Gate] = []
    for gate in circuit.gates:
        gates.append(gate)
        if not gate.is_two_qubit:
            continue
        if generator.random() < p:
            letters = TWO_QUBIT_PAULIS[int(generator.integers(len(TWO_QUBIT_PAULIS)))]
            gates.append(Gate(PAULI, gate.qubits, axis=letters))
    return Circuit(circuit.n, tuple(gates))


def sample_circuit_shots(
    circuit: Circuit,
    model: NoiseModel,
    basis: str,
    shots: int,
    seed: int,
) -> ShotRecord:
    """
    Shot sampling from a noisy circuit: shot s follows its own trajectory,
    keyed by (seed, basis, s). Shots sharing a trajectory share one
    simulation.
    """
    if shots < 1:
        raise InputError(f"shots must be >= 1, got {shots}")
    uniforms = rng.shot_uniforms(seed, "sample", basis, shots)
    if model.two_qubit_depolarizing_p == 0.0:
        indices = _draw_indices(run_statevector(circuit), basis, uniforms)
    else:
        groups: Dict[Tuple[Gate, ...], List[int]] = {}
        for s in range(shots):
            noisy = apply_trajectory_noise(circuit, model, rng.trajectory_seed(seed, basis, s))
            groups.setdefault(noisy.gates, []).append(s)
        logger.debug("basis %s: %d distinct trajectories over %d shots", basis, len(groups), shots)
        indices = np.empty(shots, dtype=np.int64)
        for gates, members in groups.items():
            members_arr = np.asarray(members, dtype=np.int64)
            psi = run_statevector(Circuit(circuit.n, gates))
            indices[members_arr] = _draw_indices(psi, basis, uniforms[members_arr])
    indices = _depolarize(indices, circuit.n, basis, seed, model.global_depolarizing_lambda)
    return ShotRecord.from_outcomes(basis, circuit.n, indices)


def global_depolarized_energy(h: PauliSum, psi: np.ndarray, lam: float) -> float:
    """(1 - lambda) <psi|H|psi> + lambda Tr(H)/2^n; the trace term is the identity coefficient."""
    if not 0.0 <= lam <= 1.0:
        raise InputError(f"lambda must lie in [0, 1], got {lam}")
    return (1.0 - lam) * expectation(h, psi) + lam * h.identity_coefficient


def random_state(n: int, seed: int) -> np.ndarray:
    """Haar-like random pure state (normalized complex Gaussian vector)."""
    generator = rng.stream(seed, "random_state", n)
    psi = generator.standard_normal(1 << n) + 1j * generator.standard_normal(1 << n)
    return psi / np.linalg.norm(psi)


def basis_state(bits: str) -> np.ndarray:
    """|bits> with qubit 0 leftmost."""
    psi = np.zeros(1 << len(bits), dtype=complex)
    psi[int(bits, 2)] = 1.0
    return psi

