"""
Pauli Sums

Exact algebra for real-weighted sums of n-qubit Pauli strings: construction,
expectation values against statevectors, dense materialization for oracle
checks, and grouping into the three global measurement bases.

Qubit 0 is the leftmost letter and the most significant bit of a basis index.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache, reduce
from numbers import Real
from typing import Any, Dict, Iterable, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from certification.errors import CertificationError, InputError, SchemaError, SchemaIssue

logger = logging.getLogger(__name__)

LETTERS = "IXYZ"
BASES = ("X", "Y", "Z")

MAX_DENSE_QUBITS = 12
NORM_TOLERANCE = 1e-6
IMAG_TOLERANCE = 1e-10
HERMITIAN_TOLERANCE = 1e-12

PAULI_MATRICES: Dict[str, np.ndarray] = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


@dataclass(frozen=True)
class PauliTerm:
    """A real coefficient times a Pauli string."""

    coefficient: float
    letters: str

    def __post_init__(self):
        coefficient = self.coefficient
        if isinstance(coefficient, bool) or not isinstance(coefficient, Real):
            raise InputError(f"coefficient {coefficient!r} for {self.letters} is not a real number")
        coefficient = float(coefficient)
        if not math.isfinite(coefficient):
            raise InputError(f"non-finite coefficient for {self.letters}")
        if not self.letters or any(c not in LETTERS for c in self.letters):
            raise InputError(f"invalid Pauli string {self.letters!r}")
        object.__setattr__(self, "coefficient", coefficient)

    @property
    def n(self) -> int:
        return len(self.letters)

    @property
    def is_identity(self) -> bool:
        return all(c == "I" for c in self.letters)

    @property
    def support(self) -> Tuple[int, ...]:
        return tuple(j for j, c in enumerate(self.letters) if c != "I")

    @property
    def letter(self) -> Optional[str]:
        """The single non-identity letter of a uniform term, None for identity or mixed terms."""
        used = {c for c in self.letters if c != "I"}
        return used.pop() if len(used) == 1 else None

    def masks(self) -> Tuple[int, int, int]:
        """(x_mask, z_mask, number of Y letters) with qubit j on bit n-1-j."""
        x_mask = z_mask = 0
        n_y = 0
        for j, c in enumerate(self.letters):
            bit = 1 << (self.n - 1 - j)
            if c in "XY":
                x_mask |= bit
            if c in "ZY":
                z_mask |= bit
            if c == "Y":
                n_y += 1
        return x_mask, z_mask, n_y


TermLike = Union[PauliTerm, Tuple[str, float]]


@dataclass(frozen=True)
class PauliSum:
    """
    Weighted sum of n-qubit Pauli strings.

    Letter sequences are unique; build instances through `from_terms`, which
    merges duplicates and drops coefficients that sum to exactly 0.0. The
    identity term is kept explicitly.
    """

    n: int
    terms: Tuple[PauliTerm, ...]

    def __post_init__(self):
        if self.n < 1:
            raise InputError(f"qubit count must be >= 1, got {self.n}")
        seen = set()
        for term in self.terms:
            if term.n != self.n:
                raise InputError(f"term {term.letters} has {term.n} qubits, expected {self.n}")
            if term.letters in seen:
                raise InputError(f"duplicate Pauli string {term.letters}")
            seen.add(term.letters)

    @classmethod
    def from_terms(cls, n: int, items: Iterable[TermLike]) -> "PauliSum":
        merged: Dict[str, float] = {}
        for item in items:
            term = item if isinstance(item, PauliTerm) else PauliTerm(item[1], item[0])
            merged[term.letters] = merged.get(term.letters, 0.0) + term.coefficient
        return cls(n, tuple(PauliTerm(c, s) for s, c in merged.items() if c != 0.0))

    @classmethod
    def identity(cls, n: int, coefficient: float = 1.0) -> "PauliSum":
        return cls.from_terms(n, [("I" * n, coefficient)])

    def __iter__(self) -> Iterator[PauliTerm]:
        return iter(self.terms)

    def __len__(self) -> int:
        return len(self.terms)

    def __add__(self, other: "PauliSum") -> "PauliSum":
        if not isinstance(other, PauliSum):
            return NotImplemented
        if other.n != self.n:
            raise InputError(f"cannot add {self.n}-qubit and {other.n}-qubit sums")
        return PauliSum.from_terms(self.n, list(self.terms) + list(other.terms))

    def __mul__(self, scalar: float) -> "PauliSum":
        return PauliSum.from_terms(self.n, [(t.letters, scalar * t.coefficient) for t in self.terms])

    __rmul__ = __mul__

    def coefficient(self, letters: str) -> float:
        for term in self.terms:
            if term.letters == letters:
                return term.coefficient
        return 0.0

    @property
    def identity_coefficient(self) -> float:
        return self.coefficient("I" * self.n)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "n": self.n,
            "terms": [{"coeff": t.coefficient, "paulis": t.letters} for t in self.terms],
        }

    @classmethod
    def from_dict(cls, data: Any, source: str = "hamiltonian") -> "PauliSum":
        issues: List[SchemaIssue] = []
        if not isinstance(data, dict):
            raise SchemaError(source, [SchemaIssue("$", "expected a JSON object")])
        n = data.get("n")
        if not isinstance(n, int) or isinstance(n, bool) or n < 1:
            issues.append(SchemaIssue("n", f"expected a positive integer, got {n!r}"))
        raw_terms = data.get("terms")
        if not isinstance(raw_terms, list):
            issues.append(SchemaIssue("terms", "expected a list of {coeff, paulis}"))
            raw_terms = []
        items = []
        for i, entry in enumerate(raw_terms):
            where = f"terms[{i}]"
            if not isinstance(entry, dict):
                issues.append(SchemaIssue(where, "expected an object"))
                continue
            coeff, letters = entry.get("coeff"), entry.get("paulis")
            if isinstance(coeff, bool) or not isinstance(coeff, (int, float)):
                issues.append(SchemaIssue(f"{where}.coeff", f"expected a real number, got {coeff!r}"))
                continue
            if not isinstance(letters, str) or any(c not in LETTERS for c in letters):
                issues.append(SchemaIssue(f"{where}.paulis", f"invalid Pauli string {letters!r}"))
                continue
            if isinstance(n, int) and len(letters) != n:
                issues.append(SchemaIssue(f"{where}.paulis", f"length {len(letters)} != n={n}"))
                continue
            items.append((letters, float(coeff)))
        if issues:
            raise SchemaError(source, issues)
        return cls.from_terms(n, items)


@dataclass(frozen=True)
class BasisGroups:
    """Partition of a uniform-letter PauliSum into the X, Y and Z measurement settings."""

    x_terms: PauliSum
    y_terms: PauliSum
    z_terms: PauliSum
    constant: float

    @property
    def n(self) -> int:
        return self.z_terms.n

    def group(self, basis: str) -> PauliSum:
        try:
            return {"X": self.x_terms, "Y": self.y_terms, "Z": self.z_terms}[basis]
        except KeyError:
            raise InputError(f"unknown basis {basis!r}") from None

    def reassemble(self) -> PauliSum:
        terms = list(self.x_terms) + list(self.y_terms) + list(self.z_terms)
        return PauliSum.from_terms(self.n, terms + [("I" * self.n, self.constant)])


def pauli_letters(n: int, letter: str, qubits: Sequence[int]) -> str:
    """Pauli string with `letter` on each of `qubits` and I elsewhere."""
    chars = ["I"] * n
    for q in qubits:
        if not 0 <= q < n:
            raise InputError(f"qubit {q} out of range for n={n}")
        chars[q] = letter
    return "".join(chars)


@lru_cache(maxsize=32)
def basis_indices(n: int) -> np.ndarray:
    indices = np.arange(1 << n, dtype=np.int64)
    indices.setflags(write=False)
    return indices


def _parity_signs(indices: np.ndarray, z_mask: int) -> np.ndarray:
    if z_mask == 0:
        return np.ones(indices.shape, dtype=np.float64)
    return 1.0 - 2.0 * (np.bitwise_count(indices & z_mask) & 1)


def check_state(psi: np.ndarray, n: int) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    if psi.ndim != 1 or psi.shape[0] != 1 << n:
        raise InputError(f"state of shape {psi.shape} does not match {n} qubits")
    norm = float(np.linalg.norm(psi))
    if abs(norm - 1.0) > NORM_TOLERANCE:
        raise InputError(f"state is not normalized (norm {norm:.3e})")
    return psi


def apply_term(term: PauliTerm, psi: np.ndarray) -> np.ndarray:
    """coefficient * P|psi> via the bit-flip/phase action P|b> = i^nY (-1)^|b&z| |b^x>."""
    x_mask, z_mask, n_y = term.masks()
    indices = basis_indices(term.n)
    phase = term.coefficient * (1j ** n_y)
    out = np.empty_like(psi)
    out[indices ^ x_mask] = phase * _parity_signs(indices, z_mask) * psi
    return out


def apply(h: PauliSum, psi: np.ndarray) -> np.ndarray:
    """H|psi> without materializing H."""
    psi = np.asarray(psi, dtype=complex)
    out = np.zeros_like(psi)
    for term in h:
        out += apply_term(term, psi)
    return out


def _term_expectation(term: PauliTerm, psi: np.ndarray) -> complex:
    if term.is_identity:
        return complex(term.coefficient)
    x_mask, z_mask, n_y = term.masks()
    indices = basis_indices(term.n)
    scratch = _parity_signs(indices, z_mask) * psi
    return term.coefficient * (1j ** n_y) * np.vdot(psi[indices ^ x_mask], scratch)


def expectation(h: PauliSum, psi: np.ndarray, workers: int = 1) -> float:
    """
    <psi|H|psi> computed term by term.

    Term contributions are reduced with numpy's pairwise summation in term
    order, so the result is identical for any `workers`.

    Args:
        h: Hamiltonian in Pauli form
        psi: Normalized state vector of length 2^n
        workers: Threads used to evaluate the terms

    Returns:
        Real part of the expectation value
    """
    psi = check_state(psi, h.n)
    if workers > 1 and len(h) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            values = list(pool.map(lambda t: _term_expectation(t, psi), h.terms))
    else:
        values = [_term_expectation(t, psi) for t in h.terms]
    if not values:
        return 0.0
    total = np.sum(np.asarray(values, dtype=complex))
    scale = 1.0 + sum(abs(t.coefficient) for t in h)
    if abs(total.imag) > IMAG_TOLERANCE * scale:
        raise CertificationError(f"expectation has imaginary part {total.imag:.3e}")
    return float(total.real)


def to_dense(h: PauliSum) -> np.ndarray:
    """Dense 2^n x 2^n matrix of H, built from Kronecker products of the letters."""
    if h.n > MAX_DENSE_QUBITS:
        raise InputError(f"dense materialization limited to {MAX_DENSE_QUBITS} qubits, got {h.n}")
    dim = 1 << h.n
    matrix = np.zeros((dim, dim), dtype=complex)
    for term in h:
        if term.is_identity:
            matrix[np.diag_indices(dim)] += term.coefficient
            continue
        matrix += term.coefficient * reduce(np.kron, (PAULI_MATRICES[c] for c in term.letters))
    deviation = np.max(np.abs(matrix - matrix.conj().T)) if dim else 0.0
    if deviation > HERMITIAN_TOLERANCE:
        raise CertificationError(f"dense matrix is not Hermitian (deviation {deviation:.3e})")
    return matrix


def group_by_basis(h: PauliSum) -> BasisGroups:
    """Split H into X-, Y- and Z-only groups; the identity coefficient becomes `constant`."""
    grouped: Dict[str, List[PauliTerm]] = {b: [] for b in BASES}
    constant = 0.0
    for term in h:
        if term.is_identity:
            constant += term.coefficient
            continue
        letter = term.letter
        if letter is None:
            raise InputError(
                f"term {term.letters} mixes Pauli letters and cannot be measured in a single global basis"
            )
        grouped[letter].append(term)
    return BasisGroups(
        x_terms=PauliSum.from_terms(h.n, grouped["X"]),
        y_terms=PauliSum.from_terms(h.n, grouped["Y"]),
        z_terms=PauliSum.from_terms(h.n, grouped["Z"]),
        constant=constant,
    )
