"""
Dicke States

Exact Dicke/W state vectors, pure-state fidelities, bipartition Schmidt
spectra and the biseparable-fidelity threshold alpha.

Binomials are exact integers and every Schmidt weight is formed as a
Fraction before the single conversion to float.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Dict, Iterable, List

import numpy as np
from scipy.linalg import svdvals

from certification.errors import InputError
from certification.pauli import basis_indices, check_state
from certification.sim import MAX_SIM_QUBITS

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DickeSpec:
    """n qubits with k excitations; W_n is k = 1."""

    n: int
    k: int

    def __post_init__(self):
        if self.n < 1:
            raise InputError(f"n must be >= 1, got {self.n}")
        if not 0 <= self.k <= self.n:
            raise InputError(f"k must lie in [0, {self.n}], got {self.k}")

    @property
    def is_product_sector(self) -> bool:
        """k in {0, n}: the Dicke state is a product state and the witness is vacuous."""
        return self.k in (0, self.n)

    def beta_range(self, a: int) -> range:
        return range(max(0, self.k - (self.n - a)), min(a, self.k) + 1)


@dataclass(frozen=True)
class BipartitionSpectrum:
    """Squared Schmidt coefficients of a Dicke state across an a : n-a cut."""

    a: int
    lambdas: Dict[int, float]

    @property
    def largest(self) -> float:
        return max(self.lambdas.values())


@dataclass(frozen=True)
class AlphaValue:
    """Biseparable threshold together with how it was obtained."""

    value: float
    method: str
    vacuous: bool = False


def dicke_state(spec: DickeSpec) -> np.ndarray:
    if spec.n > MAX_SIM_QUBITS:
        raise InputError(f"state vectors are limited to {MAX_SIM_QUBITS} qubits, got {spec.n}")
    weights = np.bitwise_count(basis_indices(spec.n))
    psi = np.zeros(1 << spec.n, dtype=complex)
    psi[weights == spec.k] = 1.0 / np.sqrt(comb(spec.n, spec.k))
    return psi


def fidelity_pure(psi: np.ndarray, target: DickeSpec) -> float:
    """|<D_n^k|psi>|^2."""
    psi = check_state(psi, target.n)
    overlap = np.vdot(dicke_state(target), psi)
    return float(min(1.0, abs(overlap) ** 2))


def schmidt_fraction(spec: DickeSpec, a: int, beta: int) -> Fraction:
    if not 1 <= a <= spec.n - 1:
        raise InputError(f"subsystem size a must lie in [1, {spec.n - 1}], got {a}")
    if beta not in spec.beta_range(a):
        return Fraction(0)
    b = spec.n - a
    return Fraction(comb(a, beta) * comb(b, spec.k - beta), comb(spec.n, spec.k))


def schmidt_lambda(spec: DickeSpec, a: int, beta: int) -> float:
    """lambda_{a:b}(beta) = C(a, beta) C(n-a, k-beta) / C(n, k); zero outside the valid beta range."""
    return float(schmidt_fraction(spec, a, beta))


def bipartition_spectrum(spec: DickeSpec, a: int) -> BipartitionSpectrum:
    return BipartitionSpectrum(a=a, lambdas={beta: schmidt_lambda(spec, a, beta) for beta in spec.beta_range(a)})


def alpha_bruteforce_exact(spec: DickeSpec) -> Fraction:
    if spec.is_product_sector:
        return Fraction(1)
    # Permutation symmetry: only the size of the cut matters.
    return max(
        schmidt_fraction(spec, a, beta)
        for a in range(1, spec.n)
        for beta in spec.beta_range(a)
    )


def alpha_bruteforce(spec: DickeSpec) -> float:
    """Largest squared Schmidt coefficient over all cut sizes; 1.0 in the product sectors."""
    if spec.is_product_sector:
        logger.debug("alpha for (n=%d, k=%d): product state, witness vacuous", spec.n, spec.k)
    return float(alpha_bruteforce_exact(spec))


def alpha_closed_form_exact(spec: DickeSpec) -> Fraction:
    n, k = spec.n, spec.k
    if not 1 <= k <= n - 1:
        raise InputError(f"closed-form alpha requires 1 <= k <= n-1, got n={n}, k={k}")
    if 2 * k < n:
        return Fraction(n - k, n)
    if 2 * k == n:
        return Fraction(n, 2 * (n - 1))
    return Fraction(k, n)


def alpha_closed_form(spec: DickeSpec) -> float:
    """(n-k)/n for k < n/2, n/(2(n-1)) for k = n/2, k/n for k > n/2."""
    return float(alpha_closed_form_exact(spec))


def alpha_threshold(spec: DickeSpec) -> AlphaValue:
    """
    Threshold used by the witness.

    The balanced closed form evaluates to 1 at n = 2 while the W_2 Schmidt
    weight is 1/2, so sizes below 4 use the brute-force value.
    """
    if spec.is_product_sector:
        return AlphaValue(1.0, "product-sector", vacuous=True)
    if spec.n < 4:
        return AlphaValue(alpha_bruteforce(spec), "bruteforce")
    return AlphaValue(alpha_closed_form(spec), "closed-form")


def alpha_table(n_values: Iterable[int], k_values: Iterable[int]) -> List[Dict[str, object]]:
    rows = []
    k_values = list(k_values)
    for n in n_values:
        for k in k_values:
            if not 0 <= k <= n:
                continue
            spec = DickeSpec(n, k)
            closed = alpha_closed_form_exact(spec) if 1 <= k <= n - 1 else None
            brute = alpha_bruteforce_exact(spec)
            rows.append({
                "n": n,
                "k": k,
                "alpha": alpha_threshold(spec).value,
                "closed_form": str(closed) if closed is not None else None,
                "bruteforce": str(brute),
                "agree": closed == brute if closed is not None else None,
            })
    return rows


def transposed_indices(n: int, i: int, j: int) -> np.ndarray:
    """Basis index b with the bits of qubits i and j exchanged, for every b."""
    if not (0 <= i < n and 0 <= j < n):
        raise InputError(f"transposition ({i}, {j}) out of range for n={n}")
    indices = basis_indices(n)
    bi, bj = n - 1 - i, n - 1 - j
    differ = ((indices >> bi) ^ (indices >> bj)) & 1
    return indices ^ (differ * ((1 << bi) | (1 << bj)))


def apply_transposition(psi: np.ndarray, i: int, j: int) -> np.ndarray:
    """Permute amplitudes by swapping bits i and j of every basis index."""
    psi = np.asarray(psi, dtype=complex)
    n = psi.shape[0].bit_length() - 1
    if psi.shape[0] != 1 << n:
        raise InputError(f"state length {psi.shape[0]} is not a power of two")
    out = np.empty_like(psi)
    out[transposed_indices(n, i, j)] = psi
    return out


def flip_all(psi: np.ndarray) -> np.ndarray:
    """X on every qubit: amplitude of b moves to the complement of b."""
    return np.asarray(psi, dtype=complex)[::-1].copy()


def schmidt_spectrum_oracle(psi: np.ndarray, a: int) -> np.ndarray:
    """Squared singular values of psi reshaped across qubits [0, a) : [a, n)."""
    psi = np.asarray(psi, dtype=complex)
    n = psi.shape[0].bit_length() - 1
    if not 1 <= a <= n - 1:
        raise InputError(f"cut size a must lie in [1, {n - 1}], got {a}")
    return svdvals(psi.reshape(1 << a, 1 << (n - a))) ** 2
