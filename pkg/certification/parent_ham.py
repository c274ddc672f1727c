"""
Dicke Parent Hamiltonians

H = (1/n) sum_{j<l} (1 - S_jl) + (P - k)^2 in operator form (swap matrices and
the diagonal Hamming-weight operator) and in Pauli form, plus the dense
spectral certificate (kernel, gap, max eigenvalue) that every other module
trusts.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from math import comb
from typing import Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field
from scipy.linalg import eigh

from certification import rng
from certification.dicke import DickeSpec, dicke_state, transposed_indices
from certification.errors import InputError, SpectralVerificationError
from certification.pauli import MAX_DENSE_QUBITS, PauliSum, apply, basis_indices, pauli_letters, to_dense

logger = logging.getLogger(__name__)

MAX_VERIFY_QUBITS = 10
SPECTRAL_TOLERANCE = 1e-9
POWER_ITERATION_RTOL = 1e-6
POWER_ITERATION_MAX_STEPS = 2000


@dataclass(frozen=True)
class HamiltonianSpec:
    """Parent Hamiltonian parameters: certified gap and identity coefficient C."""

    n: int
    k: int
    delta: float
    c_const: float

    def __post_init__(self):
        if self.delta < 1.0:
            raise InputError(f"certified gap must be >= 1, got {self.delta}")


class SpectrumReport(BaseModel):
    """Result of dense diagonalization of the Pauli-form Hamiltonian."""

    n: int
    k: int
    ground_energy: float
    ground_fidelity: float
    gap: float
    max_eig: float
    kernel_dimension: int = Field(1, description="eigenvalues within tolerance of zero")
    gap_source: str = Field("eigensolver", description="'eigensolver' or 'analytic'")
    max_eig_approximate: bool = False


def c_constant(n: int, k: int) -> Fraction:
    """C = (n/2 - k)^2 + (2n - 1)/4."""
    return Fraction(n - 2 * k, 2) ** 2 + Fraction(2 * n - 1, 4)


def hamiltonian_spec(n: int, k: int, delta: float = 1.0) -> HamiltonianSpec:
    DickeSpec(n, k)
    return HamiltonianSpec(n=n, k=k, delta=delta, c_const=float(c_constant(n, k)))


def _check_nk(n: int, k: int) -> None:
    if n < 2:
        raise InputError(f"parent Hamiltonian needs n >= 2, got {n}")
    if not 0 <= k <= n:
        raise InputError(f"k must lie in [0, {n}], got {k}")


def build_pauli(n: int, k: int) -> PauliSum:
    """
    Pauli form: C*1 - (n/2 - k) sum Z_j - 1/(2n) sum (X_jX_l + Y_jY_l) + (1/2 - 1/(2n)) sum Z_jZ_l.

    Coefficients are exact rationals until the final conversion, so the
    single-Z coefficient is exactly zero at k = n/2 and those terms vanish.
    """
    _check_nk(n, k)
    z_coeff = -Fraction(n - 2 * k, 2)
    hop_coeff = -Fraction(1, 2 * n)
    zz_coeff = Fraction(1, 2) - Fraction(1, 2 * n)
    terms = [("I" * n, float(c_constant(n, k)))]
    terms += [(pauli_letters(n, "Z", [j]), float(z_coeff)) for j in range(n)]
    for pair in combinations(range(n), 2):
        terms.append((pauli_letters(n, "X", pair), float(hop_coeff)))
        terms.append((pauli_letters(n, "Y", pair), float(hop_coeff)))
        terms.append((pauli_letters(n, "Z", pair), float(zz_coeff)))
    return PauliSum.from_terms(n, terms)


def hamming_weight_operator(n: int) -> PauliSum:
    """P = (n*1 - sum Z_j)/2, so P|x> = |x|_1 |x>."""
    if n < 1:
        raise InputError(f"n must be >= 1, got {n}")
    terms = [("I" * n, n / 2)] + [(pauli_letters(n, "Z", [j]), -0.5) for j in range(n)]
    return PauliSum.from_terms(n, terms)


def build_operator_parts(n: int, k: int) -> Tuple[np.ndarray, np.ndarray]:
    """Dense (H1, H2): the swap part and the Hamming-weight penalty."""
    _check_nk(n, k)
    if n > MAX_DENSE_QUBITS:
        raise InputError(f"dense operator limited to {MAX_DENSE_QUBITS} qubits, got {n}")
    dim = 1 << n
    indices = basis_indices(n)
    swap_sum = np.zeros((dim, dim))
    for i, j in combinations(range(n), 2):
        swap_sum[transposed_indices(n, i, j), indices] += 1.0
    h1 = (comb(n, 2) * np.eye(dim) - swap_sum) / n
    weights = np.bitwise_count(indices).astype(np.float64)
    h2 = np.diag((weights - k) ** 2)
    return h1, h2


def build_operator(n: int, k: int) -> np.ndarray:
    h1, h2 = build_operator_parts(n, k)
    return h1 + h2


def _dense_real(h: PauliSum) -> np.ndarray:
    matrix = to_dense(h)
    if np.max(np.abs(matrix.imag)) > 1e-12:
        raise SpectralVerificationError("Pauli-form Hamiltonian has a non-real dense matrix")
    return matrix.real


def verify_spectrum(n: int, k: int) -> SpectrumReport:
    """
    Diagonalize the Pauli-form Hamiltonian and check the certificate:
    zero ground energy, ground vector equal to the Dicke state, unit gap.

    Args:
        n: Number of qubits, at most MAX_VERIFY_QUBITS
        k: Excitation number

    Returns:
        SpectrumReport including the largest eigenvalue

    Raises:
        SpectralVerificationError: if any of the three checks fails
    """
    _check_nk(n, k)
    if n > MAX_VERIFY_QUBITS:
        raise InputError(f"dense spectral verification limited to {MAX_VERIFY_QUBITS} qubits, got {n}")
    eigenvalues, eigenvectors = eigh(_dense_real(build_pauli(n, k)))
    ground = eigenvalues[0]
    overlap = np.vdot(dicke_state(DickeSpec(n, k)), eigenvectors[:, 0])
    report = SpectrumReport(
        n=n,
        k=k,
        ground_energy=float(ground),
        ground_fidelity=float(abs(overlap) ** 2),
        gap=float(eigenvalues[1] - ground),
        max_eig=float(eigenvalues[-1]),
        kernel_dimension=int(np.sum(np.abs(eigenvalues) <= SPECTRAL_TOLERANCE)),
    )
    problems = []
    if abs(report.ground_energy) > SPECTRAL_TOLERANCE:
        problems.append(f"ground energy {report.ground_energy:.3e}")
    if report.ground_fidelity < 1.0 - SPECTRAL_TOLERANCE:
        problems.append(f"ground fidelity {report.ground_fidelity:.12f}")
    if abs(report.gap - 1.0) > SPECTRAL_TOLERANCE:
        problems.append(f"gap {report.gap:.12f}")
    if report.kernel_dimension != 1:
        problems.append(f"kernel dimension {report.kernel_dimension}")
    if problems:
        raise SpectralVerificationError(f"spectral certificate failed for n={n}, k={k}: " + ", ".join(problems))
    logger.debug("Spectrum verified for n=%d k=%d: gap=%.12f max=%.6f", n, k, report.gap, report.max_eig)
    return report


def estimate_max_eigenvalue(
    h: PauliSum,
    rtol: float = POWER_ITERATION_RTOL,
    max_steps: int = POWER_ITERATION_MAX_STEPS,
    seed: int = 0,
) -> float:
    """
    Largest eigenvalue of a positive-semidefinite PauliSum by power iteration
    on the Pauli action; stops when the Rayleigh quotient changes by less
    than `rtol` relative.
    """
    generator = rng.stream(seed, "power_iteration", h.n)
    dim = 1 << h.n
    vector = generator.standard_normal(dim) + 1j * generator.standard_normal(dim)
    vector /= np.linalg.norm(vector)
    estimate = 0.0
    for step in range(max_steps):
        image = apply(h, vector)
        rayleigh = float(np.vdot(vector, image).real)
        norm = np.linalg.norm(image)
        if norm == 0.0:
            return 0.0
        vector = image / norm
        if step > 0 and abs(rayleigh - estimate) <= rtol * abs(rayleigh):
            return rayleigh
        estimate = rayleigh
    logger.warning("Power iteration did not converge within %d steps (estimate %.6f)", max_steps, estimate)
    return estimate


def max_eigenvalue(n: int, k: int, spectrum: Optional[SpectrumReport] = None) -> Tuple[float, bool]:
    """(max H, approximate?): dense when affordable, power iteration beyond."""
    if spectrum is not None:
        return spectrum.max_eig, spectrum.max_eig_approximate
    if n <= MAX_VERIFY_QUBITS:
        return verify_spectrum(n, k).max_eig, False
    logger.warning("max H for n=%d estimated by power iteration (approximate)", n)
    return estimate_max_eigenvalue(build_pauli(n, k)), True
