"""
Energy Estimation

Turns the three global-basis shot records into an energy estimate with a
standard error: per-shot contributions g_b^(s), their sample means, unbiased
(S-1) variances, and the quadrature combination over bases.

Records are kept in counts form; every statistic is computed with frequency
weights over the distinct outcomes, which is identical to iterating shots.
"""

import logging
from dataclasses import dataclass
from itertools import combinations
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, Field

from certification.errors import InputError
from certification.pauli import BASES, BasisGroups, PauliSum, group_by_basis
from certification.sim import ShotRecord

logger = logging.getLogger(__name__)

VARIANCE_DENOMINATOR = "S-1"
CONSTANT_BASIS = "Z"


class BasisEstimate(BaseModel):
    basis: str
    mean: float
    sem: float
    shots: int


class EnergyEstimate(BaseModel):
    """Energy mean, SEM and per-basis contributions (constant folded into Z)."""

    mean: float
    sem: float = Field(..., ge=0.0)
    per_basis: Dict[str, BasisEstimate]
    constant: float
    variance_denominator: str = VARIANCE_DENOMINATOR
    constant_basis: str = CONSTANT_BASIS


@dataclass(frozen=True)
class GroupCoefficients:
    """Coefficients of one basis group, laid out for vectorized evaluation."""

    n: int
    constant: float
    single: np.ndarray
    pair_uniform: Optional[float]
    pair_matrix: np.ndarray
    higher: Tuple[Tuple[float, Tuple[int, ...]], ...]

    @property
    def is_empty(self) -> bool:
        return (
            self.constant == 0.0
            and not np.any(self.single)
            and not np.any(self.pair_matrix)
            and not self.higher
        )


def compile_group(group: PauliSum, constant: float = 0.0) -> GroupCoefficients:
    n = group.n
    single = np.zeros(n)
    pair_matrix = np.zeros((n, n))
    higher = []
    for term in group:
        support = term.support
        if len(support) == 1:
            single[support[0]] += term.coefficient
        elif len(support) == 2:
            pair_matrix[support] += term.coefficient
        else:
            higher.append((term.coefficient, support))
    pair_values = [pair_matrix[j, l] for j, l in combinations(range(n), 2)]
    pair_uniform = None
    if pair_values and all(v == pair_values[0] for v in pair_values):
        pair_uniform = float(pair_values[0])
    return GroupCoefficients(n, constant, single, pair_uniform, pair_matrix, tuple(higher))


def pair_sum_fast(m: np.ndarray) -> np.ndarray:
    """sum_{j<l} m_j m_l per row as ((sum_j m_j)^2 - n)/2, in integers."""
    m = np.asarray(m, dtype=np.int64)
    s = m.sum(axis=1)
    return (s * s - m.shape[1]) // 2


def pair_sum_direct(m: np.ndarray) -> np.ndarray:
    m = np.asarray(m, dtype=np.int64)
    out = np.zeros(m.shape[0], dtype=np.int64)
    for j, l in combinations(range(m.shape[1]), 2):
        out += m[:, j] * m[:, l]
    return out


def contributions(m: np.ndarray, coefficients: GroupCoefficients) -> np.ndarray:
    """g for each row of the +-1 matrix m."""
    values = np.full(m.shape[0], coefficients.constant, dtype=np.float64)
    values += m @ coefficients.single
    if coefficients.pair_uniform is not None:
        values += coefficients.pair_uniform * pair_sum_fast(m)
    elif np.any(coefficients.pair_matrix):
        values += np.einsum("si,ij,sj->s", m, coefficients.pair_matrix, m)
    for coefficient, support in coefficients.higher:
        values += coefficient * np.prod(m[:, list(support)], axis=1)
    return values


def _basis_coefficients(groups: BasisGroups, basis: str) -> GroupCoefficients:
    constant = groups.constant if basis == CONSTANT_BASIS else 0.0
    return compile_group(groups.group(basis), constant)


def per_shot_contribution(bits: Union[str, Sequence[int]], basis: str, groups: BasisGroups) -> float:
    """g_b for one n-bit outcome, with m_j = (-1)^b_j."""
    row = [int(b) for b in bits]
    if len(row) != groups.n:
        raise InputError(f"outcome has {len(row)} bits, Hamiltonian has {groups.n} qubits")
    if any(b not in (0, 1) for b in row):
        raise InputError(f"outcome {bits!r} is not a bitstring")
    m = 1 - 2 * np.array([row], dtype=np.int64)
    return float(contributions(m, _basis_coefficients(groups, basis))[0])


def weighted_mean_sem(values: np.ndarray, weights: np.ndarray) -> Tuple[float, float]:
    """Sample mean and standard error with frequency weights and the (S-1) variance."""
    shots = int(weights.sum())
    if shots < 2:
        raise InputError(f"variance needs at least 2 shots, got {shots}")
    mean = float(np.sum(weights * values) / shots)
    variance = float(np.sum(weights * (values - mean) ** 2) / (shots - 1))
    return mean, float(np.sqrt(variance / shots))


def estimate_energy(records: Mapping[str, ShotRecord], h: PauliSum) -> EnergyEstimate:
    """
    <H> and its SEM from one record per measured basis.

    A basis whose group is empty (no terms, and no constant for Z) needs no
    record.

    Args:
        records: Shot records keyed by basis letter
        h: Hamiltonian whose terms are each diagonal in one basis

    Returns:
        EnergyEstimate with the mean, SEM and per-basis breakdown

    Raises:
        InputError: if a needed record is missing or sized for another n
    """
    groups = group_by_basis(h)
    per_basis: Dict[str, BasisEstimate] = {}
    for basis in BASES:
        coefficients = _basis_coefficients(groups, basis)
        record = records.get(basis)
        if record is None:
            if coefficients.is_empty:
                continue
            raise InputError(f"missing shot record for basis {basis}")
        if record.basis != basis:
            raise InputError(f"record filed under {basis} was measured in {record.basis}")
        if record.n != h.n:
            raise InputError(f"{basis} record has n={record.n}, Hamiltonian has n={h.n}")
        values = contributions(record.eigenvalues(), coefficients)
        mean, sem = weighted_mean_sem(values, record.counts)
        per_basis[basis] = BasisEstimate(basis=basis, mean=mean, sem=sem, shots=record.shots)
    mean = float(np.sum([b.mean for b in per_basis.values()]))
    sem = float(np.sqrt(np.sum([b.sem ** 2 for b in per_basis.values()])))
    logger.debug("Energy estimate %.6f +/- %.6f from bases %s", mean, sem, sorted(per_basis))
    return EnergyEstimate(mean=mean, sem=sem, per_basis=per_basis, constant=groups.constant)


@dataclass(frozen=True)
class CorrelatorTable:
    """Sample means <m_j> and <m_j m_l> of one record."""

    basis: str
    n: int
    shots: int
    single: np.ndarray
    pairs: np.ndarray

    def to_dict(self) -> Dict[str, object]:
        return {
            "basis": self.basis,
            "n": self.n,
            "shots": self.shots,
            "single": self.single.tolist(),
            "pairs": [
                {"j": j, "l": l, "value": float(self.pairs[j, l])}
                for j, l in combinations(range(self.n), 2)
            ],
        }


def correlator_table(record: ShotRecord) -> CorrelatorTable:
    m = record.eigenvalues().astype(np.float64)
    weights = record.counts.astype(np.float64)
    shots = record.shots
    single = (weights @ m) / shots
    pairs = ((m.T * weights) @ m) / shots
    return CorrelatorTable(record.basis, record.n, shots, single, pairs)


def energy_from_correlators(tables: Mapping[str, CorrelatorTable], h: PauliSum) -> float:
    """<H> assembled from one- and two-body correlators."""
    total: List[float] = [h.identity_coefficient]
    for term in h:
        if term.is_identity:
            continue
        letter, support = term.letter, term.support
        if letter is None or len(support) > 2:
            raise InputError(f"term {term.letters} is not a one- or two-body uniform term")
        table = tables.get(letter)
        if table is None:
            raise InputError(f"missing correlators for basis {letter}")
        value = table.single[support[0]] if len(support) == 1 else table.pairs[support]
        total.append(term.coefficient * float(value))
    return float(np.sum(total))
