from fractions import Fraction

import numpy as np
import pytest

from certification.dicke import (
    DickeSpec,
    alpha_bruteforce,
    alpha_bruteforce_exact,
    alpha_closed_form,
    alpha_closed_form_exact,
    alpha_table,
    alpha_threshold,
    apply_transposition,
    bipartition_spectrum,
    dicke_state,
    fidelity_pure,
    flip_all,
    schmidt_lambda,
    schmidt_spectrum_oracle,
)
from certification.errors import InputError
from certification.sim import basis_state


def test_dicke_state_support_and_amplitudes():
    psi = dicke_state(DickeSpec(4, 1))
    support = np.flatnonzero(np.abs(psi) > 0)
    assert sorted(support.tolist()) == [1, 2, 4, 8]
    np.testing.assert_allclose(psi[support], 0.5)
    assert np.linalg.norm(psi) == pytest.approx(1.0)


def test_dicke_spec_bounds():
    with pytest.raises(InputError):
        DickeSpec(3, 4)
    with pytest.raises(InputError):
        DickeSpec(0, 0)


def test_fidelity_pure():
    spec = DickeSpec(5, 2)
    assert fidelity_pure(dicke_state(spec), spec) == pytest.approx(1.0)
    assert fidelity_pure(basis_state("11000"), spec) == pytest.approx(1 / 10)
    assert fidelity_pure(basis_state("11100"), spec) == pytest.approx(0.0)


def test_schmidt_lambda_values():
    spec = DickeSpec(4, 1)
    assert schmidt_lambda(spec, 2, 0) == pytest.approx(0.5)
    assert schmidt_lambda(spec, 1, 1) == pytest.approx(0.25)
    # beta outside [max(0, k-b), min(a, k)]
    assert schmidt_lambda(spec, 1, 2) == 0.0
    with pytest.raises(InputError):
        schmidt_lambda(spec, 4, 0)


def test_bipartition_spectrum_sums_to_one():
    for n, k in ((5, 2), (8, 3), (9, 7)):
        spec = DickeSpec(n, k)
        for a in range(1, n):
            assert sum(bipartition_spectrum(spec, a).lambdas.values()) == pytest.approx(1.0)


@pytest.mark.parametrize(
    ("n", "k", "expected"),
    [(7, 3, Fraction(4, 7)), (4, 1, Fraction(3, 4)), (4, 2, Fraction(2, 3)), (6, 5, Fraction(5, 6)), (10, 5, Fraction(5, 9))],
)
def test_closed_form_spot_values(n, k, expected):
    assert alpha_closed_form_exact(DickeSpec(n, k)) == expected


def test_closed_form_matches_bruteforce():
    for n in range(3, 11):
        for k in range(1, n):
            spec = DickeSpec(n, k)
            assert alpha_closed_form_exact(spec) == alpha_bruteforce_exact(spec), (n, k)


def test_bruteforce_matches_svd_oracle():
    for n in range(2, 9):
        for k in range(0, n + 1):
            spec = DickeSpec(n, k)
            psi = dicke_state(spec)
            oracle = max(schmidt_spectrum_oracle(psi, a).max() for a in range(1, n))
            assert alpha_bruteforce(spec) == pytest.approx(oracle, abs=1e-10), (n, k)


def test_oracle_spectrum_matches_lambdas():
    spec = DickeSpec(6, 2)
    psi = dicke_state(spec)
    for a in range(1, 6):
        oracle = sorted(v for v in schmidt_spectrum_oracle(psi, a) if v > 1e-12)
        lambdas = sorted(v for v in bipartition_spectrum(spec, a).lambdas.values() if v > 0)
        np.testing.assert_allclose(oracle, lambdas, atol=1e-10)


def test_threshold_small_n_uses_bruteforce():
    w2 = alpha_threshold(DickeSpec(2, 1))
    assert w2.method == "bruteforce"
    assert w2.value == pytest.approx(0.5)
    # The balanced closed form does not describe n = 2.
    assert alpha_closed_form(DickeSpec(2, 1)) == pytest.approx(1.0)
    assert alpha_threshold(DickeSpec(3, 1)).value == pytest.approx(2 / 3)
    assert alpha_threshold(DickeSpec(7, 3)).method == "closed-form"


def test_product_sector_is_vacuous():
    for spec in (DickeSpec(5, 0), DickeSpec(5, 5)):
        alpha = alpha_threshold(spec)
        assert alpha.vacuous
        assert alpha.value == 1.0
        with pytest.raises(InputError):
            alpha_closed_form(spec)


def test_alpha_table_rows():
    rows = alpha_table([2, 4], [0, 1, 2, 3])
    by_key = {(r["n"], r["k"]): r for r in rows}
    assert (2, 3) not in by_key
    assert by_key[(4, 2)]["closed_form"] == "2/3"
    assert by_key[(4, 2)]["agree"] is True
    assert by_key[(4, 0)]["closed_form"] is None
    assert by_key[(2, 1)]["agree"] is False


def test_transposition_invariance():
    rng = np.random.default_rng(5)
    for n, k in ((4, 1), (6, 3), (7, 2)):
        psi = dicke_state(DickeSpec(n, k))
        for _ in range(10):
            i, j = (int(q) for q in rng.choice(n, size=2, replace=False))
            np.testing.assert_allclose(apply_transposition(psi, i, j), psi, atol=1e-12)


def test_transposition_moves_bits():
    moved = apply_transposition(basis_state("100"), 0, 2)
    np.testing.assert_allclose(moved, basis_state("001"))


def test_flip_duality():
    for n in range(2, 8):
        for k in range(n + 1):
            np.testing.assert_allclose(
                flip_all(dicke_state(DickeSpec(n, k))), dicke_state(DickeSpec(n, n - k)), atol=1e-12
            )
            assert alpha_bruteforce_exact(DickeSpec(n, k)) == alpha_bruteforce_exact(DickeSpec(n, n - k))
