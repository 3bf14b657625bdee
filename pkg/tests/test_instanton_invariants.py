import warnings
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from fano_instantons.chow_core import ChowClass, chern_from_ch, euler_char, euler_pair, load_registry, prime_fano, threefold
from fano_instantons.instanton_invariants import (
    INDEX1_GAMMA_CLAIM,
    Q_GAMMA_CLAIM,
    LowGenusWarning,
    NotAnInstantonCharacter,
    admissibility_report,
    character_display_audit,
    charge_from_c2,
    check_instanton_character,
    coker_character,
    curve_character,
    decompose,
    default_grid,
    elementary_transform_character,
    gamma,
    min_charge,
    minimal_character,
    minimal_character_oracle,
    moduli_dimension,
    printed_gamma_index1,
    printed_gamma_quadric,
    serre_character,
)

REGISTRY = load_registry()
NAMES = sorted(REGISTRY)


def main_theorem_k0(X, n):
    """Minimal charges as listed for each index."""
    if X.index == 4:
        return (n + 1) // 2
    if X.index == 3:
        return (n + 2) // 3
    if X.index == 2:
        return n
    if n == 1:
        return 0
    return 1 if X.genus % 2 else n


def test_minimal_characters():
    assert minimal_character(threefold("P3")) == ChowClass(1)
    assert minimal_character(threefold("Y3")) == ChowClass(1)
    # spinor bundle: c1 = -1, c2 = one line
    assert minimal_character(threefold("Q")) == ChowClass(2, -1, 0, Fraction(1, 6))
    assert minimal_character(threefold("X12")) == ChowClass(2, -1, 4, Fraction(-1, 6))
    assert chern_from_ch(minimal_character(threefold("X9")), threefold("X9"))[1] == 6


@pytest.mark.parametrize("name", NAMES)
def test_minimal_character_oracle(name):
    X = REGISTRY[name]
    report = minimal_character_oracle(X)
    assert report["duality"]
    assert report["chi"] == (1 if X.index % 2 == 0 else 0)
    # odd genus minimal bundles move in a curve, so they are not rigid
    assert report["self_pairing"] == (0 if X.index == 1 and X.genus % 2 else 1)
    assert report["integral_chern"]


def test_projective_space_display():
    X = threefold("P3")
    for n in range(1, 7):
        for k in range(11):
            assert gamma(X, n, k).character == ChowClass(n, 0, -k, 0)


def test_quadric_character_by_hand():
    # -k ch(O_l) with chi(O_l) = 1 contributes k/2 to ch3 on Q
    Q = threefold("Q")
    assert gamma(Q, 2, 3).character == ChowClass(4, -2, -3, Fraction(1, 3) + Fraction(3, 2))


@pytest.mark.parametrize("name", NAMES)
def test_duality_condition_on_grid(name):
    X = REGISTRY[name]
    for n, k in default_grid(X):
        assert check_instanton_character(gamma(X, n, k).character, X)


@given(st.sampled_from(NAMES), st.integers(1, 12), st.integers(0, 30))
def test_decompose_roundtrip(name, n, k):
    X = REGISTRY[name]
    assert decompose(gamma(X, n, k).character, X) == (n, k)


def test_decompose_rejects():
    X = threefold("Q")
    with pytest.raises(NotAnInstantonCharacter):
        decompose(ChowClass(3, -1, 0, 0), X)
    with pytest.raises(NotAnInstantonCharacter):
        decompose(ChowClass(2, -1, 0, 0), X)
    with pytest.raises(ValueError):
        gamma(X, 0, 1)


@pytest.mark.parametrize("name", NAMES)
def test_min_charge_matches_listed_values(name):
    X = REGISTRY[name]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", LowGenusWarning)
        for n in range(1, 9):
            assert min_charge(X, n) == main_theorem_k0(X, n)


def test_low_genus_warning():
    with pytest.warns(LowGenusWarning):
        min_charge(threefold("X3"), 2)


@pytest.mark.parametrize("name", NAMES)
def test_admissibility_thresholds(name):
    X = REGISTRY[name]
    for n, k in default_grid(X, 4, 6):
        for rec in admissibility_report(X, n, k):
            assert rec.ok, rec


def test_admissibility_bound_text():
    recs = admissibility_report(threefold("P3"), 3, 1)
    assert recs[0].engine_value == 2
    assert "violated" in recs[0].note


@pytest.mark.parametrize("name", NAMES)
def test_moduli_dimension_closed_forms(name):
    X = REGISTRY[name]
    for n, k in default_grid(X):
        dim, rec = moduli_dimension(X, n, k)
        assert rec.ok
        assert dim == 1 - euler_pair(gamma(X, n, k).character, gamma(X, n, k).character, X)


@pytest.mark.parametrize("name", ["P3", "Y1", "Y2", "Y3", "Y4", "Y5"])
def test_cokernel_dimension_even_index(name):
    X = REGISTRY[name]
    for n, k in default_grid(X):
        assert coker_character(X, n, k)[2].ok


def test_cokernel_dimension_quadric():
    Q = threefold("Q")
    for n, k in default_grid(Q):
        C, dim, rec = coker_character(Q, n, k)
        assert dim == n * (4 - n) + k * (6 * n - 3)
        assert rec.paper_value == n * (4 - n) + k * (6 * n - 1)
        assert rec.ok == (k == 0)


def test_cokernel_requires_index_two():
    with pytest.raises(ValueError):
        coker_character(threefold("X7"), 1, 1)


@pytest.mark.parametrize("name", ["Q", "X4", "X7", "X9", "X12"])
def test_charge_relation(name):
    X = REGISTRY[name]
    for n, k in default_grid(X):
        c2 = chern_from_ch(gamma(X, n, k).character, X)[1]
        assert charge_from_c2(X, n, c2) == k


def test_thooft_character_from_disjoint_lines():
    X = threefold("P3")
    for k in range(1, 8):
        assert serre_character(X, k + 1, -k) == ChowClass(2, 0, -k, 0)


def test_curve_character_conic():
    assert euler_char(curve_character(2, 0, threefold("X9")), threefold("X9")) == 1


def test_elementary_transform_raises_charge():
    X = threefold("Y4")
    assert elementary_transform_character(gamma(X, 2, 3).character, 2, X) == gamma(X, 2, 5).character


def test_quadric_display_audit():
    Q = threefold("Q")
    recs = {r.claim: r for r in character_display_audit(Q, 2, 1)}
    assert not recs[Q_GAMMA_CLAIM].ok
    assert recs[f"{Q_GAMMA_CLAIM}: ch2"].ok
    assert not recs[f"{Q_GAMMA_CLAIM}: ch3"].ok
    printed = printed_gamma_quadric(2, 1)
    assert not check_instanton_character(printed, Q)
    assert euler_char(printed, Q).denominator != 1


def test_index_one_display_audit():
    X = threefold("X12")
    recs = {r.claim: r for r in character_display_audit(X, 1, 0)}
    assert recs[f"{INDEX1_GAMMA_CLAIM}: ch2"].paper_value == 3
    assert recs[f"{INDEX1_GAMMA_CLAIM}: ch2"].engine_value == 4
    assert recs[f"{INDEX1_GAMMA_CLAIM}: ch3"].ok
    recs = {r.claim: r for r in character_display_audit(X, 2, 0)}
    assert not recs[f"{INDEX1_GAMMA_CLAIM}: ch3"].ok
    assert not check_instanton_character(printed_gamma_index1(X, 1, 0), X)


def test_even_index_display_matches():
    for rec in character_display_audit(threefold("Y2"), 3, 4):
        assert rec.ok


def test_euler_identities_all_genera():
    for g in range(4, 13):
        X = prime_fano(g)
        F0 = minimal_character(X)
        delta = g % 2
        for n in range(1, 7):
            for k in range(11):
                E = gamma(X, n, k).character
                assert euler_char(E, X) == 0
                assert euler_pair(E, F0, X) == (1 - delta) * n - k
