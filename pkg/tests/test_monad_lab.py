import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fano_instantons.monad_lab import (
    DegenerateLine,
    Field,
    InvalidMonad,
    MonadInstance,
    SamplingExhausted,
    chi_consistent,
    cohomology_table,
    dim_s,
    instanton_vanishing_check,
    is_trivial_on_line,
    line_splitting,
    monad_cohomology,
    multiplication_matrix,
    sample_monad,
    splitting_statistics,
    validate_monad,
)


def null_correlation(field="QQ") -> MonadInstance:
    """O(-1) -> O^4 -> O(1) with A = (x0, x1, x2, x3) and B = (-x1, x0, -x3, x2)."""
    A = np.zeros((4, 1, 4), dtype=object)
    for i in range(4):
        A[i, 0, i] = 1
    B = np.zeros((1, 4, 4), dtype=object)
    B[0, 0, 1], B[0, 1, 0], B[0, 2, 3], B[0, 3, 2] = -1, 1, -1, 1
    return MonadInstance(2, 1, A, B, 0, Field.parse(field))


def test_dimensions_of_polynomial_spaces():
    assert [dim_s(d) for d in (-1, 0, 1, 2, 3)] == [0, 1, 4, 10, 20]
    M = null_correlation()
    assert multiplication_matrix(M.B, 1).shape == (dim_s(2), 4 * dim_s(1))


def test_null_correlation_is_valid():
    assert validate_monad(null_correlation()).ok


def test_null_correlation_cohomology():
    M = null_correlation()
    assert monad_cohomology(M, 1) == (5, 0, 0, 0)
    assert monad_cohomology(M, 0) == (0, 0, 0, 0)
    assert monad_cohomology(M, -1) == (0, 1, 0, 0)
    assert monad_cohomology(M, -2) == (0, 0, 0, 0)
    assert monad_cohomology(M, -3) == (0, 0, 1, 0)
    assert monad_cohomology(M, -5) == (0, 0, 0, 5)
    assert all(chi_consistent(M).values())


def omega(P, Q):
    return P[0] * Q[1] - P[1] * Q[0] + P[2] * Q[3] - P[3] * Q[2]


@pytest.mark.parametrize(
    "line",
    [
        ((1, 0, 0, 0), (0, 1, 0, 0)),
        ((1, 0, 0, 0), (0, 0, 1, 0)),
        ((1, 2, 0, 1), (0, 1, 1, 3)),
        ((1, 2, 0, 1), (0, 1, 3, 4)),
        ((2, -1, 5, 0), (1, 1, -3, 7)),
    ],
)
def test_null_correlation_jumping_lines(line):
    # jumping lines are exactly the lines isotropic for the form defining B
    M = null_correlation()
    expected = (1, -1) if omega(*line) == 0 else (0, 0)
    assert line_splitting(M, line) == expected
    assert is_trivial_on_line(M, line) == (expected == (0, 0))


def test_null_correlation_over_prime_field():
    M = null_correlation("GF")
    assert monad_cohomology(M, 1) == (5, 0, 0, 0)
    assert line_splitting(M, ((1, 0, 0, 0), (0, 0, 1, 0))) == (1, -1)


def test_degenerate_line():
    with pytest.raises(DegenerateLine):
        line_splitting(null_correlation(), ((1, 2, 3, 4), (2, 4, 6, 8)))


def test_field_parsing():
    assert Field.parse("QQ").p is None
    assert Field.parse("GF").p == 2**31 - 1
    assert Field.parse(("GF", 101)).p == 101
    assert str(Field.parse(("GF", 101))) == "GF(101)"
    with pytest.raises(ValueError):
        Field.parse("RR")


@pytest.mark.parametrize("n, k", [(2, 1), (2, 2), (3, 2), (4, 2)])
def test_sampled_monads_validate(n, k):
    M = sample_monad(n, k, seed=0)
    assert validate_monad(M).ok
    ok, report = instanton_vanishing_check(M)
    assert ok, report
    assert all(chi_consistent(M).values())


def test_sampling_over_prime_field():
    M = sample_monad(3, 2, seed=1, field="GF")
    assert M.field.p == 2**31 - 1
    assert validate_monad(M).ok
    assert instanton_vanishing_check(M)[0]


def test_sampling_is_deterministic():
    a = sample_monad(3, 2, seed=5)
    b = sample_monad(3, 2, seed=5)
    assert a == b
    assert json.dumps(a.to_json(), sort_keys=True) == json.dumps(b.to_json(), sort_keys=True)
    assert sample_monad(3, 2, seed=6) != a


def test_json_roundtrip_and_hash():
    M = sample_monad(2, 2, seed=3)
    data = json.loads(json.dumps(M.to_json()))
    assert MonadInstance.from_json(data) == M
    assert data["hash"] == MonadInstance.from_json(data).to_json()["hash"]
    data["seed"] = 4
    assert MonadInstance.from_json(data).to_json()["hash"] != M.to_json()["hash"]


def test_sampling_rejects_out_of_range():
    with pytest.raises(ValueError):
        sample_monad(0, 1)
    with pytest.raises(ValueError):
        sample_monad(4, 1)


def test_sampling_exhausted():
    with pytest.raises(SamplingExhausted):
        sample_monad(2, 1, max_attempts=0)


def test_repeated_row_fails_surjectivity():
    M = sample_monad(2, 2, seed=0)
    B = M.B.copy()
    B[1] = B[0]
    report = validate_monad(MonadInstance(M.n, M.k, M.A, B, M.seed, M.field))
    assert report.composition and not report.surjective and not report.ok


def test_zero_map_fails_injectivity():
    M = sample_monad(2, 2, seed=0)
    report = validate_monad(MonadInstance(M.n, M.k, 0 * M.A, M.B, M.seed, M.field))
    assert not report.injective and not report.ok


def test_nonzero_composition_rejected():
    M = null_correlation()
    B = M.B.copy()
    B[0, 0, 1] = 1
    bad = MonadInstance(2, 1, M.A, B, 0, M.field)
    assert not validate_monad(bad).composition
    with pytest.raises(InvalidMonad):
        monad_cohomology(bad, 0)


def test_very_negative_twists_vanish_in_low_degrees():
    M = sample_monad(2, 1, seed=0)
    for t, h in cohomology_table(M, range(-8, -2)).items():
        assert h[0] == h[1] == 0


def test_general_line_is_trivial():
    M = sample_monad(3, 2, seed=0)
    stats = splitting_statistics(M, 40)
    assert stats.get("0,0,0", 0) >= 36


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from([(2, 1), (2, 2), (3, 2)]), st.integers(-4, 2))
def test_euler_characteristic_property(seed, nk, t):
    M = sample_monad(*nk, seed=seed)
    h = monad_cohomology(M, t)
    assert all(x >= 0 for x in h)
    assert chi_consistent(M, [t])[t]
