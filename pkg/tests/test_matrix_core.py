from fractions import Fraction
import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra import numpy as hnp

from averlearn.errors import (
    DimensionTooLarge,
    InvalidMatrix,
    NotSubstochastic,
)
from averlearn.matrix_core import (
    PowerVerdict,
    RowClass,
    as_matrix,
    as_rates,
    classify_rows,
    decompose_substochastic,
    decompose_substochastic_exact,
    deficient_rows,
    gershgorin_bound,
    induced_norm,
    inf_to_1_upper_bound,
    learning_mass,
    matrix_power_limit,
    mixed_norm_1_to_inf,
    mixed_norm_inf_to_1,
    parse_fraction,
    recompose,
    spectral_radius,
)

from conftest import (
    CHAIN_A,
    CHAIN_E_TAIL,
    as_float,
    minus_diag,
    oracle_spectral_radius,
    random_substochastic,
)

small_matrices = hnp.arrays(
    np.float64,
    st.integers(1, 5).map(lambda n: (n, n)),
    elements=st.floats(-3, 3, allow_nan=False, allow_infinity=False),
)


def test_parse_fraction_exact():
    assert parse_fraction("2/5") == Fraction(2, 5)
    assert parse_fraction(" -3/4 ") == Fraction(-3, 4)
    assert parse_fraction(0.5) == Fraction(1, 2)
    for bad in ("1/0", "abc", True, float("nan"), None):
        with pytest.raises(InvalidMatrix):
            parse_fraction(bad)


def test_as_matrix_rejects_bad_shapes():
    for bad in ([[1, 2]], [1, 2], [[1, float("inf")], [0, 1]], []):
        with pytest.raises(InvalidMatrix):
            as_matrix(bad)
    assert as_matrix([["1/3", 0], [0, 1]])[0, 0] == 1 / 3


def test_rates_must_be_nonnegative():
    with pytest.raises(InvalidMatrix):
        as_rates([0.1, -0.1])


def test_classification():
    assert classify_rows(np.eye(3)) is RowClass.ROW_STOCHASTIC
    assert classify_rows(as_float(minus_diag(CHAIN_A, CHAIN_E_TAIL))) is RowClass.PROPER_SUBSTOCHASTIC
    assert classify_rows([[1.5, 0], [0, 1]]) is RowClass.GENERAL
    assert classify_rows([[-0.1, 1.1], [0, 1]]) is RowClass.GENERAL
    assert list(deficient_rows([[0.5, 0.2], [0.3, 0.7]])) == [True, False]


def test_decompose_example():
    B = [["1/3", "2/3", 0, 0], [0, 0, 1, 0], ["3/4", 0, 0, "1/4"], [0, "1/5", 0, "2/5"]]
    A, E = decompose_substochastic(B)
    assert np.allclose(E, [0, 0, 0, 0.4], atol=1e-15)
    assert A[3, 3] == pytest.approx(0.8, abs=1e-15)
    assert np.array_equal(recompose(A, E), as_matrix(B))


def test_decompose_rejects_general():
    with pytest.raises(NotSubstochastic):
        decompose_substochastic([[0.9, 0.2], [0, 1]])


def test_decompose_roundtrip_random(rng):
    exact = within_ulp = 0
    for _ in range(400):
        n = int(rng.integers(1, 7))
        B = random_substochastic(rng, n)
        A, E = decompose_substochastic(B)
        assert np.abs(A.sum(axis=1) - 1).max() < 1e-12
        assert np.all(E >= 0)
        off = ~np.eye(n, dtype=bool)
        assert np.array_equal(A[off], B[off])
        R = recompose(A, E)
        assert np.array_equal(R[off], B[off])
        # the diagonal is within one ulp of the rebuilt self-weight
        gap = np.abs(np.diag(R) - np.diag(B))
        assert np.all(gap <= np.spacing(np.diag(A)))
        exact += np.array_equal(R, B)
        within_ulp += 1
    # most draws are reproduced bit for bit
    assert exact > within_ulp // 2


def test_decompose_exact_roundtrip(rng):
    for _ in range(100):
        n = int(rng.integers(1, 6))
        B = [[Fraction(int(rng.integers(0, 5)), 20) for _ in range(n)] for _ in range(n)]
        A, E = decompose_substochastic_exact(B)
        for i in range(n):
            assert sum(A[i]) == 1
            for j in range(n):
                assert A[i][j] - (E[i] if i == j else 0) == B[i][j]


def test_induced_norms_against_definition(rng):
    for _ in range(50):
        M = rng.normal(size=(4, 4))
        assert induced_norm(M, np.inf) == pytest.approx(np.linalg.norm(M, np.inf))
        assert induced_norm(M, 1) == pytest.approx(np.linalg.norm(M, 1))
    with pytest.raises(ValueError):
        induced_norm(np.eye(2), 2)


@settings(max_examples=60, deadline=None)
@given(small_matrices)
def test_inf_to_1_matches_brute_force(M):
    n = M.shape[0]
    brute = max(np.abs(M @ np.array(s)).sum() for s in itertools.product((-1.0, 1.0), repeat=n))
    assert mixed_norm_inf_to_1(M) == pytest.approx(brute, rel=1e-12, abs=1e-12)
    assert mixed_norm_1_to_inf(M) == np.abs(M).max()


def test_inf_to_1_cap():
    with pytest.raises(DimensionTooLarge):
        mixed_norm_inf_to_1(np.eye(5), cap=4)


def test_inf_to_1_upper_bound_holds(rng):
    for _ in range(200):
        n = int(rng.integers(1, 7))
        A = rng.random((n, n))
        A /= A.sum(axis=1, keepdims=True)
        E = rng.uniform(0, 2.5, n)
        assert mixed_norm_inf_to_1(recompose(A, E)) <= inf_to_1_upper_bound(A, E) + 1e-12
        assert inf_to_1_upper_bound(A, E) == pytest.approx(A.shape[0] - learning_mass(A, E))


def test_spectral_radius_matches_oracle(rng):
    for _ in range(30):
        n = int(rng.integers(1, 6))
        M = rng.integers(-4, 5, size=(n, n)) / 4
        assert spectral_radius(M) == pytest.approx(oracle_spectral_radius(M.tolist()), abs=1e-9)


def test_complex_dominant_pair():
    rot = [[0.0, -0.9], [0.9, 0.0]]
    assert spectral_radius(rot) == pytest.approx(0.9, abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(small_matrices)
def test_gershgorin_dominates_spectrum(M):
    assert spectral_radius(M) <= gershgorin_bound(M) * (1 + 1e-12) + 1e-12
    assert spectral_radius(M) <= induced_norm(M, np.inf) * (1 + 1e-12) + 1e-12


def test_power_limit_zero_convergent():
    res = matrix_power_limit([[0.5, 0.25], [0, 0.5]])
    assert res.verdict is PowerVerdict.ZERO_CONVERGENT
    assert np.abs(res.limit).max() < 1e-9


def test_power_limit_oscillation_periods():
    swap = matrix_power_limit([[0, 1], [1, 0]])
    assert swap.verdict is PowerVerdict.OSCILLATING and swap.period == 2
    cycle = np.roll(np.eye(4), 1, axis=1)
    res = matrix_power_limit(cycle)
    assert res.verdict is PowerVerdict.OSCILLATING and res.period == 4


def test_power_limit_diverging():
    assert matrix_power_limit([[1, 1], [0, 1]]).verdict is PowerVerdict.DIVERGING
    assert matrix_power_limit([[1.01]]).verdict is PowerVerdict.DIVERGING


def test_power_limit_slow_mixing_uses_acceleration():
    # second eigenvalue 0.999: the linear phase alone cannot settle
    M = np.array([[0.9995, 0.0005], [0.0005, 0.9995]])
    res = matrix_power_limit(M)
    assert res.verdict is PowerVerdict.CONVERGED
    assert np.allclose(res.limit, 0.5, atol=1e-9)


def test_power_limit_stochastic_projector(rng):
    for _ in range(20):
        n = int(rng.integers(2, 6))
        M = rng.random((n, n)) + 0.05
        M /= M.sum(axis=1, keepdims=True)
        res = matrix_power_limit(M)
        assert res.verdict is PowerVerdict.CONVERGED
        P = res.limit
        assert np.allclose(P @ M, P, atol=1e-9)
        assert np.allclose(P, np.linalg.matrix_power(M, 2000), atol=1e-9)
        assert math.isclose(P.sum(axis=1).max(), 1, abs_tol=1e-9)


def test_power_limit_small_settled_iterate_is_zero():
    # differences drop below tol while the entries are still about 1e-12
    res = matrix_power_limit([[0.6]])
    assert res.verdict is PowerVerdict.ZERO_CONVERGENT
    res = matrix_power_limit([[0.3, 0.3], [0.2, 0.4]])
    assert res.verdict is PowerVerdict.ZERO_CONVERGENT
