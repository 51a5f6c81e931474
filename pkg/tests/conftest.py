"""Shared oracles and fixtures.

The spectral oracle is deliberately independent of LAPACK: an exact
rational characteristic polynomial (Faddeev-LeVerrier over Fractions)
whose roots are found by mpmath at 50 digits.
"""
from __future__ import annotations

from fractions import Fraction

import mpmath
import numpy as np
import pytest

from averlearn.matrix_core import parse_fraction


def exact_matrix(M) -> list[list[Fraction]]:
    return [[v if isinstance(v, Fraction) else (parse_fraction(v) if isinstance(v, str) else Fraction(float(v)))
             for v in row] for row in M]


def charpoly(M) -> list[Fraction]:
    """Coefficients of det(xI - M), leading first."""
    M = exact_matrix(M)
    n = len(M)
    ident = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]

    def mul(X, Y):
        return [[sum(X[i][k] * Y[k][j] for k in range(n)) for j in range(n)] for i in range(n)]

    coeffs = [Fraction(1)]
    Mk = [[Fraction(0)] * n for _ in range(n)]
    c = Fraction(1)
    for k in range(1, n + 1):
        Mk = mul(M, [[Mk[i][j] + c * ident[i][j] for j in range(n)] for i in range(n)])
        c = -sum(Mk[i][i] for i in range(n)) / k
        coeffs.append(c)
    return coeffs


def oracle_eigenvalues(M) -> list[complex]:
    with mpmath.workdps(50):
        coeffs = [mpmath.mpf(c.numerator) / c.denominator for c in charpoly(M)]
        if len(coeffs) == 2:
            return [complex(-coeffs[1])]
        roots = mpmath.polyroots(coeffs, maxsteps=500, extraprec=200)
        return [complex(r) for r in roots]


def oracle_spectral_radius(M) -> float:
    return max(abs(z) for z in oracle_eigenvalues(M))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_substochastic(rng, n: int, sparsity: float = 0.5, deficit_prob: float = 0.3) -> np.ndarray:
    """Nonnegative matrix with row sums in (0, 1], some rows deficient."""
    M = rng.random((n, n)) * (rng.random((n, n)) > sparsity)
    for i in range(n):
        if M[i].sum() == 0:
            M[i, rng.integers(n)] = 1.0
    M /= M.sum(axis=1, keepdims=True)
    scale = np.where(rng.random(n) < deficit_prob, rng.uniform(0.3, 0.99, n), 1.0)
    return M * scale[:, None]


def random_stochastic(rng, n: int, sparsity: float = 0.3) -> np.ndarray:
    M = rng.random((n, n)) * (rng.random((n, n)) > sparsity)
    for i in range(n):
        if M[i].sum() == 0:
            M[i, rng.integers(n)] = 1.0
    return M / M.sum(axis=1, keepdims=True)


CHAIN_A = [[1, 0, 0, 0, 0], ["1/2", 0, "1/2", 0, 0], [0, 0, 0, 1, 0], [0, 0, 0, 0, 1], [0, "1/4", 0, 0, "3/4"]]
CHAIN_E_SINK = ["1/2", 0, 0, 0, 0]
CHAIN_E_TAIL = [0, 0, 0, 0, "1/2"]
DELAYED_B = [["1/3", "2/3", 0, 0], [0, 0, 1, 0], ["3/4", 0, 0, "1/4"], [0, "1/5", 0, "2/5"]]
PAIR_A = [["3/5", "2/5"], ["2/3", "1/3"]]
PAIR_E = [0, "2/3"]
TINY_A = [[Fraction(1, 2**100), Fraction(2**100 - 1, 2**100)], ["1/2", "1/2"]]
TINY_E = ["1/2", "1/3"]
ASYM_A = [["1/5", 0, "4/5"], [1, 0, 0], [0, "1/5", "4/5"]]
ASYM_E = ["1/2", 0, 2]


def as_float(M) -> np.ndarray:
    return np.array([[float(v) for v in row] for row in exact_matrix(M)])


def as_float_vec(v) -> np.ndarray:
    return np.array([float(x if isinstance(x, Fraction) else parse_fraction(x) if isinstance(x, str) else x)
                     for x in v])


def minus_diag(A, E) -> list[list[Fraction]]:
    A = exact_matrix(A)
    E = [x if isinstance(x, Fraction) else parse_fraction(x) if isinstance(x, str) else Fraction(x) for x in E]
    return [[A[i][j] - (E[i] if i == j else 0) for j in range(len(A))] for i in range(len(A))]


# acceptance lines, echoed again in the terminal summary
ACCEPTANCE_LINES: dict[str, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES, key=lambda k: (int(k.split(".")[0]), k)):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
