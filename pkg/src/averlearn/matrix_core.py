"""Dense matrix utilities for averaging-plus-learning systems.

Matrices are plain ``numpy.ndarray`` objects of shape ``(n, n)``; learning
rates are length-``n`` vectors holding the diagonal of the learning matrix.
Everything here is a pure function of its inputs.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

import numpy as np

from .errors import (
    DimensionTooLarge,
    Inconclusive,
    InvalidMatrix,
    NotSubstochastic,
    NumericalFailure,
)

STOCH_TOL = 1e-12
SPECTRAL_TOL = 1e-9
INF_TO_1_CAP = 22
OSCILLATION_WINDOW = 8


class RowClass(enum.Enum):
    ROW_STOCHASTIC = "RowStochastic"
    PROPER_SUBSTOCHASTIC = "ProperSubstochastic"
    GENERAL = "General"


# -- parsing and validation -------------------------------------------------

def parse_fraction(value) -> Fraction:
    """Parse ``"p/q"`` strings, ints and floats exactly."""
    if isinstance(value, bool):
        raise InvalidMatrix(f"boolean is not a number: {value!r}")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, float)):
        if isinstance(value, float) and not math.isfinite(value):
            raise InvalidMatrix(f"non-finite value {value!r}")
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise InvalidMatrix(f"cannot parse number {value!r}") from exc
    raise InvalidMatrix(f"cannot parse number {value!r}")


def parse_number(value) -> float:
    return float(parse_fraction(value))


def as_matrix(M) -> np.ndarray:
    """Return ``M`` as a finite square float array or raise InvalidMatrix."""
    if isinstance(M, np.ndarray) and M.dtype.kind == "f":
        arr = M.astype(float, copy=False)
    else:
        rows = np.asarray(M, dtype=object)
        if rows.ndim != 2:
            raise InvalidMatrix(f"expected a 2-D array, got ndim={rows.ndim}")
        arr = np.array([[parse_number(x) for x in row] for row in rows], dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] == 0:
        raise InvalidMatrix(f"expected a non-empty square matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidMatrix("matrix has non-finite entries")
    return arr


def as_vector(v, n: int | None = None) -> np.ndarray:
    arr = np.asarray(v)
    if arr.dtype.kind not in "fiu":
        arr = np.array([parse_number(x) for x in np.ravel(arr)], dtype=float)
    arr = np.asarray(arr, dtype=float).ravel()
    if n is not None and arr.size != n:
        raise InvalidMatrix(f"expected a vector of length {n}, got {arr.size}")
    if not np.all(np.isfinite(arr)):
        raise InvalidMatrix("vector has non-finite entries")
    return arr


def as_rates(E, n: int | None = None) -> np.ndarray:
    """Learning rates: the nonnegative diagonal of the learning matrix."""
    rates = as_vector(E, n)
    if np.any(rates < 0):
        raise InvalidMatrix("learning rates must be nonnegative")
    return rates


def fraction_matrix(rows: Iterable[Iterable]) -> list[list[Fraction]]:
    return [[parse_fraction(x) for x in row] for row in rows]


# -- classification and decomposition ---------------------------------------

def classify_rows(M, stoch_tol: float = STOCH_TOL) -> RowClass:
    M = as_matrix(M)
    if stoch_tol <= 0:
        raise ValueError("stoch_tol must be positive")
    if np.any(M < 0):
        return RowClass.GENERAL
    sums = M.sum(axis=1)
    if np.any(sums > 1 + stoch_tol):
        return RowClass.GENERAL
    if np.all(np.abs(sums - 1) <= stoch_tol):
        return RowClass.ROW_STOCHASTIC
    return RowClass.PROPER_SUBSTOCHASTIC


def is_row_stochastic(M, stoch_tol: float = STOCH_TOL) -> bool:
    return classify_rows(M, stoch_tol) is RowClass.ROW_STOCHASTIC


def is_substochastic(M, stoch_tol: float = STOCH_TOL) -> bool:
    return classify_rows(M, stoch_tol) is not RowClass.GENERAL


def deficient_rows(B, stoch_tol: float = STOCH_TOL) -> np.ndarray:
    """Boolean mask of rows whose sum is strictly below one."""
    B = as_matrix(B)
    return B.sum(axis=1) < 1 - stoch_tol


def _split_diagonal(b: float, deficit: float) -> tuple[float, float]:
    # Look for floats a, e near (b + deficit, deficit) with a - e == b exactly.
    # Not always possible: when a and e share a coarser binade than b the
    # difference cannot carry b's last bit, so keep the closest pair seen,
    # which is off by less than one ulp of a.
    a0 = b + deficit
    best = (math.inf, a0, max(a0 - b, 0.0))
    for radius in range(0, 4):
        for a in _ulp_neighbours(a0, radius):
            e = a - b
            for e2 in (e, *_ulp_neighbours(e, 1)):
                if e2 < 0:
                    continue
                gap = abs((a - e2) - b)
                if gap == 0:
                    return a, e2
                if gap < best[0]:
                    best = (gap, a, e2)
    return best[1], best[2]


def _ulp_neighbours(x: float, radius: int):
    if radius == 0:
        yield x
        return
    up = down = x
    for _ in range(radius):
        up = math.nextafter(up, math.inf)
        down = math.nextafter(down, -math.inf)
    yield up
    yield down


def decompose_substochastic(B, stoch_tol: float = STOCH_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Split a row-substochastic ``B`` into ``A - diag(E)``.

    ``A`` is row stochastic and differs from ``B`` only on the diagonal;
    ``E(i)`` is the row deficit ``1 - sum_j B(i, j)``. Rows within
    ``stoch_tol`` of summing to one get a zero rate, and the diagonal split
    is chosen so that ``A - diag(E)`` reproduces ``B`` bit for bit.
    """
    B = as_matrix(B)
    if not is_substochastic(B, stoch_tol):
        raise NotSubstochastic("matrix is not row substochastic")
    n = B.shape[0]
    A = B.copy()
    E = np.zeros(n)
    deficits = 1.0 - B.sum(axis=1)
    for i in range(n):
        if deficits[i] > stoch_tol:
            A[i, i], E[i] = _split_diagonal(float(B[i, i]), float(deficits[i]))
    return A, E


def decompose_substochastic_exact(B) -> tuple[list[list[Fraction]], list[Fraction]]:
    """Rational version of :func:`decompose_substochastic`; the roundtrip is exact."""
    rows = fraction_matrix(B)
    n = len(rows)
    if n == 0 or any(len(r) != n for r in rows):
        raise InvalidMatrix("expected a non-empty square matrix")
    A = [list(r) for r in rows]
    E = [Fraction(0)] * n
    for i, r in enumerate(rows):
        if any(x < 0 for x in r) or sum(r) > 1:
            raise NotSubstochastic(f"row {i + 1} is not substochastic")
        E[i] = 1 - sum(r)
        A[i][i] = r[i] + E[i]
    return A, E


def recompose(A, E) -> np.ndarray:
    """Return ``A - diag(E)``."""
    A = as_matrix(A)
    E = as_vector(E, A.shape[0])
    B = A.copy()
    B[np.diag_indices_from(B)] -= E
    return B


# -- norms ------------------------------------------------------------------

def induced_norm(M, p) -> float:
    M = as_matrix(M)
    if p == 1:
        return float(np.abs(M).sum(axis=0).max())
    if p in (np.inf, math.inf, "inf", "infinity"):
        return float(np.abs(M).sum(axis=1).max())
    raise ValueError(f"unsupported p={p!r}; use 1 or infinity")


def mixed_norm_1_to_inf(M) -> float:
    """The 1 -> infinity operator norm: the largest absolute entry."""
    return float(np.abs(as_matrix(M)).max())


def mixed_norm_inf_to_1(M, cap: int = INF_TO_1_CAP) -> float:
    """Exact infinity -> 1 operator norm by enumerating sign vectors.

    The first sign is pinned to +1 since ``||M(-v)||_1 = ||Mv||_1``, so
    ``2**(n-1)`` vectors are visited. Dimensions above ``cap`` are refused.
    """
    M = as_matrix(M)
    n = M.shape[0]
    if n > cap:
        raise DimensionTooLarge(f"n={n} exceeds enumeration cap {cap}")
    if n == 1:
        return float(abs(M[0, 0]))
    rest = n - 1
    total = 1 << rest
    chunk = 1 << min(rest, 16)
    bits = np.arange(rest, dtype=np.int64)
    best = 0.0
    for start in range(0, total, chunk):
        codes = np.arange(start, min(start + chunk, total), dtype=np.int64)
        signs = 1.0 - 2.0 * ((codes[:, None] >> bits) & 1)
        # M v = M[:, 0] + M[:, 1:] @ signs
        images = signs @ M[:, 1:].T + M[:, 0]
        best = max(best, float(np.abs(images).sum(axis=1).max()))
    return best


def inf_to_1_upper_bound(A, E) -> float:
    """Upper bound ``n - tr A + sum_i |A(i,i) - E(i)|`` on ``||A - E||_{inf->1}``."""
    A = as_matrix(A)
    E = as_vector(E, A.shape[0])
    V = np.abs(np.diag(A) - E)
    return float(A.shape[0] - np.trace(A) + V.sum())


def learning_mass(A, E) -> float:
    """``tr A - sum_i |A(i,i) - E(i)|``, the aggregate margin to the anchoring boundary."""
    A = as_matrix(A)
    E = as_vector(E, A.shape[0])
    d = np.diag(A)
    return float(d.sum() - np.abs(d - E).sum())


# -- spectra ----------------------------------------------------------------

def eigenvalues(M) -> np.ndarray:
    """All (complex) eigenvalues of a dense real matrix.

    Backed by LAPACK ``geev`` (balancing, Hessenberg reduction, shifted QR),
    which handles dominant complex-conjugate pairs.
    """
    M = as_matrix(M)
    try:
        vals = np.linalg.eigvals(M)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"eigenvalue iteration failed: {exc}") from exc
    if not np.all(np.isfinite(vals)):
        raise NumericalFailure("eigenvalue iteration produced non-finite values")
    return vals


def spectral_radius(M, tol: float = SPECTRAL_TOL) -> float:
    if tol <= 0:
        raise ValueError("tol must be positive")
    return float(np.abs(eigenvalues(M)).max())


def gershgorin_bound(M) -> float:
    """Largest modulus reachable inside the union of Gershgorin discs."""
    M = as_matrix(M)
    d = np.abs(np.diag(M))
    radii = np.abs(M).sum(axis=1) - d
    return float((d + radii).max())


# -- power limits -----------------------------------------------------------

class PowerVerdict(enum.Enum):
    CONVERGED = "ConvergedTo"
    ZERO_CONVERGENT = "ZeroConvergent"
    OSCILLATING = "Oscillating"
    DIVERGING = "Diverging"


@dataclass(frozen=True)
class PowerLimit:
    verdict: PowerVerdict
    limit: np.ndarray | None = None
    period: int | None = None
    iterations: int = 0


def _lcm_upto(k: int) -> int:
    out = 1
    for i in range(2, k + 1):
        out = out * i // math.gcd(out, i)
    return out


def matrix_power_limit(
    M,
    tol: float = 1e-12,
    max_iter: int = 10_000,
    window: int = OSCILLATION_WINDOW,
) -> PowerLimit:
    """Classify the behaviour of ``M**k`` as ``k`` grows.

    Two phases. First ``M**k`` is iterated directly for up to ``8 * window``
    steps; the successive-difference test ``||M**(k+1) - M**k||_inf < tol``
    detects convergence, and a ring of the last ``window`` iterates detects
    cycling with period ``2..window``. Slow cases then move to
    ``N = M**L`` with ``L = lcm(1..window)``, squared repeatedly: if
    ``N**(2**j)`` settles on ``P`` and ``P M = P`` the powers of ``M``
    converge to ``P``, while ``P M != P`` means they cycle. Entries above
    ``1/tol`` count as divergence. ``max_iter`` caps the total number of
    matrix products; running out raises ``Inconclusive``.
    """
    M = as_matrix(M)
    if tol <= 0 or max_iter < 1:
        raise ValueError("need tol > 0 and max_iter >= 1")
    blowup = 1.0 / tol
    ring: list[np.ndarray] = [np.eye(M.shape[0])]
    P = M.copy()
    steps = 0
    linear_budget = min(max_iter, 8 * window)
    while steps < linear_budget:
        steps += 1
        if not np.all(np.isfinite(P)) or np.abs(P).max() > blowup:
            return PowerLimit(PowerVerdict.DIVERGING, iterations=steps)
        nxt = P @ M
        if induced_norm(nxt - P, np.inf) < tol:
            return _settled(nxt, tol, steps)
        ring.append(P)
        if len(ring) > window:
            ring.pop(0)
        # ring[-lag] is the iterate lag steps before nxt; a cycle only counts
        # while consecutive iterates still differ materially, otherwise a
        # converging sequence would match at every lag
        if induced_norm(nxt - P, np.inf) >= math.sqrt(tol):
            for lag in range(2, min(window, len(ring)) + 1):
                if induced_norm(nxt - ring[-lag], np.inf) < tol:
                    return PowerLimit(PowerVerdict.OSCILLATING, period=lag, iterations=steps)
        P = nxt

    L = _lcm_upto(window)
    N = np.linalg.matrix_power(M, L)
    steps += max(1, int(math.log2(L)) * 2)
    # squaring doubles the rounding error each time, so the differences
    # bottom out near this floor instead of reaching tol
    floor = max(tol, math.sqrt(np.finfo(float).eps))
    prev_diff = math.inf
    while steps < max_iter:
        steps += 1
        if not np.all(np.isfinite(N)) or np.abs(N).max() > blowup:
            return PowerLimit(PowerVerdict.DIVERGING, iterations=steps)
        N2 = N @ N
        diff = induced_norm(N2 - N, np.inf)
        settled = diff < tol
        if not settled and diff >= prev_diff and prev_diff < floor * max(1.0, np.abs(N).max()):
            settled, N2 = True, N
        if settled:
            check = 10 * floor * max(1.0, np.abs(N2).max())
            if induced_norm(N2 @ M - N2, np.inf) < check:
                return _settled(N2, tol, steps)
            return PowerLimit(PowerVerdict.OSCILLATING, iterations=steps, period=_period_of(N2, M, check, window))
        prev_diff = diff
        N = N2
    raise Inconclusive(f"no verdict on powers within {max_iter} products")


def _settled(P: np.ndarray, tol: float, steps: int) -> PowerLimit:
    # A limit of powers is idempotent. Small differences can also come from
    # an iterate that is still shrinking towards zero, so square until
    # either the entries vanish or P @ P reproduces P.
    for _ in range(64):
        size = np.abs(P).max()
        if size < tol:
            return PowerLimit(PowerVerdict.ZERO_CONVERGENT, limit=np.zeros_like(P), iterations=steps)
        P2 = P @ P
        steps += 1
        if induced_norm(P2 - P, np.inf) <= math.sqrt(tol) * size:
            return PowerLimit(PowerVerdict.CONVERGED, limit=P, iterations=steps)
        P = P2
    raise Inconclusive("settled iterate is neither idempotent nor vanishing")


def _period_of(P: np.ndarray, M: np.ndarray, tol: float, window: int) -> int | None:
    Q = P.copy()
    for k in range(1, window + 1):
        Q = Q @ M
        if induced_norm(Q - P, np.inf) < tol:
            return k
    return None
