"""Time-varying (A_t, E_t) schedules.

Every schedule exposes ``at(t) -> (A_t, E_t)`` for ``t = 0, 1, 2, ...`` along
with a ``kind`` tag and the parameters it was built from, so certifiers can
recognize the families they know how to reason about symbolically.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import InvalidScenario
from .matrix_core import STOCH_TOL, as_matrix, as_rates, as_vector, is_row_stochastic, recompose


class Schedule:
    kind: str = "abstract"
    n: int
    # True when at(t) does not depend on t
    time_invariant: bool = False
    # period of the schedule, or None when aperiodic
    period: int | None = None

    def at(self, t: int) -> tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    def error_matrix(self, t: int) -> np.ndarray:
        A, E = self.at(t)
        return recompose(A, E)

    def params(self) -> dict:
        return {}

    def describe(self) -> dict:
        return {"kind": self.kind, "n": self.n, **self.params()}

    def check(self, t: int, stoch_tol: float = STOCH_TOL) -> tuple[np.ndarray, np.ndarray]:
        """``at(t)`` with validation; raises InvalidScenario naming ``t``."""
        A, E = self.at(t)
        if A.shape != (self.n, self.n) or E.shape != (self.n,):
            raise InvalidScenario(f"schedule produced wrong shapes at t={t}")
        if not is_row_stochastic(A, stoch_tol):
            raise InvalidScenario(f"A_t is not row stochastic at t={t}")
        if np.any(E < 0):
            raise InvalidScenario(f"negative learning rate at t={t}")
        return A, E


def _check_t(t: int) -> int:
    if t < 0:
        raise ValueError("time index must be nonnegative")
    return int(t)


class ConstantSchedule(Schedule):
    kind = "constant"
    time_invariant = True
    period = 1

    def __init__(self, A, E):
        self.A = as_matrix(A)
        self.n = self.A.shape[0]
        self.E = as_rates(E, self.n)

    def at(self, t):
        _check_t(t)
        return self.A, self.E

    def params(self):
        return {"A": self.A.tolist(), "E": self.E.tolist()}


class SequenceSchedule(Schedule):
    """Explicit list of pairs, repeated cyclically past its end."""

    kind = "sequence"

    def __init__(self, As, Es):
        if len(As) == 0 or len(As) != len(Es):
            raise InvalidScenario("sequence schedule needs equally many A_t and E_t (at least one)")
        self.As = [as_matrix(A) for A in As]
        self.n = self.As[0].shape[0]
        if any(A.shape != (self.n, self.n) for A in self.As):
            raise InvalidScenario("sequence schedule mixes dimensions")
        self.Es = [as_rates(E, self.n) for E in Es]
        self.period = len(self.As)
        self.time_invariant = self.period == 1

    def at(self, t):
        k = _check_t(t) % len(self.As)
        return self.As[k], self.Es[k]

    def params(self):
        return {"A": [A.tolist() for A in self.As], "E": [E.tolist() for E in self.Es]}


class TwoStepSchedule(Schedule):
    """Two agents; agent 1 weights itself by ``a_t = (t+3)/(3(t+2))``, agent 2 learns at rate 1/2."""

    kind = "two_step"
    n = 2

    @staticmethod
    def a(t: int) -> Fraction:
        return Fraction(t + 3, 3 * (t + 2))

    def at(self, t):
        a = float(self.a(_check_t(t)))
        A = np.array([[a, 1.0 - a], [0.5, 0.5]])
        return A, np.array([0.0, 0.5])


def _cyclic_shift(n: int) -> np.ndarray:
    return np.roll(np.eye(n), 1, axis=1)


class HarmonicSplitSchedule(Schedule):
    """Rates ``1/(2t)`` at even ``t`` and ``1/(2t-1)`` at odd ``t`` (zero at ``t = 0``).

    With ``zero_even`` the even steps instead carry zero learning and zero
    self-weight (a cyclic shift for ``n >= 2``), so only odd steps learn.
    Learning steps use the averaging matrix ``A`` (identity by default).
    """

    kind = "harmonic_split"

    def __init__(self, n: int, zero_even: bool = True, A=None):
        if n < 1:
            raise InvalidScenario("n must be positive")
        self.n = int(n)
        self.zero_even = bool(zero_even)
        self.A = np.eye(self.n) if A is None else as_matrix(A)
        if self.A.shape != (self.n, self.n):
            raise InvalidScenario("harmonic_split A has the wrong dimension")
        self._shift = _cyclic_shift(self.n) if self.n >= 2 else np.eye(1)

    @staticmethod
    def rate(t: int, zero_even: bool = True) -> float:
        if t == 0:
            return 0.0
        if t % 2 == 0:
            return 0.0 if zero_even else 1.0 / (2 * t)
        return 1.0 / (2 * t - 1)

    def at(self, t):
        t = _check_t(t)
        r = self.rate(t, self.zero_even)
        if t % 2 == 0 and self.zero_even and t > 0:
            return self._shift, np.zeros(self.n)
        return self.A, np.full(self.n, r)

    def params(self):
        return {"zero_even": self.zero_even, "A": self.A.tolist()}


class TailLogSchedule(Schedule):
    """``A_t = I``; rates zero up to ``T`` then ``c / ((t+1) ln(t+2))``."""

    kind = "tail_log"

    def __init__(self, n: int, T: int, c: float):
        if n < 1 or T < 0:
            raise InvalidScenario("tail_log needs n >= 1 and T >= 0")
        if not (0 < c <= 0.5):
            raise InvalidScenario("tail_log needs 0 < c <= 1/2")
        self.n, self.T, self.c = int(n), int(T), float(c)
        self._I = np.eye(self.n)

    def rate(self, t: int) -> float:
        return 0.0 if t <= self.T else self.c / ((t + 1) * math.log(t + 2))

    def at(self, t):
        t = _check_t(t)
        return self._I, np.full(self.n, self.rate(t))

    def params(self):
        return {"T": self.T, "c": self.c}


class GeometricSchedule(Schedule):
    """Rates ``r0 * q**t`` on top of a fixed averaging matrix (identity by default)."""

    kind = "geometric"

    def __init__(self, n: int, r0: float = 0.5, q: float = 0.5, A=None):
        if n < 1 or not (0 <= q < 1) or r0 < 0:
            raise InvalidScenario("geometric needs n >= 1, r0 >= 0 and 0 <= q < 1")
        self.n, self.r0, self.q = int(n), float(r0), float(q)
        self.A = np.eye(self.n) if A is None else as_matrix(A)

    def rate(self, t: int) -> float:
        return self.r0 * self.q ** t

    def at(self, t):
        t = _check_t(t)
        return self.A, np.full(self.n, self.rate(t))

    def params(self):
        return {"r0": self.r0, "q": self.q, "A": self.A.tolist()}


def block_lengths(b1: float, b2: float, blocks: int) -> list[int]:
    """Block ``m`` (1-based) uses ``b1`` when odd, ``b2`` when even.

    Its length is the smallest ``L`` with ``b**L <= 2**-m``, bumped where
    needed so the lengths strictly increase.
    """
    out: list[int] = []
    for m in range(1, blocks + 1):
        b = b1 if m % 2 else b2
        L = max(1, math.ceil(m * math.log(2) / math.log(1 / b)))
        while b ** L > 2.0 ** (-m):
            L += 1
        while L > 1 and b ** (L - 1) <= 2.0 ** (-m):
            L -= 1
        if out and L <= out[-1]:
            L = out[-1] + 1
        out.append(L)
    return out


class BlockAlternatingSchedule(Schedule):
    """Scalar system whose contraction factor alternates between ``b1`` and ``b2`` in growing blocks."""

    kind = "block_alternating"
    n = 1

    def __init__(self, b1: float, b2: float, blocks: int):
        if not (0 < b1 < 1 and 0 < b2 < 1) or blocks < 1:
            raise InvalidScenario("block_alternating needs b1, b2 in (0,1) and blocks >= 1")
        self.b1, self.b2, self.blocks = float(b1), float(b2), int(blocks)
        self.lengths = block_lengths(self.b1, self.b2, self.blocks)
        self.ends = list(np.cumsum(self.lengths))
        self._one = np.ones((1, 1))

    @property
    def horizon(self) -> int:
        return int(self.ends[-1])

    def factor(self, t: int) -> float:
        start = 0
        for m, L in enumerate(self.lengths, start=1):
            if t < start + L:
                return self.b1 if m % 2 else self.b2
            start += L
        # past the last block keep the final factor
        return self.b1 if self.blocks % 2 else self.b2

    def at(self, t):
        return self._one, np.array([1.0 - self.factor(_check_t(t))])

    def params(self):
        return {"b1": self.b1, "b2": self.b2, "blocks": self.blocks, "lengths": self.lengths}


class FJSchedule(Schedule):
    """Friedkin-Johnsen model: ``X_{t+1} = diag(L) A X_t + (I - diag(L)) X_0``.

    As a learning system this is ``B = diag(L) A`` with the truth replaced by
    the equilibrium; ``at`` returns the stochastic/learning split of ``B``.
    """

    kind = "fj"
    time_invariant = True
    period = 1

    def __init__(self, A, susceptibility):
        self.A = as_matrix(A)
        self.n = self.A.shape[0]
        lam = as_vector(susceptibility, self.n)
        if np.any(lam < 0) or np.any(lam > 1):
            raise InvalidScenario("susceptibilities must lie in [0, 1]")
        if not is_row_stochastic(self.A):
            raise InvalidScenario("FJ influence matrix must be row stochastic")
        self.susceptibility = lam

    @property
    def B(self) -> np.ndarray:
        return self.susceptibility[:, None] * self.A

    def at(self, t):
        from .matrix_core import decompose_substochastic

        _check_t(t)
        return decompose_substochastic(self.B)

    def params(self):
        return {"A": self.A.tolist(), "susceptibility": self.susceptibility.tolist()}


@dataclass
class ScheduleWindow:
    """A schedule observed over ``t = 0 .. horizon - 1``."""

    schedule: Schedule
    horizon: int
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.horizon < 1:
            raise InvalidScenario("window needs horizon >= 1")

    @classmethod
    def from_sequences(cls, As, Es) -> "ScheduleWindow":
        sched = SequenceSchedule(As, Es)
        sched.period = None  # explicit data says nothing beyond its end
        return cls(sched, len(As))

    @property
    def n(self) -> int:
        return self.schedule.n

    def at(self, t: int):
        if t not in self._cache:
            self._cache[t] = self.schedule.at(t)
        return self._cache[t]

    def error_matrix(self, t: int) -> np.ndarray:
        A, E = self.at(t)
        return recompose(A, E)

    @property
    def family(self) -> str:
        return self.schedule.kind
