import math
from fractions import Fraction

import numpy as np
import pytest

from averlearn.errors import InvalidScenario
from averlearn.schedules import (
    BlockAlternatingSchedule,
    ConstantSchedule,
    TwoStepSchedule,
    FJSchedule,
    GeometricSchedule,
    HarmonicSplitSchedule,
    ScheduleWindow,
    SequenceSchedule,
    TailLogSchedule,
    block_lengths,
)


def test_constant_is_time_invariant():
    s = ConstantSchedule(np.eye(2), [0.5, 0.0])
    assert s.time_invariant and s.period == 1
    A, E = s.check(17)
    assert np.array_equal(A, np.eye(2)) and list(E) == [0.5, 0.0]


def test_check_names_the_offending_step():
    bad = SequenceSchedule([np.eye(2), np.array([[0.5, 0.6], [0, 1]])], [[0, 0], [0, 0]])
    bad.check(0)
    with pytest.raises(InvalidScenario, match="t=1"):
        bad.check(1)


def test_sequence_cycles():
    s = SequenceSchedule([np.eye(1), np.eye(1)], [[0.1], [0.2]])
    assert s.period == 2 and not s.time_invariant
    assert s.at(5)[1][0] == 0.2
    with pytest.raises(InvalidScenario):
        SequenceSchedule([], [])


def test_two_step_weights():
    s = TwoStepSchedule()
    assert TwoStepSchedule.a(0) == Fraction(1, 2)
    for t in range(50):
        A, E = s.check(t)
        assert A[0, 0] == pytest.approx((t + 3) / (3 * (t + 2)))
        assert list(E) == [0.0, 0.5]


def test_harmonic_split_rates():
    assert HarmonicSplitSchedule.rate(1) == 1.0
    assert HarmonicSplitSchedule.rate(3) == pytest.approx(1 / 5)
    assert HarmonicSplitSchedule.rate(4) == 0.0
    assert HarmonicSplitSchedule.rate(4, zero_even=False) == pytest.approx(1 / 8)
    s = HarmonicSplitSchedule(3)
    A, E = s.check(4)
    assert np.all(np.diag(A) == 0) and np.all(E == 0)
    A, E = s.check(5)
    assert np.array_equal(A, np.eye(3)) and np.allclose(E, 1 / 9)


def test_tail_log_rates():
    s = TailLogSchedule(2, T=10, c=0.5)
    assert s.rate(10) == 0
    assert s.rate(11) == pytest.approx(0.5 / (12 * math.log(13)))
    for bad in (0.0, 0.6):
        with pytest.raises(InvalidScenario):
            TailLogSchedule(2, 10, bad)


def test_geometric_rates():
    s = GeometricSchedule(2, r0=0.5, q=0.5)
    assert s.rate(3) == 0.0625
    with pytest.raises(InvalidScenario):
        GeometricSchedule(2, q=1.0)


def test_block_lengths_rule():
    L = block_lengths(0.3, 0.7, 12)
    assert all(a < b for a, b in zip(L, L[1:]))
    for m, length in enumerate(L, 1):
        b = 0.3 if m % 2 else 0.7
        assert b**length <= 2.0**-m
    # lengths stay minimal except where bumped to keep them increasing
    assert L[:4] == [1, 4, 5, 8]


def test_block_schedule_factors():
    s = BlockAlternatingSchedule(0.3, 0.7, 4)
    assert s.ends == [1, 5, 10, 18] and s.horizon == 18
    factors = [s.factor(t) for t in range(18)]
    assert factors == [0.3] + [0.7] * 4 + [0.3] * 5 + [0.7] * 8
    A, E = s.check(2)
    assert A[0, 0] == 1 and E[0] == pytest.approx(0.3)


def test_fj_schedule_decomposes_b():
    A = np.array([[0.5, 0.5], [0.25, 0.75]])
    s = FJSchedule(A, [0.8, 0.4])
    Ad, E = s.check(0)
    assert np.allclose(Ad - np.diag(E), s.B, atol=1e-15)
    with pytest.raises(InvalidScenario):
        FJSchedule(A, [1.2, 0.1])


def test_window_caches_and_bounds():
    w = ScheduleWindow(TwoStepSchedule(), 5)
    assert w.at(3) is w.at(3)
    assert w.error_matrix(0)[1, 1] == 0
    with pytest.raises(InvalidScenario):
        ScheduleWindow(TwoStepSchedule(), 0)
    w2 = ScheduleWindow.from_sequences([np.eye(2)] * 3, [[0.1, 0.1]] * 3)
    assert w2.horizon == 3 and w2.schedule.period is None


def test_negative_time_rejected():
    with pytest.raises(ValueError):
        TwoStepSchedule().at(-1)
