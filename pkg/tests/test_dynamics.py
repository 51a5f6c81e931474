import io
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from averlearn.dynamics import (
    Scenario,
    advance,
    fj_equilibrium,
    fj_simulate,
    simulate,
    step,
    vanishing_bound,
    write_trajectory_csv,
)
from averlearn.errors import InvalidScenario, SingularEquilibrium
from averlearn.schedules import (
    ConstantSchedule,
    TwoStepSchedule,
    HarmonicSplitSchedule,
    ScheduleWindow,
    SequenceSchedule,
    TailLogSchedule,
)
from averlearn.stochastic import NoiseSpec, uniform

from conftest import CHAIN_A, CHAIN_E_SINK, as_float, as_float_vec


def _scenario(schedule, x0, sigma=0.0, horizon=50, **kw):
    n = schedule.n
    return Scenario(n=n, sigma_bar=np.full(n, sigma), x0=np.asarray(x0, float), schedule=schedule,
                    horizon=horizon, **kw)


def test_step_formula():
    A = np.array([[0.5, 0.5], [0.25, 0.75]])
    E = np.array([0.5, 0.0])
    X = np.array([1.0, 2.0])
    sigma = np.array([3.0, 3.0])
    r = np.array([0.1, -0.1])
    want = A @ X + np.diag(E) @ (sigma - X) + r
    assert np.allclose(step(A, E, sigma, X, r), want)
    assert np.allclose(advance(A, E, sigma, X[None, :], r)[0], want)
    with pytest.raises(InvalidScenario):
        step(A, E, sigma, [1.0, 2.0, 3.0])


def test_error_recursion_matches_states(rng):
    # X_{t+1} - sigma = (A_t - E_t)(X_t - sigma) when A_t fixes sigma
    sched = TwoStepSchedule()
    s = _scenario(sched, [1.0, -2.0], sigma=0.7, horizon=30)
    traj = simulate(s)
    for t in range(30):
        B = sched.error_matrix(t)
        assert np.allclose(traj.states[t + 1] - 0.7, B @ (traj.states[t] - 0.7), atol=1e-14)


def test_constant_example_converges():
    sched = ConstantSchedule(as_float(CHAIN_A), as_float_vec(CHAIN_E_SINK))
    s = _scenario(sched, [0, 0.5, 2, -1, 3], sigma=1.0, horizon=400)
    traj = simulate(s)
    assert traj.errors[-1] < 1e-9
    assert traj.converged_at is not None and traj.converged_at <= 400


def test_start_at_truth_stays():
    sched = TwoStepSchedule()
    s = _scenario(sched, [0.25, 0.25], sigma=0.25, horizon=20)
    traj = simulate(s)
    assert np.all(traj.states == 0.25)
    assert traj.converged_at == 0


def test_truth_must_be_fixed_point():
    A = np.array([[0.5, 0.5], [0.5, 0.5]])
    s = Scenario(n=2, sigma_bar=np.array([0.0, 1.0]), x0=np.zeros(2),
                 schedule=ConstantSchedule(A, [0.5, 0.5]), horizon=3)
    with pytest.raises(InvalidScenario, match="t=0"):
        simulate(s)


def test_invalid_generator_names_step():
    bad = SequenceSchedule([np.eye(2), np.array([[0.7, 0.7], [0, 1]])], [[0, 0], [0, 0]])
    with pytest.raises(InvalidScenario, match="t=1"):
        simulate(_scenario(bad, [1, 1], horizon=3))


def test_noise_is_refused():
    s = _scenario(TwoStepSchedule(), [1, 0], noise=NoiseSpec("iid", uniform(-1, 1)))
    with pytest.raises(InvalidScenario):
        simulate(s)


def test_scenario_validation():
    with pytest.raises(InvalidScenario):
        _scenario(TwoStepSchedule(), [1, 0], horizon=0)
    with pytest.raises(InvalidScenario):
        _scenario(TwoStepSchedule(), [1, 0], tol=0)
    with pytest.raises(Exception):
        _scenario(TwoStepSchedule(), [1, 0, 0])


def test_two_step_bound():
    s = _scenario(TwoStepSchedule(), [1.0, -1.0], horizon=200)
    traj = simulate(s)
    assert traj.bound_kind == "two-step"
    assert traj.bound_violation() <= 1e-9
    assert traj.errors[-1] < 1e-6


def test_vanishing_bound_tail_log():
    s = _scenario(TailLogSchedule(2, 10, 0.5), [1.0, -1.0], horizon=300)
    traj = simulate(s)
    assert traj.bound_kind == "vanishing-rates"
    assert traj.bound_violation() <= 1e-9
    assert np.all(np.diff(traj.errors) <= 1e-15)


def test_vanishing_bound_function():
    w = ScheduleWindow(HarmonicSplitSchedule(2, zero_even=False), 101)
    direct = 1.0
    for t in range(2, 101):
        direct *= 1 - (1 / (2 * t) if t % 2 == 0 else 1 / (2 * t - 1))
    assert vanishing_bound(w, 2, 101) == pytest.approx(direct)
    with pytest.raises(InvalidScenario):
        vanishing_bound(w, 5, 3)
    with pytest.raises(InvalidScenario):
        vanishing_bound(w, 0, 500)


def test_fj_matches_equilibrium():
    A = np.array([[0.5, 0.25, 0.25], [1 / 3, 1 / 3, 1 / 3], [0, 0.5, 0.5]])
    lam = np.array([0.9, 0.5, 0.8])
    X0 = np.array([1.0, 0.0, -1.0])
    traj = fj_simulate(lam, A, X0, 400)
    eq = fj_equilibrium(lam, A, X0)
    assert np.allclose(traj.states[-1], eq, atol=1e-8)
    # equilibrium oracle: (I - L A) x = (I - L) x0
    assert np.allclose((np.eye(3) - lam[:, None] * A) @ eq, (1 - lam) * X0, atol=1e-14)


def test_fj_fully_susceptible_is_singular():
    A = np.full((2, 2), 0.5)
    with pytest.raises(SingularEquilibrium):
        fj_equilibrium([1.0, 1.0], A, [0.0, 1.0])
    traj = fj_simulate([1.0, 1.0], A, [0.0, 1.0], 5)
    assert traj.notes and np.allclose(traj.reference, traj.states[-1])
    with pytest.raises(InvalidScenario):
        fj_simulate([1.5, 0], A, [0, 0], 5)


def test_csv_layout():
    s = _scenario(TwoStepSchedule(), [1.0, -1.0], horizon=3)
    text = simulate(s).to_csv()
    lines = text.strip().splitlines()
    assert lines[0] == "t,x_1,x_2,err_inf,bound"
    assert len(lines) == 5
    traj = simulate(s, attach_bounds=False)
    buf = io.StringIO()
    write_trajectory_csv(traj, buf)
    assert buf.getvalue().splitlines()[1].endswith(",")


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-5, 5), min_size=2, max_size=2), st.integers(1, 40))
def test_simulation_is_deterministic(x0, T):
    s = _scenario(TwoStepSchedule(), x0, horizon=T)
    assert simulate(s).to_csv() == simulate(s).to_csv()
