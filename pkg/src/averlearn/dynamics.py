"""Deterministic trajectories of ``X_{t+1} = A_t X_t + E_t (sigma - X_t) + r_t``."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .errors import InvalidMatrix, InvalidScenario, SingularEquilibrium
from .matrix_core import as_matrix, as_vector, is_row_stochastic
from .schedules import FJSchedule, Schedule, ScheduleWindow

DEFAULT_TOL = 1e-9
HORIZON_CAP = 1_000_000
FIXED_POINT_TOL = 1e-12


@dataclass
class Scenario:
    n: int
    sigma_bar: np.ndarray
    x0: np.ndarray
    schedule: Schedule
    horizon: int
    noise: Any = None
    tol: float = DEFAULT_TOL
    seed: int = 0
    trials: int = 1
    checkpoints: list[int] | None = None
    coordinate: int = 1
    name: str = ""

    def __post_init__(self):
        self.sigma_bar = as_vector(self.sigma_bar, self.n)
        self.x0 = as_vector(self.x0, self.n)
        if self.schedule.n != self.n:
            raise InvalidScenario(f"schedule dimension {self.schedule.n} != n = {self.n}")
        if not (1 <= self.horizon <= HORIZON_CAP):
            raise InvalidScenario(f"horizon must lie in 1..{HORIZON_CAP}")
        if self.tol <= 0:
            raise InvalidScenario("tol must be positive")
        if self.trials < 1:
            raise InvalidScenario("trials must be positive")
        if not (1 <= self.coordinate <= self.n):
            raise InvalidScenario("coordinate outside 1..n")

    @property
    def is_consensus_truth(self) -> bool:
        return bool(np.all(self.sigma_bar == self.sigma_bar[0]))

    def window(self) -> ScheduleWindow:
        return ScheduleWindow(self.schedule, self.horizon)


@dataclass
class Trajectory:
    states: np.ndarray
    errors: np.ndarray
    reference: np.ndarray
    bounds: np.ndarray | None = None
    bound_kind: str | None = None
    tol: float = DEFAULT_TOL
    notes: list[str] = field(default_factory=list)

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.states.shape[0])

    @property
    def horizon(self) -> int:
        return self.states.shape[0] - 1

    @property
    def converged_at(self) -> int | None:
        hit = np.flatnonzero(self.errors < self.tol)
        return int(hit[0]) if hit.size else None

    def bound_violation(self) -> float:
        """Largest ``e_t - b_t`` over steps carrying a bound (``-inf`` when none)."""
        if self.bounds is None:
            return -math.inf
        mask = ~np.isnan(self.bounds)
        if not mask.any():
            return -math.inf
        return float((self.errors[mask] - self.bounds[mask]).max())

    def to_csv(self) -> str:
        buf = io.StringIO()
        write_trajectory_csv(self, buf)
        return buf.getvalue()


# -- single steps -----------------------------------------------------------

def step(A, E, sigma_bar, X, r=None) -> np.ndarray:
    """One update ``A X + diag(E)(sigma - X) + r``."""
    try:
        A = as_matrix(A)
        n = A.shape[0]
        E = as_vector(E, n)
        sigma_bar = as_vector(sigma_bar, n)
        X = as_vector(X, n)
        r = np.zeros(n) if r is None else as_vector(r, n)
    except InvalidMatrix as exc:
        raise InvalidScenario(f"dimension mismatch: {exc}") from exc
    return A @ X + E * (sigma_bar - X) + r


def advance(A: np.ndarray, E: np.ndarray, sigma_bar: np.ndarray, X: np.ndarray, r=None) -> np.ndarray:
    """Batched :func:`step` on rows of ``X`` (shape ``(trials, n)``), no validation."""
    out = X @ A.T + (sigma_bar - X) * E
    if r is not None:
        out += r
    return out


def _check_truth(A: np.ndarray, sigma_bar: np.ndarray, t: int) -> None:
    if np.abs(A @ sigma_bar - sigma_bar).max() >= FIXED_POINT_TOL:
        raise InvalidScenario(f"A_t does not fix sigma_bar at t={t}")


# -- bounds -----------------------------------------------------------------

def vanishing_bound(w: ScheduleWindow, T1: int, t: int) -> float:
    """``prod_{k=T1}^{t-1} (1 - min_i E_k(i))``."""
    if not (0 <= T1 <= t):
        raise InvalidScenario("need 0 <= T1 <= t")
    if t > w.horizon:
        raise InvalidScenario(f"window of length {w.horizon} is too short for t={t}")
    out = 1.0
    for k in range(T1, t):
        out *= 1.0 - float(w.at(k)[1].min())
    return out


def _two_step_bounds(errors: np.ndarray, factors: np.ndarray) -> np.ndarray:
    # b_t = e_{t mod 2} * prod over s < t//2 of factors[2s + t mod 2]
    T = errors.size - 1
    b = np.empty(T + 1)
    b[0] = errors[0]
    if T >= 1:
        b[1] = errors[1]
    for t in range(2, T + 1):
        b[t] = b[t - 2] * factors[t - 2]
    return b


def _vanishing_bounds(errors: np.ndarray, min_rates: np.ndarray, T1: int) -> np.ndarray:
    T = errors.size - 1
    b = np.full(T + 1, np.nan)
    b[T1] = errors[T1]
    for t in range(T1 + 1, T + 1):
        b[t] = b[t - 1] * (1.0 - min_rates[t - 1])
    return b


def _attach_bounds(traj: Trajectory, As: list, Es: list, n: int) -> None:
    from .certify import minimal_tau_prime
    from .matrix_core import learning_mass, recompose

    T = len(As)
    tau = np.array([learning_mass(A, E) for A, E in zip(As, Es)])
    tau_p = np.array([minimal_tau_prime(recompose(A, E)) for A, E in zip(As, Es)])
    ok = (tau_p >= 0) & (tau_p < tau) & (tau <= n)
    if T >= 2 and ok.all():
        factors = (n - tau[:-1]) / (n - tau_p[1:])
        traj.bounds = _two_step_bounds(traj.errors, factors)
        traj.bound_kind = "two-step"
        return
    a1 = np.array([bool(np.all(E <= np.diag(A))) for A, E in zip(As, Es)])
    bad = np.flatnonzero(~a1)
    T1 = int(bad[-1] + 1) if bad.size else 0
    if T1 < T:
        mins = np.array([E.min() for E in Es])
        traj.bounds = _vanishing_bounds(traj.errors, mins, T1)
        traj.bound_kind = "vanishing-rates"
        if T1 > 0:
            traj.notes.append(f"bound starts at T1={T1}")


# -- simulation -------------------------------------------------------------

def simulate(s: Scenario, attach_bounds: bool = True) -> Trajectory:
    """Run the noise-free recursion for ``s.horizon`` steps."""
    if s.noise is not None and getattr(s.noise, "kind", "zero") != "zero":
        raise InvalidScenario("scenario carries noise; use the stochastic simulator")
    if isinstance(s.schedule, FJSchedule):
        return fj_simulate(s.schedule.susceptibility, s.schedule.A, s.x0, s.horizon, tol=s.tol)
    T, n = s.horizon, s.n
    X = np.empty((T + 1, n))
    X[0] = s.x0
    As, Es = [], []
    for t in range(T):
        A, E = s.schedule.check(t)
        _check_truth(A, s.sigma_bar, t)
        As.append(A)
        Es.append(E)
        X[t + 1] = advance(A, E, s.sigma_bar, X[t][None, :])[0]
    errors = np.abs(X - s.sigma_bar).max(axis=1)
    traj = Trajectory(X, errors, s.sigma_bar.copy(), tol=s.tol)
    if attach_bounds:
        _attach_bounds(traj, As, Es, n)
    return traj


# -- Friedkin-Johnsen -------------------------------------------------------

def _fj_inputs(Lambda, A, X0):
    try:
        A = as_matrix(A)
        n = A.shape[0]
        lam = as_vector(Lambda, n)
        X0 = as_vector(X0, n)
    except InvalidMatrix as exc:
        raise InvalidScenario(str(exc)) from exc
    if np.any(lam < 0) or np.any(lam > 1):
        raise InvalidScenario("susceptibilities must lie in [0, 1]")
    if not is_row_stochastic(A):
        raise InvalidScenario("influence matrix must be row stochastic")
    return lam, A, X0


def fj_equilibrium(Lambda, A, X0) -> np.ndarray:
    """Solve ``(I - diag(L) A) X = (I - diag(L)) X0``."""
    lam, A, X0 = _fj_inputs(Lambda, A, X0)
    n = A.shape[0]
    M = np.eye(n) - lam[:, None] * A
    if np.linalg.cond(M) > 1e12:
        raise SingularEquilibrium("I - diag(L) A is singular or nearly so")
    try:
        return np.linalg.solve(M, (1 - lam) * X0)
    except np.linalg.LinAlgError as exc:
        raise SingularEquilibrium(str(exc)) from exc


def fj_simulate(Lambda, A, X0, T: int, tol: float = DEFAULT_TOL) -> Trajectory:
    """Iterate ``X_{t+1} = diag(L) A X_t + (I - diag(L)) X0``.

    Errors are measured against the equilibrium when it exists, otherwise
    against the final state.
    """
    lam, A, X0 = _fj_inputs(Lambda, A, X0)
    if T < 1:
        raise InvalidScenario("T must be positive")
    LA = lam[:, None] * A
    anchor = (1 - lam) * X0
    X = np.empty((T + 1, A.shape[0]))
    X[0] = X0
    for t in range(T):
        X[t + 1] = LA @ X[t] + anchor
    notes = []
    try:
        ref = fj_equilibrium(lam, A, X0)
    except SingularEquilibrium:
        ref = X[-1].copy()
        notes.append("no unique equilibrium; errors measured against the final state")
    errors = np.abs(X - ref).max(axis=1)
    return Trajectory(X, errors, ref, tol=tol, notes=notes)


# -- output -----------------------------------------------------------------

def _fmt(x: float) -> str:
    return "" if x is None or (isinstance(x, float) and math.isnan(x)) else repr(float(x))


def write_trajectory_csv(traj: Trajectory, fh) -> None:
    n = traj.states.shape[1]
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["t", *[f"x_{i}" for i in range(1, n + 1)], "err_inf", "bound"])
    for t in range(traj.states.shape[0]):
        b = traj.bounds[t] if traj.bounds is not None else None
        w.writerow([t, *[_fmt(v) for v in traj.states[t]], _fmt(traj.errors[t]), _fmt(b)])
