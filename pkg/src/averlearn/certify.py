"""Convergence certificates for averaging-plus-learning systems.

Each certifier returns a :class:`CertificateReport` naming the rule that
decided the verdict together with the quantities that witnessed it.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

import numpy as np

from .errors import (
    InfeasibleLearner,
    InvalidMatrix,
    InvalidScenario,
    NotApplicable,
    NotProperSubstochastic,
    NotSubstochastic,
    NumericalFailure,
    Unsupported,
)
from .graph_analysis import is_condensely_anchored
from .matrix_core import (
    SPECTRAL_TOL,
    STOCH_TOL,
    RowClass,
    as_matrix,
    as_rates,
    classify_rows,
    decompose_substochastic,
    eigenvalues,
    induced_norm,
    is_row_stochastic,
    learning_mass,
    mixed_norm_1_to_inf,
    recompose,
    spectral_radius,
)
from .schedules import (
    TwoStepSchedule,
    GeometricSchedule,
    HarmonicSplitSchedule,
    ScheduleWindow,
    TailLogSchedule,
)


class Verdict(enum.Enum):
    CONVERGES_TO_TRUTH = "ConvergesToTruth"
    ZERO_CONVERGENT = "ZeroConvergent"
    NOT_ZERO_CONVERGENT = "NotZeroConvergent"
    INCONCLUSIVE = "Inconclusive"


# rule tags
ALL_ANCHORS = "all-anchors"
NONNEGATIVE_ANCHORING = "nonnegative-condensely-anchored"
SIGNED_ANCHORING = "signed-diagonal-condensely-anchored"
SPECTRAL = "spectral-radius"
IMPAIRED = "impaired-averaging-anchoring"
VANISHING = "vanishing-rates"
MIXED_UNIFORM = "mixed-norm-uniform-margins"
MIXED_FAMILY = "mixed-norm-two-step-family"
MIXED_WINDOW = "mixed-norm-window"
SYMMETRIC_OVERLEARNING = "symmetric-overlearning"
SMALL_GAIN = "small-gain"


def _jsonable(x: Any):
    if isinstance(x, enum.Enum):
        return x.value
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (frozenset, set)):
        return sorted(_jsonable(v) for v in x)
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating, float)):
        v = float(x)
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        if math.isnan(v):
            return None
        return v
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, complex):
        return [x.real, x.imag]
    if isinstance(x, Fraction):
        return str(x)
    return x


@dataclass
class CertificateReport:
    verdict: Verdict
    fired_rule: str | None
    witnesses: dict = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)

    @property
    def converges(self) -> bool:
        return self.verdict in (Verdict.CONVERGES_TO_TRUTH, Verdict.ZERO_CONVERGENT)

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict.value,
            "fired_rule": self.fired_rule,
            "witnesses": _jsonable(self.witnesses),
            "notes": "; ".join(self.notes),
        }


# -- time-invariant systems -------------------------------------------------

def _validated_pair(A, E) -> tuple[np.ndarray, np.ndarray]:
    try:
        A = as_matrix(A)
        E = as_rates(E, A.shape[0])
    except InvalidMatrix as exc:
        raise InvalidScenario(str(exc)) from exc
    if not is_row_stochastic(A):
        raise InvalidScenario("A must be row stochastic")
    return A, E


def certify_time_invariant(A, E, tol: float = SPECTRAL_TOL) -> CertificateReport:
    """Decide whether ``(A - E)**t -> 0`` for a fixed pair.

    Rules are tried in order: all agents anchors; ``A - E`` entrywise
    nonnegative (anchoring test decides both ways); rates within
    ``[0, 2 A(i,i)]`` and condensely anchored; spectral radius.
    """
    A, E = _validated_pair(A, E)
    B = recompose(A, E)
    report = is_condensely_anchored(A, E)
    n = A.shape[0]
    wit: dict[str, Any] = {
        "anchors": report.anchors,
        "defective": report.defective,
        "overlearners": report.overlearners,
        "condensely_anchored": report.condensely_anchored,
    }

    if len(report.anchors) == n:
        wit["norm_inf"] = induced_norm(B, np.inf)
        return CertificateReport(
            Verdict.CONVERGES_TO_TRUTH, ALL_ANCHORS, wit,
            ["every agent is an anchor, so every row of A - E has absolute sum below 1"],
        )

    if np.all(B >= 0):
        wit["sink_sccs"] = report.sinks
        if report.condensely_anchored:
            return CertificateReport(Verdict.ZERO_CONVERGENT, NONNEGATIVE_ANCHORING, wit)
        missing = [sorted(s) for s in report.sinks if not (s & report.anchors)]
        return CertificateReport(
            Verdict.NOT_ZERO_CONVERGENT, NONNEGATIVE_ANCHORING, wit,
            [f"sink SCCs without an anchor: {missing}"],
        )

    if np.all(E <= 2 * np.diag(A)) and report.condensely_anchored:
        wit["sink_sccs"] = report.sinks
        return CertificateReport(Verdict.ZERO_CONVERGENT, SIGNED_ANCHORING, wit)

    rho = spectral_radius(B, tol)
    wit["spectral_radius"] = rho
    notes = []
    if not report.anchors:
        notes.append("no anchor present; verdict rests on the spectrum")
    if rho < 1 - tol:
        return CertificateReport(Verdict.ZERO_CONVERGENT, SPECTRAL, wit, notes)
    if rho > 1 + tol:
        return CertificateReport(Verdict.NOT_ZERO_CONVERGENT, SPECTRAL, wit, notes)
    notes.append(f"spectral radius within {tol:g} of 1")
    return CertificateReport(Verdict.INCONCLUSIVE, SPECTRAL, wit, notes)


def certify_impaired(B, stoch_tol: float = STOCH_TOL) -> CertificateReport:
    """Zero-convergence of a proper substochastic ``B`` via its anchoring structure."""
    B = as_matrix(B)
    cls = classify_rows(B, stoch_tol)
    if cls is RowClass.ROW_STOCHASTIC:
        raise NotProperSubstochastic("B is row stochastic; no row is deficient")
    if cls is RowClass.GENERAL:
        raise NotSubstochastic("B is not row substochastic")
    A, E = decompose_substochastic(B, stoch_tol)
    report = is_condensely_anchored(A, E)
    wit = {
        "anchors": report.anchors,
        "condensely_anchored": report.condensely_anchored,
        "sink_sccs": report.sinks,
        "witness_walks": report.witness_walks,
    }
    verdict = Verdict.ZERO_CONVERGENT if report.condensely_anchored else Verdict.NOT_ZERO_CONVERGENT
    return CertificateReport(verdict, IMPAIRED, wit)


# -- vanishing rates --------------------------------------------------------

_VANISHING_FAMILIES = {
    "harmonic_split": HarmonicSplitSchedule,
    "tail_log": TailLogSchedule,
    "geometric": GeometricSchedule,
}


def _family_of(w: ScheduleWindow, known_family: str | None) -> tuple[str | None, list[str]]:
    notes: list[str] = []
    sched = w.schedule
    tag = known_family or sched.kind
    if tag == "constant":
        return ("constant" if sched.time_invariant else None), notes
    cls = _VANISHING_FAMILIES.get(tag)
    if cls is not None and isinstance(sched, cls):
        return tag, notes
    if known_family is not None:
        notes.append(f"family tag {known_family!r} does not match schedule kind {sched.kind!r}; ignored")
    return None, notes


def _a1_holds(A: np.ndarray, E: np.ndarray, slack: float = 1e-15) -> bool:
    return bool(np.all(E >= 0) and np.all(E <= np.diag(A) + slack))


def certify_vanishing_rates(w: ScheduleWindow, known_family: str | None = None) -> CertificateReport:
    """Check eventual boundedness, vanishing and minimum persistence of the rates.

    Boundedness (``0 <= E_t(i) <= A_t(i,i)`` from some ``T1`` on) and
    vanishing are read off the window. Divergence of ``sum_t min_i E_t(i)``
    is decided only for recognized families; otherwise the partial sum is
    reported and the verdict is Inconclusive.
    """
    if w is None or w.horizon < 1:
        raise InvalidScenario("empty schedule window")
    T = w.horizon
    family, notes = _family_of(w, known_family)
    mins = np.empty(T)
    maxs = np.empty(T)
    a1 = np.empty(T, dtype=bool)
    for t in range(T):
        A, E = w.at(t)
        mins[t] = E.min()
        maxs[t] = E.max()
        a1[t] = _a1_holds(A, E)
    # first T1 after which the bound holds throughout the window
    bad = np.flatnonzero(~a1)
    T1 = int(bad[-1] + 1) if bad.size else 0
    a1_ok = T1 < T
    half = max(1, T // 2)
    late_max = float(maxs[half:].max()) if T > half else float(maxs[-1])
    early_max = float(maxs[:half].max())
    a2_window = late_max <= early_max and (late_max < early_max or late_max == 0.0)
    partial = float(mins.sum())
    product = float(np.prod(1.0 - mins[T1:])) if a1_ok else None
    wit: dict[str, Any] = {
        "T1": T1 if a1_ok else None,
        "window": T,
        "partial_sum_min_rates": partial,
        "product_bound": product,
        "final_max_rate": float(maxs[-1]),
        "family": family,
    }

    a2: bool | None = a2_window
    a3: bool | None = None
    sched = w.schedule
    if family == "harmonic_split":
        a2, a3 = True, True
        notes.append("odd-step rates 1/(2t-1) form a divergent harmonic-type series")
    elif family == "tail_log":
        a2, a3 = True, True
        notes.append("c/((t+1) ln(t+2)) has a divergent sum by the integral test")
    elif family == "geometric":
        a2 = True
        a3 = False
        notes.append(f"geometric rates sum to {sched.r0 / (1 - sched.q):g}; persistence fails")
    elif family == "constant":
        E = w.at(0)[1]
        a2 = bool(np.all(E == 0))
        a3 = bool(E.min() > 0)
        if not a2:
            notes.append("rates are constant and nonzero; they do not vanish (use the time-invariant certifier)")
        if not a3:
            notes.append("some agent never learns; persistence fails")

    wit.update({"A1": bool(a1_ok), "A2": a2, "A3": a3})
    if family in ("harmonic_split", "tail_log", "geometric") and a1_ok:
        # these families keep the bound after the window: rates only shrink
        wit["A1_extends"] = True

    if not a1_ok:
        notes.append("the bound 0 <= E_t(i) <= A_t(i,i) fails at the end of the window")
        return CertificateReport(Verdict.INCONCLUSIVE, VANISHING, wit, notes)
    if a3 is None:
        notes.append("persistence undecidable from a finite window; partial sum reported")
        return CertificateReport(Verdict.INCONCLUSIVE, VANISHING, wit, notes)
    if a1_ok and a2 and a3 and wit.get("A1_extends", False):
        return CertificateReport(Verdict.CONVERGES_TO_TRUTH, VANISHING, wit, notes)
    return CertificateReport(Verdict.INCONCLUSIVE, VANISHING, wit, notes)


# -- mixed norms ------------------------------------------------------------

def minimal_tau_prime(B) -> float:
    """Smallest ``tau'`` in ``[0, n)`` with ``max |B(i,j)| <= 1/(n - tau')``."""
    B = as_matrix(B)
    n = B.shape[0]
    m = mixed_norm_1_to_inf(B)
    if m == 0:
        return 0.0
    val = n - 1.0 / m
    return float(min(max(val, 0.0), math.nextafter(n, 0)))


@dataclass
class MixedNormProfile:
    tau: np.ndarray
    tau_prime: np.ndarray
    failing: list[int]

    def two_step_factors(self, n: int) -> np.ndarray:
        """``(n - tau_t) / (n - tau'_{t+1})`` for ``t = 0 .. T-2``."""
        return (n - self.tau[:-1]) / (n - self.tau_prime[1:])


def mixed_norm_profile(w: ScheduleWindow) -> MixedNormProfile:
    T = w.horizon
    n = w.n
    tau = np.empty(T)
    tau_p = np.empty(T)
    failing = []
    for t in range(T):
        A, E = w.at(t)
        tau[t] = min(learning_mass(A, E), float(n))
        tau_p[t] = minimal_tau_prime(recompose(A, E))
        if not (0 <= tau_p[t] < tau[t] <= n):
            failing.append(t)
    return MixedNormProfile(tau, tau_p, failing)


def certify_mixed_norm(w: ScheduleWindow) -> CertificateReport:
    """Two-step contraction via the ``1->inf`` / ``inf->1`` norm pair.

    The per-step learning mass ``tau_t`` bounds ``||B_t||_{inf->1}`` by
    ``n - tau_t`` and ``tau'_t`` bounds every entry of ``B_t`` by
    ``1/(n - tau'_t)``, so ``||B_{t+1} B_t||_inf`` is at most
    ``(n - tau_t)/(n - tau'_{t+1})``.
    """
    if w is None or w.horizon < 2:
        raise InvalidScenario("mixed-norm certificate needs a window of at least 2 steps")
    n = w.n
    prof = mixed_norm_profile(w)
    wit: dict[str, Any] = {
        "tau_min": float(prof.tau.min()),
        "tau_max": float(prof.tau.max()),
        "tau_prime_min": float(prof.tau_prime.min()),
        "tau_prime_max": float(prof.tau_prime.max()),
        "window": w.horizon,
    }
    if prof.failing:
        t = prof.failing[0]
        wit["failing_steps"] = prof.failing[:20]
        return CertificateReport(
            Verdict.INCONCLUSIVE, MIXED_WINDOW, wit,
            [f"0 <= tau'_t < tau_t <= n fails at t={t} (tau={prof.tau[t]:.6g}, tau'={prof.tau_prime[t]:.6g})"],
        )
    factors = prof.two_step_factors(n)
    # direct check of the two-step norm against its bound
    worst = 0.0
    for t in range(w.horizon - 1):
        prod = w.error_matrix(t + 1) @ w.error_matrix(t)
        worst = max(worst, induced_norm(prod, np.inf) - factors[t])
    wit["two_step_bound_slack"] = worst
    wit["max_two_step_factor"] = float(factors.max())
    even = np.prod(factors[0::2])
    odd = np.prod(factors[1::2]) if factors.size > 1 else 1.0
    wit["even_chain_product"] = float(even)
    wit["odd_chain_product"] = float(odd)
    sched = w.schedule

    if isinstance(sched, TwoStepSchedule):
        wit["two_step_factor_formula"] = "1 - 1/(4s + 2f + 6)"
        wit["tau"] = 0.5
        wit["tau_prime_formula"] = "t/(2t+3)"
        return CertificateReport(
            Verdict.CONVERGES_TO_TRUTH, MIXED_FAMILY, wit,
            ["two-step factors 1 - 1/(4s+2f+6) have a divergent log-product"],
        )

    gamma0 = float(prof.tau_prime.max())
    gamma1 = float(prof.tau.min())
    wit["gamma0"] = gamma0
    wit["gamma1"] = gamma1
    if gamma0 < gamma1:
        wit["geometric_factor"] = (n - gamma1) / (n - gamma0)
        covers = sched.period is not None and w.horizon >= sched.period + 1
        if sched.time_invariant or covers:
            return CertificateReport(Verdict.CONVERGES_TO_TRUTH, MIXED_UNIFORM, wit)
        return CertificateReport(
            Verdict.INCONCLUSIVE, MIXED_UNIFORM, wit,
            ["uniform margins hold on the window only; the schedule is not periodic"],
        )
    return CertificateReport(
        Verdict.INCONCLUSIVE, MIXED_WINDOW, wit,
        ["no uniform margins on the window; chain products reported"],
    )


# -- one learner ------------------------------------------------------------

@dataclass(frozen=True)
class OneLearnerBounds:
    upper: float
    r_value: float
    norm_bound: float
    offdiag_max: float
    small_enough: bool
    at_least_uniform: bool

    def to_json(self) -> dict:
        return _jsonable(self.__dict__)


def admissible_gap(n: int, a: float) -> float:
    """``(sqrt((n-a)**2 + 4) - (n-a)) / 2``."""
    d = n - a
    return (math.sqrt(d * d + 4) - d) / 2


def one_learner_bounds(A, i: int, tau: float, tau_prime: float) -> OneLearnerBounds:
    """Open upper bound on ``|A(i,i) - E(i)|`` when agent ``i`` (1-based) is the only learner."""
    A = as_matrix(A)
    n = A.shape[0]
    if not is_row_stochastic(A):
        raise InvalidScenario("A must be row stochastic")
    if not (1 <= i <= n):
        raise InvalidScenario(f"learner index {i} outside 1..{n}")
    if not (0 <= tau_prime < tau <= n):
        raise InvalidScenario("need 0 <= tau' < tau <= n")
    a = float(A[i - 1, i - 1])
    if a <= 0:
        raise InfeasibleLearner(f"agent {i} has no self-weight, so its learning mass is negative")
    hat = A.copy()
    hat[i - 1, i - 1] = 0.0
    m = mixed_norm_1_to_inf(hat)
    r = admissible_gap(n, a)
    norm_bound = (1.0 / m - n + a) if m > 0 else math.inf
    return OneLearnerBounds(
        upper=min(r, norm_bound),
        r_value=r,
        norm_bound=norm_bound,
        offdiag_max=m,
        small_enough=bool(n == 1 or m < 1.0 / (n - 1)),
        at_least_uniform=bool(m >= 1.0 / n - 1e-15),
    )


# -- high-ratio family ------------------------------------------------------

def build_high_ratio_example(n: int) -> tuple[np.ndarray, np.ndarray, list[complex]]:
    """A zero-convergent pair whose first rate is ``(n^2 - n + 1)`` times its self-weight."""
    if n < 2:
        raise InvalidScenario("n must be at least 2")
    A = np.zeros((n, n))
    A[0, 0] = 1.0 / n**2
    A[0, 1:] = (n + 1) / n**2
    A[1:, 0] = 1.0 / n
    A[1:, 1:] = np.eye(n - 1) * ((n - 1) / n)
    E = np.full(n, (n - 2) / n)
    E[0] = (n * n - n + 1) / n**2
    if not is_row_stochastic(A, 1e-12):
        raise NumericalFailure("high-ratio construction is not row stochastic")
    disc = 0.25 + 1.0 / n - 1.0 / n**3
    root = math.sqrt(disc)
    eigs = [complex(1.0 / n)] * (n - 2) + [complex(1.0 / n - 0.5 + root), complex(1.0 / n - 0.5 - root)]
    return A, E, eigs


# -- extremal function ------------------------------------------------------

def fn_lower_bound(n: int, R: float) -> float:
    """``(R - n**(1/n) (2R+1)**(1-1/n))^+``."""
    if n < 1 or R < 0:
        raise InvalidScenario("need n >= 1 and R >= 0")
    return max(0.0, R - n ** (1.0 / n) * (2 * R + 1) ** (1 - 1.0 / n))


def fn_threshold(n: int) -> tuple[Fraction, int]:
    """Rate beyond which the lower bound exceeds 1, and the simpler cap ``n(2**(n-1) + 2)``."""
    if n < 1:
        raise InvalidScenario("need n >= 1")
    exact = Fraction(n * 2**n + 3 * n - 1, 2)
    simple = n * (2 ** (n - 1) + 2)
    assert exact <= simple
    return exact, simple


def fn_small_exact(n: int, R: float) -> float:
    if n not in (1, 2):
        raise Unsupported("closed form known only for n = 1 and n = 2")
    if R < 0:
        raise InvalidScenario("R must be nonnegative")
    return max(0.0, R - 1.0)


@dataclass
class ExtremalQuery:
    n: int
    R: float
    search_budget: int = 2000

    def __post_init__(self):
        if self.n < 1 or self.R < 0 or self.search_budget < 1:
            raise InvalidScenario("need n >= 1, R >= 0 and search_budget >= 1")


def _project_row(x: np.ndarray) -> np.ndarray:
    # Euclidean projection onto {x >= 0, sum x <= 1}
    y = np.maximum(x, 0.0)
    if y.sum() <= 1.0:
        return y
    u = np.sort(x)[::-1]
    css = np.cumsum(u) - 1.0
    k = np.arange(1, x.size + 1)
    r = np.nonzero(u - css / k > 0)[0][-1]
    return np.maximum(x - css[r] / (r + 1), 0.0)


def _rho_shifted(A: np.ndarray, D: np.ndarray) -> float:
    M = A.copy()
    M[np.diag_indices_from(M)] -= D
    return float(np.abs(np.linalg.eigvals(M)).max())


def _vertex_starts(n: int, R: float, limit: int):
    # rows that are zero or a unit vector, other rates at 0 or R
    import itertools

    count = 0
    for rows in itertools.product(range(n + 1), repeat=n):
        A = np.zeros((n, n))
        for i, j in enumerate(rows):
            if j < n:
                A[i, j] = 1.0
        for tail in itertools.product((0.0, R), repeat=n - 1):
            yield A.copy(), np.array((R,) + tail)
            count += 1
            if count >= limit:
                return


def fn_empirical(q: ExtremalQuery, rng_seed=0) -> tuple[float, np.ndarray, np.ndarray]:
    """Search for small ``rho(A - D)`` with ``D(1) = R`` and ``0 <= D(i) <= R``.

    ``A`` ranges over nonnegative row-substochastic matrices. Vertex starts
    (unit-or-zero rows) are tried first, then random restarts are refined by
    shrinking Gaussian perturbations projected back onto the feasible set.
    The result only bounds the infimum from above.
    """
    n, R, budget = q.n, float(q.R), q.search_budget
    best_rho = math.inf
    best = (np.eye(n), np.full(n, R))
    spent = 0
    for A, D in _vertex_starts(n, R, max(1, budget // 4)):
        rho = _rho_shifted(A, D)
        spent += 1
        if rho < best_rho:
            best_rho, best = rho, (A, D)
    restart = 0
    while spent < budget:
        # one stream per restart, so a restart's path depends only on (seed, index)
        rng = np.random.default_rng([int(rng_seed), restart])
        restart += 1
        if restart % 2:
            A, D = best[0].copy(), best[1].copy()
        else:
            A = rng.dirichlet(np.ones(n), size=n) * rng.random((n, 1))
            D = np.concatenate(([R], rng.random(n - 1) * R))
        rho = _rho_shifted(A, D)
        spent += 1
        step = 0.3
        for _ in range(min(200, budget - spent)):
            A2 = np.array([_project_row(row) for row in A + rng.normal(0, step, (n, n))])
            D2 = D.copy()
            if n > 1:
                D2[1:] = np.clip(D[1:] + rng.normal(0, step * max(R, 1), n - 1), 0, R)
            r2 = _rho_shifted(A2, D2)
            spent += 1
            if r2 < rho:
                A, D, rho = A2, D2, r2
            else:
                step *= 0.97
            if step < 1e-9:
                break
        if rho < best_rho:
            best_rho, best = rho, (A, D)
    return best_rho, best[0], best[1]


# -- perturbation checks ----------------------------------------------------

@dataclass(frozen=True)
class OstrowskiElsnerCheck:
    spectral_variation: float
    bound: float
    holds: bool


def spectral_variation(A, B) -> float:
    """``max over eigenvalues mu of B of min over eigenvalues lam of A of |mu - lam|``."""
    la = eigenvalues(A)
    lb = eigenvalues(B)
    return float(np.abs(lb[:, None] - la[None, :]).min(axis=1).max())


def oe_infty_check(A, B) -> OstrowskiElsnerCheck:
    A = as_matrix(A)
    B = as_matrix(B)
    if A.shape != B.shape:
        raise InvalidScenario("matrices must have equal dimensions")
    n = A.shape[0]
    s = spectral_variation(A, B)
    diff = induced_norm(A - B, np.inf)
    total = induced_norm(A, np.inf) + induced_norm(B, np.inf)
    bound = n ** (1.0 / n) * diff ** (1.0 / n) * total ** (1 - 1.0 / n)
    # eigenvalues carry O(eps * scale) rounding
    slack = 1e-9 * max(1.0, total)
    return OstrowskiElsnerCheck(s, bound, bool(s <= bound + slack))


def symmetric_overlearning_check(A, E, tol: float = 1e-12) -> CertificateReport:
    """Symmetric stochastic ``A`` with some rate at least 2 is never zero-convergent."""
    A = as_matrix(A)
    E = as_rates(E, A.shape[0])
    if not np.allclose(A, A.T, rtol=0, atol=tol):
        raise NotApplicable("A is not symmetric")
    if not is_row_stochastic(A):
        raise NotApplicable("A is not row stochastic")
    if E.max() < 2:
        raise NotApplicable("no learning rate reaches 2")
    M = recompose(A, E)
    eigs = np.linalg.eigvalsh((M + M.T) / 2)
    lo = float(eigs[0])
    wit = {
        "min_eigenvalue": lo,
        "spectral_radius": float(np.abs(eigs).max()),
        "overlearners": [int(i) + 1 for i in np.flatnonzero(E >= 2)],
        "min_eigenvalue_at_most_minus_one": bool(lo <= -1 + 1e-9),
    }
    return CertificateReport(Verdict.NOT_ZERO_CONVERGENT, SYMMETRIC_OVERLEARNING, wit)


__all__ = [
    "CertificateReport",
    "ExtremalQuery",
    "MixedNormProfile",
    "OneLearnerBounds",
    "OstrowskiElsnerCheck",
    "Verdict",
    "admissible_gap",
    "build_high_ratio_example",
    "certify_impaired",
    "certify_mixed_norm",
    "certify_time_invariant",
    "certify_vanishing_rates",
    "fn_empirical",
    "fn_lower_bound",
    "fn_small_exact",
    "fn_threshold",
    "minimal_tau_prime",
    "mixed_norm_profile",
    "one_learner_bounds",
    "oe_infty_check",
    "spectral_variation",
    "symmetric_overlearning_check",
]
