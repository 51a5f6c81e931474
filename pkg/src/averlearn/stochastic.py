"""Noisy dynamics, Monte-Carlo ensembles and Wasserstein-1 diagnostics.

Randomness is counter based: the disturbance added at step ``t`` to trial
``k`` is a pure function of ``(seed, t, k)``. Each step owns a Philox key
derived from ``(seed, t)`` and trial ``k`` reads a fixed-width slice of that
stream, so ensembles are reproducible however the trials are partitioned.
"""
from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import InvalidInput, InvalidScenario
from .dynamics import Scenario, advance, fj_equilibrium
from .matrix_core import induced_norm, recompose
from .schedules import BlockAlternatingSchedule, FJSchedule, ScheduleWindow

CHUNK = 1024


# -- distributions ----------------------------------------------------------

@dataclass(frozen=True)
class Distribution:
    """One of ``uniform(a, b)``, ``gaussian(mean, sd)``, ``two_point(p, x1, x2)``, ``degenerate(c)``.

    ``two_point`` puts mass ``p`` on ``x1`` and ``1 - p`` on ``x2``.
    """

    kind: str
    params: tuple

    _ARITY = {"uniform": 2, "gaussian": 2, "two_point": 3, "degenerate": 1}

    def __post_init__(self):
        if self.kind not in self._ARITY:
            raise InvalidScenario(f"unknown distribution {self.kind!r}")
        if len(self.params) != self._ARITY[self.kind]:
            raise InvalidScenario(f"{self.kind} takes {self._ARITY[self.kind]} parameters")
        if not all(math.isfinite(p) for p in self.params):
            raise InvalidScenario("distribution parameters must be finite")
        if self.kind == "uniform" and not self.params[0] < self.params[1]:
            raise InvalidScenario("uniform needs a < b")
        if self.kind == "gaussian" and self.params[1] < 0:
            raise InvalidScenario("gaussian needs sd >= 0")
        if self.kind == "two_point" and not 0 <= self.params[0] <= 1:
            raise InvalidScenario("two_point needs 0 <= p <= 1")

    @property
    def uniforms_per_draw(self) -> int:
        return 2 if self.kind == "gaussian" else 1

    @property
    def mean(self) -> float:
        k, p = self.kind, self.params
        if k == "uniform":
            return (p[0] + p[1]) / 2
        if k == "gaussian":
            return p[0]
        if k == "two_point":
            return p[0] * p[1] + (1 - p[0]) * p[2]
        return p[0]

    @property
    def scale(self) -> float:
        """Bound on ``|gamma|`` (ten standard deviations for Gaussians)."""
        k, p = self.kind, self.params
        if k == "uniform":
            return max(abs(p[0]), abs(p[1]))
        if k == "gaussian":
            return abs(p[0]) + 10 * p[1]
        if k == "two_point":
            return max(abs(p[1]), abs(p[2]))
        return abs(p[0])

    @property
    def degenerate(self) -> bool:
        k, p = self.kind, self.params
        if k == "degenerate":
            return True
        if k == "gaussian":
            return p[1] == 0
        if k == "two_point":
            return p[0] in (0, 1) or p[1] == p[2]
        return False

    def from_uniforms(self, u: np.ndarray) -> np.ndarray:
        """Map uniforms on ``[0, 1)`` to variates; the last axis holds ``uniforms_per_draw`` values per variate."""
        k, p = self.kind, self.params
        if k == "uniform":
            return p[0] + (p[1] - p[0]) * u
        if k == "gaussian":
            u1 = u[..., 0::2]
            u2 = u[..., 1::2]
            z = np.sqrt(-2.0 * np.log1p(-u1)) * np.cos(2 * np.pi * u2)
            return p[0] + p[1] * z
        if k == "two_point":
            return np.where(u < p[0], p[1], p[2])
        return np.full(u.shape, float(p[0]))

    def sample(self, rng: np.random.Generator, shape) -> np.ndarray:
        shape = tuple(np.atleast_1d(shape))
        u = rng.random(shape[:-1] + (shape[-1] * self.uniforms_per_draw,))
        return self.from_uniforms(u)

    def to_json(self) -> dict:
        return {"kind": self.kind, "params": list(self.params)}


def uniform(a: float, b: float) -> Distribution:
    return Distribution("uniform", (float(a), float(b)))


def gaussian(mean: float, sd: float) -> Distribution:
    return Distribution("gaussian", (float(mean), float(sd)))


def two_point(p: float, x1: float, x2: float) -> Distribution:
    return Distribution("two_point", (float(p), float(x1), float(x2)))


def degenerate(c: float) -> Distribution:
    return Distribution("degenerate", (float(c),))


@dataclass(frozen=True)
class NoiseSpec:
    """Additive disturbance ``r_t``.

    kinds: ``zero``; ``iid`` (fresh draws each step); ``vanishing`` (draws
    scaled by ``(t+1)**-power``). With ``independent`` false every
    coordinate receives the same draw.
    """

    kind: str = "zero"
    distribution: Distribution | None = None
    power: float = 2.0
    independent: bool = True

    def __post_init__(self):
        if self.kind not in ("zero", "iid", "vanishing"):
            raise InvalidScenario(f"unknown noise kind {self.kind!r}")
        if self.kind != "zero" and self.distribution is None:
            raise InvalidScenario(f"{self.kind} noise needs a distribution")
        if self.kind == "vanishing" and self.power <= 0:
            raise InvalidScenario("vanishing noise needs power > 0")

    def scale_at(self, t: int) -> float:
        if self.kind == "zero":
            return 0.0
        if self.kind == "vanishing":
            return (t + 1.0) ** (-self.power)
        return 1.0

    def to_json(self) -> dict:
        out = {"kind": self.kind, "independent": self.independent}
        if self.distribution is not None:
            out["distribution"] = self.distribution.to_json()
        if self.kind == "vanishing":
            out["power"] = self.power
        return out


def _row_width(noise: NoiseSpec, n: int) -> int:
    per = noise.distribution.uniforms_per_draw if noise.distribution else 1
    w = (n if noise.independent else 1) * per
    return -(-w // 4) * 4


def step_uniforms(seed: int, t: int, start: int, count: int, width: int) -> np.ndarray:
    """Uniforms for trials ``start .. start+count-1`` at step ``t``; ``width`` is a multiple of 4."""
    key = np.random.SeedSequence([int(seed), int(t)]).generate_state(2, np.uint64)
    bg = np.random.Philox(key=key)
    # Philox emits 4 words per counter and random() uses one word per double
    bg.advance(start * width // 4)
    return np.random.Generator(bg).random((count, width))


def draw_noise(noise: NoiseSpec, n: int, seed: int, t: int, start: int, count: int) -> np.ndarray | None:
    if noise.kind == "zero":
        return None
    dist = noise.distribution
    width = _row_width(noise, n)
    u = step_uniforms(seed, t, start, count, width)
    per = dist.uniforms_per_draw
    cols = n if noise.independent else 1
    g = dist.from_uniforms(u[:, : cols * per])
    if not noise.independent:
        g = np.repeat(g, n, axis=1)
    return noise.scale_at(t) * g


# -- small gain -------------------------------------------------------------

@dataclass
class SmallGainReport:
    rho_min: float
    rho_max: float
    Lambda_sup: float
    Lambda: float | None
    K: float | None
    c: float | None
    holds: bool
    analytic: bool = False
    notes: list[str] = field(default_factory=list)

    def to_json(self) -> dict:
        def f(x):
            if x is None:
                return None
            return "inf" if math.isinf(x) else float(x)

        return {
            "rho_min": f(self.rho_min),
            "rho_max": f(self.rho_max),
            "Lambda_sup": f(self.Lambda_sup),
            "Lambda": f(self.Lambda),
            "K": f(self.K),
            "c": f(self.c),
            "holds": self.holds,
            "analytic": self.analytic,
            "notes": "; ".join(self.notes),
        }


def _gain_constants(lam: float) -> tuple[float, float]:
    if lam == 0:
        return 1.0, math.inf
    return 1.0 + lam, math.log1p(1.0 / lam)


def check_small_gain(rho_supplier, T: int, family: str | None = None,
                     uniform_bound: float | None = None) -> SmallGainReport:
    """Track ``Lambda_t = rho_t (1 + Lambda_{t-1})`` for ``t = 1..T``.

    ``rho_supplier`` is a number (constant gains), a sequence indexed from
    ``t = 1``, or a callable ``t -> rho_t``. Constant gains below one are
    certified in closed form, as is any supplier with a known
    ``uniform_bound`` below one on every ``rho_t`` (then ``Lambda <= r/(1-r)``).
    Otherwise the window must show ``Lambda_t`` levelling off (late maximum
    no larger than early maximum).
    """
    if T < 1:
        raise InvalidScenario("T must be at least 1")
    if isinstance(rho_supplier, (int, float)) and not isinstance(rho_supplier, bool):
        const = float(rho_supplier)
        rhos = np.full(T, const)
        family = family or "constant"
    elif callable(rho_supplier):
        rhos = np.array([float(rho_supplier(t)) for t in range(1, T + 1)])
    else:
        rhos = np.asarray(list(rho_supplier), dtype=float)[:T]
        if rhos.size < T:
            raise InvalidScenario(f"gain sequence has {rhos.size} entries, need {T}")
    if np.any(rhos < 0) or not np.all(np.isfinite(rhos)):
        raise InvalidScenario("gains must be finite and nonnegative")

    lam = np.empty(T)
    prev = 0.0
    for i, r in enumerate(rhos):
        prev = r * (1.0 + prev)
        lam[i] = prev
    sup = float(lam.max())
    rmin, rmax = float(rhos.min()), float(rhos.max())

    if family == "constant" and rmin == rmax:
        r = rmin
        if r < 1:
            L = r / (1 - r)
            K, c = _gain_constants(L)
            return SmallGainReport(r, r, sup, L, K, c, True, analytic=True)
        return SmallGainReport(r, r, sup, None, None, None, False, analytic=True,
                               notes=["constant gain >= 1: Lambda_t grows without bound"])

    if uniform_bound is not None and uniform_bound < 1:
        if rmax > uniform_bound + 1e-12:
            raise InvalidScenario(f"gain {rmax} exceeds the declared bound {uniform_bound}")
        L = uniform_bound / (1 - uniform_bound)
        K, c = _gain_constants(L)
        return SmallGainReport(rmin, rmax, sup, L, K, c, True, analytic=True,
                               notes=[f"every gain is at most {uniform_bound!r}"])

    half = max(1, T // 2)
    early = float(lam[:half].max())
    late = float(lam[half:].max()) if T > half else early
    holds = late <= early + 1e-9
    if holds:
        K, c = _gain_constants(sup)
        return SmallGainReport(rmin, rmax, sup, sup, K, c, True,
                               notes=["Lambda bounded on the window (windowed evidence)"])
    return SmallGainReport(rmin, rmax, sup, None, None, None, False,
                           notes=["Lambda_t still growing at the end of the window"])


def schedule_gains(w: ScheduleWindow) -> Callable[[int], float]:
    """``t -> ||B_{t-1}||_inf``, the gain of the step that produces ``Y_t``."""
    return lambda t: induced_norm(w.error_matrix(t - 1), np.inf)


# -- ensembles --------------------------------------------------------------

@dataclass
class Ensemble:
    trials: int
    horizon: int
    mean_err: np.ndarray
    max_err: np.ndarray
    final_errors: np.ndarray
    checkpoint_states: dict[int, np.ndarray]
    reference: np.ndarray
    errors: np.ndarray | None = None
    seed: int = 0

    def marginal(self, t: int, coordinate: int) -> np.ndarray:
        if t not in self.checkpoint_states:
            raise InvalidInput(f"time {t} was not recorded")
        return self.checkpoint_states[t][:, coordinate - 1]


def _dynamics(s: Scenario):
    """Per-step (A_t, E_t, sigma) plus the affine offset for FJ models."""
    if isinstance(s.schedule, FJSchedule):
        lam = s.schedule.susceptibility
        LA = lam[:, None] * s.schedule.A
        offset = (1 - lam) * s.x0
        ref = fj_equilibrium(lam, s.schedule.A, s.x0)
        return (lambda t: (LA, None)), offset, ref
    sigma = s.sigma_bar

    def get(t):
        A, E = s.schedule.check(t)
        return A, E

    return get, None, sigma


def _run_chunk(s: Scenario, noise: NoiseSpec, seed: int, start: int, count: int,
               record: set[int], keep_paths: bool, mats: list):
    n, T = s.n, s.horizon
    X = np.tile(s.x0, (count, 1))
    ref = mats[-1]
    err_sum = np.empty(T + 1)
    err_max = np.empty(T + 1)
    paths = np.empty((count, T + 1)) if keep_paths else None
    states = {}

    def log(t):
        e = np.abs(X - ref).max(axis=1)
        err_sum[t] = e.sum()
        err_max[t] = e.max()
        if paths is not None:
            paths[:, t] = e
        if t in record:
            states[t] = X.copy()
        return e

    e = log(0)
    for t in range(T):
        A, E, offset = mats[t]
        r = draw_noise(noise, n, seed, t, start, count)
        if E is None:
            X = X @ A.T + offset
            if r is not None:
                X += r
        else:
            X = advance(A, E, s.sigma_bar, X, r)
        e = log(t + 1)
    return err_sum, err_max, e, states, paths


def simulate_noisy(s: Scenario, trials: int | None = None, seed: int | None = None,
                   jobs: int = 1, checkpoints: Iterable[int] | None = None,
                   keep_paths: bool | None = None) -> Ensemble:
    """Monte-Carlo ensemble of the noisy recursion.

    Trials are grouped in fixed chunks of ``CHUNK`` and summaries are
    reduced in chunk order, so ``jobs`` never changes the output.
    """
    noise = s.noise
    if noise is None:
        raise InvalidScenario("scenario has no noise specification")
    if not isinstance(noise, NoiseSpec):
        raise InvalidScenario("noise must be a NoiseSpec")
    if not isinstance(s.schedule, FJSchedule) and not s.is_consensus_truth:
        raise InvalidScenario("noisy runs need a consensus truth sigma * 1")
    trials = s.trials if trials is None else int(trials)
    seed = s.seed if seed is None else int(seed)
    if trials < 1:
        raise InvalidScenario("trials must be positive")
    T = s.horizon
    cps = sorted(set(checkpoints if checkpoints is not None else (s.checkpoints or [])))
    if any(c < 0 or c > T for c in cps):
        raise InvalidInput("checkpoint beyond horizon")
    record = set(cps) | {T}
    if keep_paths is None:
        keep_paths = trials * (T + 1) <= 10_000_000

    get, offset, ref = _dynamics(s)
    mats = []
    for t in range(T):
        A, E = get(t)
        if E is not None:
            if np.abs(A @ s.sigma_bar - s.sigma_bar).max() >= 1e-12:
                raise InvalidScenario(f"A_t does not fix sigma_bar at t={t}")
        mats.append((A, E, offset))
    mats.append(ref)

    chunks = [(a, min(CHUNK, trials - a)) for a in range(0, trials, CHUNK)]

    def work(ch):
        return _run_chunk(s, noise, seed, ch[0], ch[1], record, keep_paths, mats)

    if jobs > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(work, chunks))
    else:
        results = [work(ch) for ch in chunks]

    total = np.zeros(T + 1)
    mx = np.full(T + 1, -np.inf)
    for err_sum, err_max, *_ in results:
        total += err_sum
        mx = np.maximum(mx, err_max)
    final = np.concatenate([r[2] for r in results])
    states = {t: np.concatenate([r[3][t] for r in results]) for t in record}
    paths = np.concatenate([r[4] for r in results]) if keep_paths else None
    return Ensemble(trials, T, total / trials, mx, final, states, np.asarray(ref), paths, seed)


# -- Wasserstein ------------------------------------------------------------

class EmpiricalDistribution:
    """Finite sample of a law on the line; sorted lazily."""

    def __init__(self, samples):
        arr = np.asarray(samples, dtype=float).ravel()
        if arr.size == 0:
            raise InvalidInput("empirical distribution needs at least one sample")
        if not np.all(np.isfinite(arr)):
            raise InvalidInput("samples must be finite")
        self.samples = arr
        self._sorted: np.ndarray | None = None

    @property
    def sorted(self) -> np.ndarray:
        if self._sorted is None:
            self._sorted = np.sort(self.samples)
        return self._sorted

    def __len__(self) -> int:
        return self.samples.size

    def mean(self) -> float:
        return float(self.samples.mean())


def _as_empirical(x) -> EmpiricalDistribution:
    return x if isinstance(x, EmpiricalDistribution) else EmpiricalDistribution(x)


def empirical_w1_1d(a, b) -> float:
    """Exact W1 between two empirical laws on the line.

    Equal sample counts use the order-statistics formula; unequal counts
    integrate ``|F_a - F_b|`` over the merged support.
    """
    a, b = _as_empirical(a), _as_empirical(b)
    xa, xb = a.sorted, b.sorted
    if xa.size == xb.size:
        return float(np.abs(xa - xb).mean())
    grid = np.concatenate([xa, xb])
    grid.sort(kind="mergesort")
    Fa = np.searchsorted(xa, grid[:-1], side="right") / xa.size
    Fb = np.searchsorted(xb, grid[:-1], side="right") / xb.size
    return float(np.sum(np.abs(Fa - Fb) * np.diff(grid)))


def truncation_length(b: float, dist: Distribution, eps: float = 1e-12) -> int:
    """Smallest ``K`` with ``b**K * scale < eps``."""
    scale = dist.scale
    if scale == 0:
        return 1
    return max(1, math.floor(math.log(eps / scale) / math.log(b)) + 1)


def stationary_law_sample(b: float, dist: Distribution, K: int | None = None, m: int = 10_000,
                          seed: int = 0) -> EmpiricalDistribution:
    """``m`` draws of ``sum_{k<K} b**k gamma_k``, the stationary law of ``Y = b Y + gamma``."""
    if not 0 < b < 1:
        raise InvalidInput("b must lie in (0, 1)")
    if m < 1:
        raise InvalidInput("m must be positive")
    K = truncation_length(b, dist) if K is None else int(K)
    rng = np.random.default_rng([int(seed), 0x5EED])
    g = dist.sample(rng, (m, K))
    acc = np.zeros(m)
    for k in range(K - 1, -1, -1):
        acc = acc * b + g[:, k]
    return EmpiricalDistribution(acc)


# -- block counterexample ---------------------------------------------------

def block_counterexample(b1: float, b2: float, m_max: int, dist: Distribution, seed: int = 0,
                         trials: int = 10_000) -> Scenario:
    """Scalar system alternating contraction ``b1`` / ``b2`` over blocks of growing length.

    Block ends are recorded as checkpoints. Every gain is at most
    ``max(b1, b2) < 1``, yet the block-end laws alternate between two
    stationary laws.
    """
    if not 0 < b1 < 1 or not 0 < b2 < 1:
        raise InvalidScenario("need b1, b2 in (0, 1)")
    if b1 > b2:
        raise InvalidScenario("need b1 <= b2")
    sched = BlockAlternatingSchedule(b1, b2, m_max)
    return Scenario(
        n=1,
        sigma_bar=np.zeros(1),
        x0=np.zeros(1),
        schedule=sched,
        horizon=sched.horizon,
        noise=NoiseSpec("iid", dist),
        seed=seed,
        trials=trials,
        checkpoints=[int(e) for e in sched.ends],
        name="block_counterexample",
    )


# -- two-step gains ---------------------------------------------------------

@dataclass
class TwoStepGains:
    rho0: np.ndarray
    rho1: np.ndarray
    block_norms: np.ndarray
    verified: bool
    failing: list[int]


def two_step_gains(w: ScheduleWindow) -> TwoStepGains:
    """Even/odd two-step gains and a direct check of ``||B_{2k+1} B_{2k}||_inf <= rho0_k``."""
    from .certify import mixed_norm_profile

    if w.horizon < 3:
        raise InvalidScenario("two-step gains need a window of at least 3 steps")
    n = w.n
    prof = mixed_norm_profile(w)
    if prof.failing:
        return TwoStepGains(np.empty(0), np.empty(0), np.empty(0), False, prof.failing)
    tau, tp = prof.tau, prof.tau_prime
    K0 = (w.horizon - 1) // 2
    K1 = (w.horizon - 2) // 2
    rho0 = np.array([(n - tau[2 * k]) / (n - tp[2 * k + 1]) for k in range(K0)])
    rho1 = np.array([(n - tau[2 * k + 1]) / (n - tp[2 * k + 2]) for k in range(K1)])
    norms = np.array([
        induced_norm(w.error_matrix(2 * k + 1) @ w.error_matrix(2 * k), np.inf) for k in range(K0)
    ])
    verified = bool(np.all(norms <= rho0 + 1e-12))
    return TwoStepGains(rho0, rho1, norms, verified, [])


# -- diagnostics ------------------------------------------------------------

def w1_time_profile(ensemble: Ensemble, coordinate: int, checkpoints: Sequence[int],
                    min_trials: int = 1000) -> list[float]:
    """W1 between the laws of coordinate ``coordinate`` at consecutive checkpoints."""
    if ensemble.trials < min_trials:
        raise InvalidInput(f"need at least {min_trials} trials, have {ensemble.trials}")
    cps = list(checkpoints)
    if any(c > ensemble.horizon or c < 0 for c in cps):
        raise InvalidInput("checkpoint beyond horizon")
    laws = [ensemble.marginal(c, coordinate) for c in cps]
    return [empirical_w1_1d(laws[i], laws[i + 1]) for i in range(len(laws) - 1)]


def write_ensemble_csv(ens: Ensemble, fh, coordinate: int = 1,
                       checkpoints: Sequence[int] | None = None) -> list[float]:
    """Write ``t, mean_err, max_err, w1_vs_prev_checkpoint``; returns the W1 profile."""
    cps = sorted(checkpoints) if checkpoints else []
    profile = w1_time_profile(ens, coordinate, cps, min_trials=1) if len(cps) > 1 else []
    w1_at = {cps[i + 1]: v for i, v in enumerate(profile)}
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["t", "mean_err", "max_err", "w1_vs_prev_checkpoint"])
    for t in range(ens.horizon + 1):
        v = w1_at.get(t)
        w.writerow([t, repr(float(ens.mean_err[t])), repr(float(ens.max_err[t])),
                    "" if v is None else repr(float(v))])
    return profile


def ensemble_csv(ens: Ensemble, coordinate: int = 1, checkpoints=None) -> str:
    buf = io.StringIO()
    write_ensemble_csv(ens, buf, coordinate, checkpoints)
    return buf.getvalue()
