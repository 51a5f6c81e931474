"""Scenario files: JSON documents describing one experiment.

Numbers may be JSON numbers or exact rational strings such as ``"2/5"``.
Malformed documents raise :class:`ScenarioParseError`; well-formed ones
that describe an impossible system raise :class:`InvalidScenario`.
"""
from __future__ import annotations

import json
from importlib import resources
from pathlib import Path
from typing import Any

import numpy as np

from .dynamics import Scenario
from .errors import InvalidMatrix, InvalidScenario, ScenarioParseError
from .matrix_core import decompose_substochastic, parse_fraction
from .schedules import (
    BlockAlternatingSchedule,
    ConstantSchedule,
    TwoStepSchedule,
    FJSchedule,
    GeometricSchedule,
    HarmonicSplitSchedule,
    SequenceSchedule,
    TailLogSchedule,
)
from .stochastic import Distribution, NoiseSpec

TOP_KEYS = {
    "n", "sigma_bar", "x0", "schedule", "noise", "horizon", "tol", "seed", "trials",
    "checkpoints", "coordinate", "name", "description",
}
REQUIRED = ("n", "sigma_bar", "x0", "schedule", "horizon")

SCHEDULE_KEYS = {
    "constant": ({"A", "E", "B"}, set()),
    "sequence": ({"A", "E"}, {"A", "E"}),
    "two_step": (set(), set()),
    "harmonic_split": ({"zero_even", "A"}, set()),
    "tail_log": ({"T", "c"}, {"T", "c"}),
    "geometric": ({"r0", "q", "A"}, set()),
    "block_alternating": ({"b1", "b2", "blocks"}, {"b1", "b2", "blocks"}),
    "fj": ({"A", "susceptibility"}, {"A", "susceptibility"}),
}
NOISE_KEYS = {"kind", "distribution", "power", "independent", "dependent"}


def _num(x, where: str) -> float:
    if isinstance(x, bool) or not isinstance(x, (int, float, str)):
        raise ScenarioParseError(f"{where}: expected a number or 'p/q' string, got {x!r}")
    try:
        return float(parse_fraction(x))
    except InvalidMatrix as exc:
        raise ScenarioParseError(f"{where}: {exc}") from exc


def _int(x, where: str) -> int:
    if isinstance(x, bool) or not isinstance(x, int):
        raise ScenarioParseError(f"{where}: expected an integer, got {x!r}")
    return x


def _vec(x, where: str) -> np.ndarray:
    if not isinstance(x, list):
        raise ScenarioParseError(f"{where}: expected an array")
    return np.array([_num(v, f"{where}[{i}]") for i, v in enumerate(x)])


def _mat(x, where: str) -> np.ndarray:
    if not isinstance(x, list) or not all(isinstance(r, list) for r in x):
        raise ScenarioParseError(f"{where}: expected an array of arrays")
    rows = [_vec(r, f"{where}[{i}]") for i, r in enumerate(x)]
    if len({len(r) for r in rows}) > 1:
        raise ScenarioParseError(f"{where}: ragged rows")
    return np.array(rows) if rows else np.zeros((0, 0))


def _check_keys(d: dict, allowed: set, where: str) -> None:
    extra = sorted(set(d) - allowed)
    if extra:
        raise ScenarioParseError(f"{where}: unknown keys {extra}")


def parse_schedule(d: Any, n: int):
    if not isinstance(d, dict) or "kind" not in d:
        raise ScenarioParseError("schedule: expected an object with a 'kind'")
    kind = d["kind"]
    if kind not in SCHEDULE_KEYS:
        raise ScenarioParseError(f"schedule: unknown kind {kind!r}")
    allowed, required = SCHEDULE_KEYS[kind]
    _check_keys(d, allowed | {"kind"}, "schedule")
    missing = sorted(required - set(d))
    if missing:
        raise ScenarioParseError(f"schedule: missing keys {missing}")
    try:
        if kind == "constant":
            if "B" in d:
                if "A" in d or "E" in d:
                    raise ScenarioParseError("schedule: give either B or (A, E)")
                A, E = decompose_substochastic(_mat(d["B"], "schedule.B"))
                return ConstantSchedule(A, E)
            if "A" not in d or "E" not in d:
                raise ScenarioParseError("schedule: constant needs A and E (or B)")
            return ConstantSchedule(_mat(d["A"], "schedule.A"), _vec(d["E"], "schedule.E"))
        if kind == "sequence":
            if not isinstance(d["A"], list) or not isinstance(d["E"], list):
                raise ScenarioParseError("schedule: sequence A and E must be arrays")
            As = [_mat(a, f"schedule.A[{i}]") for i, a in enumerate(d["A"])]
            Es = [_vec(e, f"schedule.E[{i}]") for i, e in enumerate(d["E"])]
            return SequenceSchedule(As, Es)
        if kind == "two_step":
            return TwoStepSchedule()
        if kind == "harmonic_split":
            zero_even = d.get("zero_even", True)
            if not isinstance(zero_even, bool):
                raise ScenarioParseError("schedule.zero_even must be a boolean")
            A = _mat(d["A"], "schedule.A") if "A" in d else None
            return HarmonicSplitSchedule(n, zero_even, A)
        if kind == "tail_log":
            return TailLogSchedule(n, _int(d["T"], "schedule.T"), _num(d["c"], "schedule.c"))
        if kind == "geometric":
            A = _mat(d["A"], "schedule.A") if "A" in d else None
            return GeometricSchedule(n, _num(d.get("r0", 0.5), "schedule.r0"),
                                     _num(d.get("q", 0.5), "schedule.q"), A)
        if kind == "block_alternating":
            return BlockAlternatingSchedule(_num(d["b1"], "schedule.b1"), _num(d["b2"], "schedule.b2"),
                                            _int(d["blocks"], "schedule.blocks"))
        return FJSchedule(_mat(d["A"], "schedule.A"), _vec(d["susceptibility"], "schedule.susceptibility"))
    except (InvalidMatrix, ValueError) as exc:
        if isinstance(exc, (ScenarioParseError, InvalidScenario)):
            raise
        raise InvalidScenario(f"schedule: {exc}") from exc


def parse_distribution(d: Any) -> Distribution:
    if not isinstance(d, dict):
        raise ScenarioParseError("noise.distribution: expected an object")
    _check_keys(d, {"kind", "params"}, "noise.distribution")
    if "kind" not in d or "params" not in d or not isinstance(d["params"], list):
        raise ScenarioParseError("noise.distribution: needs 'kind' and a 'params' array")
    params = tuple(_num(p, "noise.distribution.params") for p in d["params"])
    return Distribution(str(d["kind"]), params)


def parse_noise(d: Any) -> NoiseSpec:
    if not isinstance(d, dict):
        raise ScenarioParseError("noise: expected an object")
    _check_keys(d, NOISE_KEYS, "noise")
    if d.get("dependent", False):
        raise InvalidScenario("noise that depends on the past is not supported")
    kind = d.get("kind", "zero")
    dist = parse_distribution(d["distribution"]) if "distribution" in d else None
    power = _num(d.get("power", 2), "noise.power")
    independent = d.get("independent", True)
    if not isinstance(independent, bool):
        raise ScenarioParseError("noise.independent must be a boolean")
    return NoiseSpec(str(kind), dist, power, independent)


def parse_scenario(doc: Any, name: str = "") -> Scenario:
    if not isinstance(doc, dict):
        raise ScenarioParseError("scenario must be a JSON object")
    _check_keys(doc, TOP_KEYS, "scenario")
    missing = [k for k in REQUIRED if k not in doc]
    if missing:
        raise ScenarioParseError(f"scenario: missing keys {missing}")
    n = _int(doc["n"], "n")
    if n < 1:
        raise InvalidScenario("n must be positive")
    sb = doc["sigma_bar"]
    sigma = np.full(n, _num(sb, "sigma_bar")) if not isinstance(sb, list) else _vec(sb, "sigma_bar")
    x0 = _vec(doc["x0"], "x0")
    if sigma.size != n or x0.size != n:
        raise InvalidScenario("sigma_bar and x0 must have length n")
    schedule = parse_schedule(doc["schedule"], n)
    noise = parse_noise(doc["noise"]) if "noise" in doc else None
    cps = doc.get("checkpoints")
    if cps is not None:
        if not isinstance(cps, list):
            raise ScenarioParseError("checkpoints: expected an array of integers")
        cps = [_int(c, "checkpoints") for c in cps]
    return Scenario(
        n=n,
        sigma_bar=sigma,
        x0=x0,
        schedule=schedule,
        horizon=_int(doc["horizon"], "horizon"),
        noise=noise,
        tol=_num(doc.get("tol", 1e-9), "tol"),
        seed=_int(doc.get("seed", 0), "seed"),
        trials=_int(doc.get("trials", 1000), "trials"),
        checkpoints=cps,
        coordinate=_int(doc.get("coordinate", 1), "coordinate"),
        name=str(doc.get("name", name)),
    )


def bundled_names() -> list[str]:
    root = resources.files("averlearn") / "scenarios"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def resolve(path_or_name: str) -> Path | Any:
    p = Path(path_or_name)
    if p.exists():
        return p
    name = path_or_name[:-5] if path_or_name.endswith(".json") else path_or_name
    res = resources.files("averlearn") / "scenarios" / f"{name}.json"
    if res.is_file():
        return res
    raise FileNotFoundError(f"no scenario file or bundled scenario named {path_or_name!r}")


def load_scenario(path_or_name: str) -> Scenario:
    src = resolve(path_or_name)
    text = src.read_text(encoding="utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioParseError(f"malformed JSON: {exc}") from exc
    return parse_scenario(doc, name=Path(str(src)).stem)
