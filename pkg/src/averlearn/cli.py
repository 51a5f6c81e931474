"""Command-line front end: ``averlearn {analyze,certify,simulate,noise} SCENARIO``.

Exit codes: 0 success, 2 unreadable or malformed scenario, 3 scenario is
well formed but unusable for the command, 4 output could not be written.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import certify as cert
from .dynamics import simulate
from .errors import AverLearnError, ScenarioParseError
from .graph_analysis import (
    build_digraph,
    index_of_contraction,
    is_condensely_anchored,
    is_condensely_aperiodic,
    strongly_connected_components,
)
from .matrix_core import classify_rows, induced_norm, recompose, spectral_radius
from .scenario_io import bundled_names, load_scenario
from .schedules import BlockAlternatingSchedule, FJSchedule, ScheduleWindow
from .stochastic import (
    check_small_gain,
    schedule_gains,
    simulate_noisy,
    w1_time_profile,
    write_ensemble_csv,
)

EXIT_OK, EXIT_PARSE, EXIT_SEMANTIC, EXIT_IO = 0, 2, 3, 4


class _IOFailure(Exception):
    pass


def _dumps(obj) -> str:
    return json.dumps(cert._jsonable(obj), indent=2, sort_keys=True)


def _emit(args, report: dict, lines: list[str]) -> None:
    if args.json:
        print(_dumps(report))
    else:
        print("\n".join(lines))


def _write_text(path: str, text: str) -> None:
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise _IOFailure(f"cannot write {path}: {exc}") from exc


def _sample_times(s) -> list[int]:
    if s.schedule.time_invariant:
        return [0]
    T = s.horizon
    return sorted({0, 1 % T, T // 2, T - 1})


# -- analyze ----------------------------------------------------------------

def _analyze_pair(A, E, zero_tol: float) -> dict:
    B = recompose(A, E)
    G = build_digraph(B, zero_tol)
    dec = strongly_connected_components(G)
    GA = build_digraph(A, zero_tol)
    rep = is_condensely_anchored(A, E, zero_tol)
    row_class = classify_rows(B)
    index = index_of_contraction(B) if row_class.value != "General" else None
    labels = {c: "{" + ",".join(map(str, sorted(comp))) + "}" for c, comp in enumerate(dec.components, 1)}
    return {
        "row_class": row_class.value,
        "sccs": [sorted(c) for c in dec.components],
        "sinks": [sorted(dec.components[c - 1]) for c in sorted(dec.sinks)],
        "periods": {labels[c]: (p if isinstance(p, int) else repr(p)) for c, p in dec.periods.items()},
        "condensation_dot": dec.condensation.to_dot("condensation", labels),
        "anchors": rep.to_json(),
        "condensely_anchored": rep.condensely_anchored,
        "averaging_condensely_aperiodic": is_condensely_aperiodic(GA),
        "error_condensely_aperiodic": is_condensely_aperiodic(G),
        "index_of_contraction": index,
        "norm_inf": induced_norm(B, np.inf),
        "spectral_radius": spectral_radius(B),
    }


def cmd_analyze(args) -> int:
    s = load_scenario(args.scenario)
    out = {"scenario": s.name, "n": s.n, "samples": {}}
    lines = [f"scenario {s.name} (n={s.n}, schedule={s.schedule.kind})"]
    if isinstance(s.schedule, FJSchedule):
        lines.append("FJ model: analysing diag(susceptibility) * A")
    for t in _sample_times(s):
        A, E = s.schedule.check(t)
        res = _analyze_pair(A, E, args.zero_tol)
        out["samples"][str(t)] = res
        idx = res["index_of_contraction"]
        lines += [
            f"t={t}: A - E is {res['row_class']}",
            f"  SCCs: {res['sccs']}   sinks: {res['sinks']}",
            f"  periods: {res['periods']}",
            f"  anchors: {res['anchors']['anchors']}  defective: {res['anchors']['defective']}"
            f"  overlearners: {res['anchors']['non_anchor_overlearners']}",
            f"  condensely anchored: {res['condensely_anchored']}",
            f"  condensely aperiodic (A): {res['averaging_condensely_aperiodic']}",
            f"  index of contraction: {'n/a' if idx is None else ('inf' if idx == math.inf else idx)}",
            f"  spectral radius: {res['spectral_radius']:.12g}",
            "  condensation:",
            *("    " + ln for ln in res["condensation_dot"].strip().splitlines()),
        ]
    if args.out:
        _write_text(args.out, _dumps(out) + "\n")
    _emit(args, out, lines)
    return EXIT_OK


# -- certify ----------------------------------------------------------------

def _gain_bound(sched, w: ScheduleWindow) -> float | None:
    """A bound on every ``||B_t||_inf``, known from the schedule's structure."""
    if isinstance(sched, BlockAlternatingSchedule):
        return max(sched.b1, sched.b2)
    if sched.period is not None and sched.period <= w.horizon:
        return max(induced_norm(w.error_matrix(t), np.inf) for t in range(sched.period))
    return None


def certify_scenario(s, tol: float) -> dict:
    """Run every certifier that applies to ``s``; returns a JSON-ready dict."""
    sched = s.schedule
    reports: dict[str, cert.CertificateReport] = {}
    if isinstance(sched, FJSchedule):
        try:
            reports["impaired"] = cert.certify_impaired(sched.B)
        except AverLearnError:
            reports["time_invariant"] = cert.certify_time_invariant(sched.A, np.zeros(s.n), tol)
    elif sched.time_invariant:
        A, E = sched.check(0)
        reports["time_invariant"] = cert.certify_time_invariant(A, E, tol)
    else:
        w = ScheduleWindow(sched, s.horizon)
        if s.horizon >= 2:
            reports["mixed_norm"] = cert.certify_mixed_norm(w)
        reports["vanishing_rates"] = cert.certify_vanishing_rates(w)
    primary = next((k for k, r in reports.items() if r.converges), None)
    if primary is None:
        primary = next((k for k, r in reports.items() if r.verdict is not cert.Verdict.INCONCLUSIVE),
                       next(iter(reports)))
    out = {"primary": primary, **{k: r.to_json() for k, r in reports.items()}}
    if s.noise is not None and s.noise.kind != "zero":
        w = ScheduleWindow(sched, s.horizon)
        if isinstance(sched, FJSchedule):
            gain = check_small_gain(induced_norm(sched.B, np.inf), s.horizon)
        elif sched.time_invariant:
            gain = check_small_gain(induced_norm(w.error_matrix(0), np.inf), s.horizon)
        else:
            gain = check_small_gain(schedule_gains(w), s.horizon, uniform_bound=_gain_bound(sched, w))
        out["small_gain"] = gain.to_json()
    return out


def cmd_certify(args) -> int:
    s = load_scenario(args.scenario)
    res = certify_scenario(s, args.tol)
    main = res[res["primary"]]
    lines = [
        f"scenario {s.name}",
        f"verdict: {main['verdict']}",
        f"fired rule: {main['fired_rule']}",
        "witnesses:",
        *(f"  {k}: {v}" for k, v in main["witnesses"].items()),
    ]
    if main["notes"]:
        lines.append(f"notes: {main['notes']}")
    for k in res:
        if k not in ("primary", res["primary"], "small_gain"):
            lines.append(f"also ran {k}: {res[k]['verdict']} ({res[k]['fired_rule']})")
    if "small_gain" in res:
        g = res["small_gain"]
        lines.append(f"small gain: holds={g['holds']} Lambda={g['Lambda']} K={g['K']} c={g['c']}")
    if args.out:
        _write_text(args.out, _dumps(res) + "\n")
    _emit(args, res, lines)
    return EXIT_OK


# -- simulate ---------------------------------------------------------------

def _png_path(out: str | None, default: str) -> str:
    return str(Path(out).with_suffix(".png")) if out else default


def cmd_simulate(args) -> int:
    s = load_scenario(args.scenario)
    if s.noise is not None and s.noise.kind != "zero":
        print("note: noise specification ignored by simulate", file=sys.stderr)
    s.noise = None
    if args.tol is not None:
        s.tol = args.tol
    traj = simulate(s)
    text = traj.to_csv()
    if args.out:
        _write_text(args.out, text)
    elif not args.json:
        sys.stdout.write(text)
    summary = {
        "scenario": s.name,
        "converged_at": traj.converged_at,
        "final_error": float(traj.errors[-1]),
        "bound_kind": traj.bound_kind,
        "max_bound_violation": traj.bound_violation(),
        "final_state": traj.states[-1],
        "notes": traj.notes,
    }
    if args.plot:
        try:
            from .plotting import plot_trajectory

            summary["figure"] = plot_trajectory(traj, _png_path(args.out, f"{s.name}.png"), s.name)
        except OSError as exc:
            raise _IOFailure(str(exc)) from exc
    lines = [
        f"converged_at: {traj.converged_at}",
        f"final error: {traj.errors[-1]:.6g}",
        f"bound: {traj.bound_kind or 'none'}",
    ]
    if args.out or args.json:
        _emit(args, summary, lines)
    else:
        print("\n".join(lines), file=sys.stderr)
    return EXIT_OK


# -- noise ------------------------------------------------------------------

def _default_checkpoints(T: int) -> list[int]:
    return sorted({round(T * k / 10) for k in range(11)})


def _single_limit_flag(profile: list[float], spread: float, trials: int) -> bool | None:
    """True when consecutive checkpoint laws keep a gap well above sampling noise."""
    if len(profile) < 4:
        return None
    tail = min(profile[-4:])
    floor = 5 * spread / math.sqrt(trials)
    return bool(tail > max(0.25 * max(profile), floor))


def cmd_noise(args) -> int:
    s = load_scenario(args.scenario)
    if s.noise is None:
        raise AverLearnError("scenario has no 'noise' key")
    trials = args.trials if args.trials is not None else s.trials
    seed = args.seed if args.seed is not None else s.seed
    cps = s.checkpoints or _default_checkpoints(s.horizon)
    ens = simulate_noisy(s, trials=trials, seed=seed, jobs=args.jobs, checkpoints=cps)
    profile = w1_time_profile(ens, s.coordinate, cps, min_trials=1)
    if args.out:
        try:
            with open(args.out, "w", encoding="utf-8", newline="") as fh:
                write_ensemble_csv(ens, fh, s.coordinate, cps)
        except OSError as exc:
            raise _IOFailure(f"cannot write {args.out}: {exc}") from exc
    res = certify_scenario(s, args.tol)
    gain = res.get("small_gain")
    last = ens.marginal(cps[-1], s.coordinate)
    split = _single_limit_flag(profile, float(np.std(last)), trials)
    summary = {
        "scenario": s.name,
        "trials": trials,
        "seed": seed,
        "final_mean_error": float(ens.mean_err[-1]),
        "final_max_error": float(ens.max_err[-1]),
        "checkpoints": cps,
        "w1_profile": profile,
        "no_single_limit_law": split,
        "small_gain": gain,
    }
    if args.plot:
        from .plotting import plot_ensemble

        try:
            summary["figure"] = plot_ensemble(ens, _png_path(args.out, f"{s.name}_noise.png"), cps, profile, s.name)
        except OSError as exc:
            raise _IOFailure(str(exc)) from exc
    lines = [
        f"scenario {s.name}: {trials} trials, seed {seed}",
        f"final mean error {ens.mean_err[-1]:.6g}, max error {ens.max_err[-1]:.6g}",
        "W1 profile: " + ", ".join(f"{v:.4g}" for v in profile),
    ]
    if split:
        lines.append("no single limit law: block-end laws keep alternating")
    elif split is False:
        lines.append("profile settling towards a single limit law")
    if gain:
        lines.append(f"small gain: holds={gain['holds']} Lambda={gain['Lambda']} K={gain['K']} c={gain['c']}")
    if trials < 1000:
        lines.append("note: fewer than 1000 trials; W1 estimates are coarse")
    _emit(args, summary, lines)
    return EXIT_OK


# -- entry point ------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="averlearn", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    names = ", ".join(bundled_names())
    for name, fn, helptext in (
        ("analyze", cmd_analyze, "graph structure, anchors and index of contraction"),
        ("certify", cmd_certify, "convergence certificates"),
        ("simulate", cmd_simulate, "deterministic trajectory as CSV"),
        ("noise", cmd_noise, "Monte-Carlo ensemble summary as CSV"),
    ):
        sp = sub.add_parser(name, help=helptext)
        sp.add_argument("scenario", help=f"scenario JSON file or bundled name ({names})")
        sp.add_argument("--out", help="output file (CSV for simulate/noise, JSON otherwise)")
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--trials", type=int, default=None)
        sp.add_argument("--jobs", type=int, default=1, help="threads for Monte-Carlo trials")
        sp.add_argument("--tol", type=float, default=None)
        sp.add_argument("--zero-tol", type=float, default=0.0, help="entries at or below this are treated as absent arcs")
        sp.add_argument("--json", action="store_true", help="print a JSON report on stdout")
        sp.add_argument("--plot", action="store_true", help="also render a PNG next to --out")
        sp.set_defaults(func=fn)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command != "simulate" and args.tol is None:
        args.tol = 1e-9
    try:
        return args.func(args)
    except ScenarioParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except _IOFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except AverLearnError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SEMANTIC


if __name__ == "__main__":
    sys.exit(main())
