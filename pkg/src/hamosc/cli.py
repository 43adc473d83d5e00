"""Command-line front end.

Three subcommands:

* ``check``   run one criterion against a system (preset or JSON file) and
              write a verdict report;
* ``oracle``  integrate prepared solutions and report determinant zeros,
              with CSV traces and a JSON events block per trial;
* ``example`` run a preset's bundled criterion pipeline plus its oracle and
              emit a combined report including any documented notes.

Exit codes: 0 the run completed (whatever the verdict), 2 configuration
errors, 1 operational failures.  Reports embed the full tolerance set and
format floats at 17 significant digits, so identical configurations produce
byte-identical files.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .config import DEFAULT_INTEGRATOR, Tolerances
from .criteria import SChoice, corollary_check, suggest_S, theorem21_check, \
    theorem22_check, theorem25_check
from .hamsys import (
    SystemSpec, detect_det_zeros, integrate_system, make_prepared_initial,
    trace_events, trace_to_csv,
)
from .matfun import MatrixConfigError, MatrixFunction, parse_matrix_function
from .presets import PRESET_IDS, build_preset, preset_catalog, run_planned_checks
from .verdict import atomic_write_text, json_dumps

__all__ = ["main", "system_from_config", "ConfigError"]


class ConfigError(Exception):
    pass


# ------------------------------------------------------------- system loading

def _matrix_cfg(raw, n: int, label: str) -> MatrixFunction:
    if isinstance(raw, list):
        raw = {"n": n, "entries": raw}
    raw = dict(raw)
    raw.setdefault("n", n)
    raw.setdefault("label", label)
    return parse_matrix_function(raw)


def system_from_config(cfg: dict) -> SystemSpec:
    """Build a system from the JSON schema.

    Keys: ``n``, ``t0``, optional ``label``; either coefficient matrices
    ``A``, ``B``, ``C`` (entry-expression grids) or ``second_order: true``
    with a matrix ``K``, which expands to A = 0, B = I, C = -K.
    """
    try:
        n = int(cfg["n"])
        t0 = float(cfg.get("t0", 0.0))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad system config: {exc}") from exc
    label = cfg.get("label", "")
    try:
        if cfg.get("second_order"):
            if "K" not in cfg:
                raise ConfigError("second_order systems need the matrix K")
            K = _matrix_cfg(cfg["K"], n, "K")
            C = MatrixFunction.from_strings(
                [[f"-({e})" for e in row] for row in K.source()],
                hermitian=K.hermitian, t_min=K.t_min, label="C = -K")
            A = MatrixFunction.zero(n, label="A")
            B = MatrixFunction.identity(n, label="B")
        else:
            missing = [k for k in ("A", "B", "C") if k not in cfg]
            if missing:
                raise ConfigError(f"system config missing matrices: {missing}")
            A = _matrix_cfg(cfg["A"], n, "A")
            B = _matrix_cfg(cfg["B"], n, "B")
            C = _matrix_cfg(cfg["C"], n, "C")
        return SystemSpec(n=n, A=A, B=B, C=C, t0=t0, label=label)
    except (MatrixConfigError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def _load_system_file(path: str) -> SystemSpec:
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read system file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}: invalid JSON: {exc.msg}") from exc
    return system_from_config(cfg)


def _parse_params(pairs: list[str]) -> dict:
    out = {}
    for item in pairs or []:
        key, sep, raw = item.partition("=")
        if not sep:
            raise ConfigError(f"bad --param {item!r}; expected KEY=VALUE")
        try:
            out[key] = json.loads(raw)
        except json.JSONDecodeError:
            out[key] = raw
    return out


def _resolve_system(args) -> tuple[SystemSpec, object, dict]:
    """Returns (spec, bundle or None, params used)."""
    params = _parse_params(getattr(args, "param", None))
    if getattr(args, "nu", None) is not None:
        params["nu"] = args.nu
    if getattr(args, "n", None) is not None:
        params["n"] = args.n
    if args.example:
        try:
            bundle = build_preset(args.example, **params)
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc
        return bundle.spec, bundle, params
    if args.system:
        return _load_system_file(args.system), None, params
    raise ConfigError("one of --example or --system is required")


def _tolerances(args) -> Tolerances:
    try:
        return Tolerances.from_strings(getattr(args, "tol", None) or [])
    except (KeyError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def _interval(args) -> tuple[float, float]:
    a, b = args.interval
    if not b > a:
        raise ConfigError(f"interval [{a}, {b}] is empty")
    return float(a), float(b)


def _emit(args, name: str, report: dict) -> str:
    text = json_dumps(report)
    if args.out:
        path = os.path.join(args.out, name)
        atomic_write_text(path, text + "\n")
        print(f"wrote {path}")
    else:
        print(text)
    return text


# ------------------------------------------------------------------ check cmd

_CRITERIA = ("thm2.1", "thm2.2", "thm2.5", "cor2.1", "cor2.2", "cor2.3")


def _gauge_from_args(args, spec, a, b, tols) -> SChoice:
    case = args.s_case
    if case == "zero":
        return SChoice.zero(spec.n)
    if case in ("I", "II1", "II2", "III", "IV"):
        return suggest_S(spec, case, a, b, tols=tols)
    raise ConfigError(f"unsupported gauge case {case!r}")


def cmd_check(args) -> int:
    spec, bundle, params = _resolve_system(args)
    tols = _tolerances(args)
    crit = args.criterion
    if crit in ("thm2.1", "thm2.2", "thm2.5"):
        if args.interval is None:
            raise ConfigError(f"{crit} needs --interval a b")
        a, b = _interval(args)
    else:
        a, b = spec.t0, float(args.horizon if args.horizon else tols.horizon)
        if not b > a:
            raise ConfigError(f"horizon {b} must exceed t0 = {a}")

    if crit == "thm2.1":
        S = _gauge_from_args(args, spec, a, b, tols)
        v = theorem21_check(spec, S, a, b, scalar_mode=args.scalar_mode, tols=tols)
    elif crit == "thm2.2":
        v = theorem22_check(spec, args.mu, a, b, scalar_mode=args.scalar_mode,
                            tols=tols)
    elif crit == "thm2.5":
        v = theorem25_check(spec, a, b, scalar_mode=args.scalar_mode, tols=tols)
    elif crit == "cor2.1":
        S = _gauge_from_args(args, spec, spec.t0, b, tols)
        v = corollary_check(spec, "2.1", horizon=b, S=S, tols=tols)
    elif crit == "cor2.2":
        v = corollary_check(spec, "2.2", horizon=b, mu=args.mu, tols=tols)
    else:
        v = corollary_check(spec, "2.3", horizon=b, tols=tols)

    report = {
        "command": "check",
        "system": spec.label or args.system or args.example,
        "criterion": crit,
        "params": params,
        "seed": args.seed,
        "verdict": v.as_dict(),
        "tolerances": tols.as_dict(),
    }
    if bundle is not None:
        report["notes"] = list(bundle.notes)
    _emit(args, f"check_{crit.replace('.', '_')}.json", report)
    return 0


# ----------------------------------------------------------------- oracle cmd

def cmd_oracle(args) -> int:
    spec, bundle, params = _resolve_system(args)
    tols = _tolerances(args)
    if args.interval is None:
        raise ConfigError("oracle needs --interval a b")
    a, b = _interval(args)
    trials = int(args.trials)
    if trials < 1:
        raise ConfigError("--trials must be at least 1")
    per_trial = []
    all_oscillated, any_unreliable = True, False
    for k in range(trials):
        init = make_prepared_initial(spec.n, kind="random", seed=args.seed + k)
        trace = integrate_system(spec, init, (a, b))
        zeros = detect_det_zeros(trace, tols=tols)
        events = trace_events(trace, zeros=zeros)
        events["seed"] = args.seed + k
        if args.out:
            csv_path = os.path.join(args.out, f"trace_trial{k}.csv")
            atomic_write_text(csv_path, trace_to_csv(trace))
        per_trial.append(events)
        any_unreliable |= not trace.reliable
        all_oscillated &= bool(zeros)
    verdict = ("Unreliable" if any_unreliable
               else "AllTrialsOscillated" if all_oscillated
               else "SomeTrialDidNot")
    report = {
        "command": "oracle",
        "system": spec.label or args.system or args.example,
        "interval": [a, b],
        "trials": trials,
        "seed": args.seed,
        "params": params,
        "verdict": verdict,
        "note": "sampled numerical evidence; absence of zeros never "
                "certifies nonoscillation",
        "events": per_trial,
        "tolerances": tols.as_dict(),
    }
    _emit(args, "oracle_events.json", report)
    return 0


# ---------------------------------------------------------------- example cmd

def _reference_comparisons(bundle, tols: Tolerances) -> dict:
    from .criteria import DFFunction

    out = {}
    if bundle.id == "ex2.5":
        df = DFFunction(bundle.spec, tols)
        grid = bundle.reference["comparison_grid"]
        quoted = bundle.reference["tr_DF_quoted"]
        corrected = bundle.reference["tr_DF_corrected"]
        rows = []
        d_quoted = d_corrected = 0.0
        for k, t in enumerate(grid):
            assembled = df.potential(t) * bundle.spec.n
            dq = abs(assembled - quoted(t))
            dc = abs(assembled - corrected(t))
            d_quoted = max(d_quoted, dq)
            d_corrected = max(d_corrected, dc)
            if k % 20 == 0:
                rows.append({"t": float(t), "assembled": assembled,
                             "quoted": quoted(t), "corrected": corrected(t)})
        out["trace_formula"] = {
            "grid_points": len(grid),
            "max_abs_delta_quoted": d_quoted,
            "max_abs_delta_corrected": d_corrected,
            "sample_rows": rows,
        }
    if bundle.id == "ex2.3":
        lo, hi = bundle.oracle_interval
        out["expected_zero_times"] = list(bundle.reference["zero_times"](lo, hi))
    if bundle.id == "remark2.6":
        out["expected_zero_times"] = list(bundle.reference["det_zero_times"])
    return out


def cmd_example(args) -> int:
    if args.id not in PRESET_IDS:
        listing = "\n".join(f"  {pid}: {desc}" for pid, desc in preset_catalog().items())
        raise ConfigError(f"unknown example {args.id!r}; available:\n{listing}")
    tols = _tolerances(args)
    params = _parse_params(getattr(args, "param", None))
    bundle = build_preset(args.id, **params)
    checks = run_planned_checks(bundle, tols)
    per_trial = []
    a, b = bundle.oracle_interval
    for k in range(bundle.oracle_trials):
        init = make_prepared_initial(bundle.spec.n, kind="random", seed=args.seed + k)
        trace = integrate_system(bundle.spec, init, (a, b))
        zeros = detect_det_zeros(trace, tols=tols)
        ev = trace_events(trace, zeros=zeros)
        ev["seed"] = args.seed + k
        ev["zero_count"] = len(zeros)
        per_trial.append(ev)
        if args.out:
            atomic_write_text(os.path.join(args.out, f"{args.id}_trial{k}.csv"),
                              trace_to_csv(trace))
    report = {
        "command": "example",
        "example": bundle.id,
        "title": bundle.title,
        "params": bundle.params,
        "notes": list(bundle.notes),
        "criteria": [{"check": r["check"], "verdict": r["verdict"].as_dict()}
                     for r in checks],
        "oracle": {
            "interval": [a, b],
            "trials": bundle.oracle_trials,
            "zero_counts": [ev["zero_count"] for ev in per_trial],
            "events": per_trial,
            "note": "sampled numerical evidence; absence of zeros never "
                    "certifies nonoscillation",
        },
        "reference_comparisons": _reference_comparisons(bundle, tols),
        "tolerances": tols.as_dict(),
    }
    _emit(args, f"example_{args.id.replace('.', '_')}.json", report)
    for r in checks:
        v = r["verdict"]
        print(f"[{bundle.id}] {r['check']}: {v.status}", file=sys.stderr)
    print(f"[{bundle.id}] oracle zero counts: "
          f"{[ev['zero_count'] for ev in per_trial]}", file=sys.stderr)
    return 0


# -------------------------------------------------------------------- parser

def _add_common(p):
    p.add_argument("--tol", action="append", metavar="KEY=VAL",
                   help="tolerance override (repeatable)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", metavar="DIR", default=None,
                   help="directory for report files (default: print to stdout)")
    p.add_argument("--param", action="append", metavar="KEY=VAL",
                   help="preset parameter override (repeatable)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="hamosc",
        description="sufficient oscillation tests for linear Hamiltonian "
                    "systems, with independent numerical oracles")
    sub = ap.add_subparsers(dest="cmd", required=True)

    pc = sub.add_parser("check", help="run one criterion and write a verdict")
    pc.add_argument("--system", metavar="FILE")
    pc.add_argument("--example", choices=PRESET_IDS)
    pc.add_argument("--criterion", choices=_CRITERIA, required=True)
    pc.add_argument("--interval", nargs=2, type=float, metavar=("A", "B"))
    pc.add_argument("--horizon", type=float, default=None)
    pc.add_argument("--scalar-mode", choices=("criterion", "oracle"),
                    default="criterion", dest="scalar_mode")
    pc.add_argument("--s-case", default="zero", dest="s_case",
                    choices=("zero", "I", "II1", "II2", "III", "IV"))
    pc.add_argument("--mu", default="0", help="shift function expression")
    _add_common(pc)
    pc.set_defaults(func=cmd_check)

    po = sub.add_parser("oracle", help="integrate prepared solutions and "
                                       "report determinant zeros")
    po.add_argument("--system", metavar="FILE")
    po.add_argument("--example", choices=PRESET_IDS)
    po.add_argument("--interval", nargs=2, type=float, metavar=("A", "B"))
    po.add_argument("--trials", type=int, default=3)
    po.add_argument("--nu", type=float, default=None,
                    help="preset gain parameter passthrough")
    po.add_argument("--n", type=int, default=None,
                    help="preset dimension passthrough")
    _add_common(po)
    po.set_defaults(func=cmd_oracle)

    pe = sub.add_parser("example", help="run a preset's bundled pipeline")
    pe.add_argument("id", metavar="ID")
    _add_common(pe)
    pe.set_defaults(func=cmd_example)

    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # operational failure
        print(f"failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
