"""Command line entry point.

Exit status: 0 when every check in the report passes, 1 when a check fails,
2 for unreadable or invalid configuration, 3 when an enumeration exceeds its
budget.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import contractions as C
from . import io
from .errors import BudgetError, HypothesisError, ModeError, NonConvergenceError, ParameterError, SingularityError
from .gmetric_core import check_axioms
from .oracle import DEFAULT_CAP, DEFAULT_COEFF_GRID, DEFAULT_G_GRID, theorem_sweep
from .sequences import (
    check_alpha_series,
    check_lambda_sequence,
    find_alpha_certificate,
    find_lambda_certificate,
)
from .solver import TAU_FIX, TAU_SAME, check_hypotheses, solve_common_fixed_point, uniqueness_probe

DEFAULTS = {
    "budget": 4000,
    "seed": 0,
    "out": "out",
    "mode": "vetro",
    "p": 1,
    "tol": 1e-12,
    "tau_fix": TAU_FIX,
    "tau_same": TAU_SAME,
    "max_steps": 10_000,
    "form": "alpha",
    "phi": None,
    "x0": None,
    "starts": None,
    "carrier_size": 3,
    "family_size": 2,
    "g_grid": ",".join(str(v) for v in DEFAULT_G_GRID),
    "coeff_grid": ",".join(str(v) for v in DEFAULT_COEFF_GRID),
    "threshold": C.ABBAS_THRESHOLD,
}

# test hook: deliberately wrong rate formulas for mutation runs of the sweep
RATE_HOOKS = {
    "tenth": lambda *cs: C.r_abbas(*cs) / 10 if len(cs) == 3 else C.r_vetro(*cs) / 10,
    "zero": lambda *cs: 0.0,
}


COMMAND_DEFAULTS = {"sweep": {"mode": "abbas"}}


class ConfigError(Exception):
    pass


def _common(p, *names):
    for name in names:
        flag = "--" + name.replace("_", "-")
        if name in ("lambda_",):
            p.add_argument("--lambda", dest="lambda_", type=float, default=None)
        elif name in ("budget", "seed", "p", "n_lambda", "max_steps", "carrier_size", "family_size", "l_max"):
            p.add_argument(flag, dest=name, type=int, default=None)
        elif name in ("tol", "tau_fix", "tau_same", "threshold"):
            p.add_argument(flag, dest=name, type=float, default=None)
        else:
            p.add_argument(flag, dest=name, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gmetricfp", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check-axioms", help="audit G1-G5 and symmetry")
    _common(p, "config", "space", "budget", "seed", "out")

    p = sub.add_parser("check-series", help="alpha-series / lambda-sequence prefix check")
    _common(p, "config", "series", "form", "lambda_", "n_lambda", "l_max", "out")

    p = sub.add_parser("check-condition", help="sample the contraction condition")
    _common(p, "config", "space", "family", "schedule", "phi", "mode", "p", "budget", "seed", "threshold", "out")

    for name in ("solve", "probe-uniqueness"):
        p = sub.add_parser(name, help="iterate to a common fixed point" if name == "solve" else "multi-start solve")
        _common(
            p, "config", "space", "family", "schedule", "phi", "mode", "p", "budget", "seed", "threshold",
            "tol", "tau_fix", "max_steps", "out",
        )
        if name == "solve":
            _common(p, "x0")
        else:
            _common(p, "starts", "tau_same")

    p = sub.add_parser("sweep", help="exhaustive oracle sweep over tiny instances")
    _common(p, "config", "mode", "carrier_size", "family_size", "g_grid", "coeff_grid", "budget", "out")
    p.add_argument("--rate-hook", dest="rate_hook", choices=sorted(RATE_HOOKS), default=None, help=argparse.SUPPRESS)
    return parser


def _merge(args) -> dict:
    cfg = {}
    if getattr(args, "config", None):
        try:
            with open(args.config) as fh:
                cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
        cfg = {k.replace("-", "_"): v for k, v in cfg.items()}
        if "lambda" in cfg:
            cfg["lambda_"] = cfg.pop("lambda")
    merged = dict(DEFAULTS)
    merged.update(COMMAND_DEFAULTS.get(args.command, {}))
    merged.update(cfg)
    for k, v in vars(args).items():
        if v is not None and k != "config":
            merged[k] = v
    return merged


def _require(cfg, *keys):
    missing = [k for k in keys if cfg.get(k) is None]
    if missing:
        raise ConfigError(f"missing required settings: {', '.join(missing)}")


def _emit(cfg, name, data):
    out = Path(cfg["out"])
    io.write_json(out / name, data)
    return out / name


def _load_problem(cfg):
    _require(cfg, "space", "family", "schedule")
    space = io.parse_space(cfg["space"])
    family = io.parse_family(cfg["family"], space)
    sched = io.parse_schedule(cfg["schedule"])
    phi = io.parse_phi(cfg.get("phi"))
    mode = cfg["mode"]
    if mode == "vetro" and phi is None:
        phi = C.identity_phi()
    return space, family, sched, phi, mode


def cmd_check_axioms(cfg) -> int:
    _require(cfg, "space")
    space = io.parse_space(cfg["space"])
    report = check_axioms(space, int(cfg["budget"]), int(cfg["seed"]))
    _emit(cfg, "axioms.json", report.to_dict())
    for ax, ok in report.verdicts.items():
        print(f"{ax}: {'pass' if ok else 'FAIL'}")
    print(f"symmetric: {report.symmetric}  exhaustive: {report.exhaustive}")
    return 0 if report.passed else 1


def cmd_check_series(cfg) -> int:
    _require(cfg, "series")
    values = io.read_sequence(cfg["series"])
    lam, n_lam, l_max = cfg.get("lambda_"), cfg.get("n_lambda"), cfg.get("l_max")
    if cfg["form"] == "alpha":
        cert = (
            find_alpha_certificate(values, l_max)
            if lam is None
            else check_alpha_series(values, float(lam), int(n_lam or 1), l_max)
        )
    elif cfg["form"] == "lambda":
        cert = (
            find_lambda_certificate(values, l_max)
            if lam is None
            else check_lambda_sequence(values, float(lam), int(n_lam or 1), l_max)
        )
    else:
        raise ConfigError(f"unknown form {cfg['form']!r}")
    data = {"form": cfg["form"], "certificate": None if cert is None else cert.to_dict()}
    _emit(cfg, "series.json", data)
    if cert is None:
        print("no (lambda, n_lambda) on the grid is accepted")
        return 1
    print(f"{cert.verdict} up to L_max={cert.verified_up_to} (lambda={cert.lam}, n_lambda={cert.n_lambda})")
    return 0 if cert.accepted else 1


def cmd_check_condition(cfg) -> int:
    space, family, sched, phi, mode = _load_problem(cfg)
    budget, seed, p = int(cfg["budget"]), int(cfg["seed"]), int(cfg["p"])
    try:
        if mode == "vetro":
            rep = C.check_condition_vetro(space, family, sched, phi, p, budget, seed)
        else:
            rep = C.check_condition_abbas(
                space, family, sched, phi if mode == "abbas_phi" else None, p, budget, seed, float(cfg["threshold"])
            )
    except HypothesisError as exc:
        _emit(cfg, "condition.json", {"error": str(exc), "witnesses": exc.witnesses})
        print(f"hypothesis violated: {exc}")
        return 1
    _emit(cfg, "condition.json", rep.to_dict())
    print(f"condition holds: {rep.holds}  hypothesis ok: {rep.hypothesis_ok}  checked: {rep.checked}")
    return 0 if rep.passed else 1


def _hypotheses(cfg, space, family, sched, phi, mode):
    return check_hypotheses(
        space, family, sched, phi if mode != "abbas" else None, mode, int(cfg["p"]),
        int(cfg["budget"]), int(cfg["seed"]), threshold=float(cfg["threshold"]),
    )


def cmd_solve(cfg) -> int:
    space, family, sched, phi, mode = _load_problem(cfg)
    _require(cfg, "x0")
    phi_arg = phi if mode != "abbas" else None
    x0 = io.parse_point(cfg["x0"], space)
    hyp = _hypotheses(cfg, space, family, sched, phi, mode)
    _emit(cfg, "hypotheses.json", hyp.to_dict())
    if not hyp.holds:
        print("hypotheses fail: " + "; ".join(hyp.reasons))
        for w in hyp.condition.witnesses[:3]:
            print(f"  witness: {w}")
        return 1
    try:
        res, cert = solve_common_fixed_point(
            space, family, sched, x0, phi_arg, mode, int(cfg["p"]), hyp,
            max_steps=int(cfg["max_steps"]), tol=float(cfg["tol"]), tau_fix=float(cfg["tau_fix"]),
            sample_budget=int(cfg["budget"]), seed=int(cfg["seed"]),
        )
    except NonConvergenceError as exc:
        _emit(cfg, "result.json", {"accepted": False, "error": str(exc), "residuals": exc.residuals})
        print(f"no convergence: {exc}")
        return 1
    _emit(cfg, "result.json", res.to_dict())
    _emit(cfg, "certificate.json", None if cert is None else cert.to_dict())
    io.write_orbit_table(Path(cfg["out"]) / "orbit.csv", res.trace, cert)
    sound = cert is not None and cert.sound
    print(f"u = {res.point!r}  max residual = {max(res.residuals):.3g}  steps = {res.trace.steps}")
    print(f"certificate: lambda={cert.lam if cert else None} sound={sound}  transfer={res.transfer_flag}")
    return 0 if res.accepted and sound else 1


def cmd_probe(cfg) -> int:
    space, family, sched, phi, mode = _load_problem(cfg)
    _require(cfg, "starts")
    starts = [io.parse_point(s, space) for s in str(cfg["starts"]).split(",")]
    phi_arg = phi if mode != "abbas" else None
    hyp = _hypotheses(cfg, space, family, sched, phi, mode)
    _emit(cfg, "hypotheses.json", hyp.to_dict())
    if not hyp.holds:
        print("hypotheses fail: " + "; ".join(hyp.reasons))
        return 1
    verdict = uniqueness_probe(
        space, family, sched, starts, phi_arg, mode, int(cfg["p"]), hyp,
        tau_same=float(cfg["tau_same"]), max_steps=int(cfg["max_steps"]), tol=float(cfg["tol"]),
        tau_fix=float(cfg["tau_fix"]), sample_budget=int(cfg["budget"]), seed=int(cfg["seed"]),
    )
    _emit(cfg, "probe.json", verdict.to_dict())
    print(f"unique: {verdict.unique}  clusters: {verdict.clusters}  degenerate: {verdict.degenerate}")
    return 0 if verdict.unique else 1


def _grid(raw):
    return tuple(float(v) for v in str(raw).split(","))


def cmd_sweep(cfg) -> int:
    mode = cfg["mode"]
    if mode not in ("abbas", "vetro"):
        raise ConfigError(f"sweep supports modes abbas and vetro, not {mode!r}")
    cap = int(cfg["budget"]) if cfg.get("budget") not in (None, DEFAULTS["budget"]) else DEFAULT_CAP
    hook = RATE_HOOKS[cfg["rate_hook"]] if cfg.get("rate_hook") else None
    try:
        report = theorem_sweep(
            mode,
            carrier_sizes=range(1, int(cfg["carrier_size"]) + 1),
            family_sizes=range(1, int(cfg["family_size"]) + 1),
            g_value_grid=_grid(cfg["g_grid"]),
            coeff_grid=_grid(cfg["coeff_grid"]),
            cap=cap,
            rate_fn=hook,
        )
    except BudgetError as exc:
        _emit(cfg, "sweep.json", {"error": str(exc), "candidates": exc.candidates, "partial": exc.partial})
        print(f"budget exceeded: {exc}")
        return 3
    _emit(cfg, "sweep.json", report.to_dict())
    print(
        f"instances: {report.instances}  hypotheses met: {report.hypotheses_met}  "
        f"red flags: {len(report.red_flags)}"
    )
    return 0 if report.ok else 1


COMMANDS = {
    "check-axioms": cmd_check_axioms,
    "check-series": cmd_check_series,
    "check-condition": cmd_check_condition,
    "solve": cmd_solve,
    "probe-uniqueness": cmd_probe,
    "sweep": cmd_sweep,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _merge(args)
        return COMMANDS[args.command](cfg)
    except (ConfigError, FileNotFoundError, ParameterError, ModeError, SingularityError, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
