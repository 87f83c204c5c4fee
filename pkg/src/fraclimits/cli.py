"""Command line entry point.

Usage::

    fraclimits simulate --config run.ini --out out/
    fraclimits hj --config limit.ini --out out/
    fraclimits hamiltonian-table --alpha 1.0 --A 0.5 --out out/
    fraclimits verify-kpp | verify-ri | verify-sme | verify-lemma [--alpha F] [--set key=value]
    fraclimits sweep front-speed --axis alpha --values 0.5,1.0,1.5 --threads 3

Exit status is 0 on success, 1 when a run aborts numerically or a check
fails, and 2 on configuration errors (including unknown flags).
"""
from __future__ import annotations

import argparse
import ast
import inspect
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .artifacts import run_metadata, trajectory_columns, write_csv, write_json
from .core import ConfigError, NumericalAbort, RunConfig

VERBS = ("simulate", "hj", "hamiltonian-table", "verify-kpp", "verify-ri", "verify-sme",
         "verify-lemma", "sweep")
SUITES = ("front-speed", "verify-kpp", "verify-ri", "verify-sme", "verify-lemma")


# ---------------------------------------------------------------------------
# suites
# ---------------------------------------------------------------------------

def _suite_function(name):
    from .asymptotics import check_theorem_kpp, check_theorem_ri, front_speed_study
    from .hamilton_jacobi import check_theorem_sme
    from .operators import lemma_g_bound, lemma_g_bound_2d

    def lemma(alpha=1.0, dim=1, level=1, stability_tol=0.05, trend_tol=0.05, angular_tol=0.01):
        kw = {"level": level, "stability_tol": stability_tol, "trend_tol": trend_tol}
        if int(dim) == 1:
            return lemma_g_bound(alpha, **kw)
        return lemma_g_bound_2d(alpha, angular_tol=angular_tol, **kw)

    table = {"front-speed": front_speed_study, "verify-kpp": check_theorem_kpp,
             "verify-ri": check_theorem_ri, "verify-sme": check_theorem_sme,
             "verify-lemma": lemma}
    return table[name]


def _parse_value(text):
    try:
        return ast.literal_eval(text)
    except (ValueError, SyntaxError):
        return text


def suite_options(name, alpha=None, epsilon=None, settings=()) -> dict:
    """Keyword arguments of a suite from the command-line flags.

    ``--set key=value`` entries must name parameters of the suite function;
    ``--epsilon`` turns the ladder into the single rung given.
    """
    fn = _suite_function(name)
    params = inspect.signature(fn).parameters
    accepts_any = any(p.kind is p.VAR_KEYWORD for p in params.values())
    kw = {}
    for item in settings:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        key, text = (s.strip() for s in item.split("=", 1))
        if key not in params and not accepts_any:
            raise ConfigError(f"{name} has no option {key!r}")
        kw[key] = _parse_value(text)
    if alpha is not None:
        kw["alpha"] = float(alpha)
    if epsilon is not None:
        if "epsilon_ladder" not in params:
            raise ConfigError(f"{name} does not take --epsilon")
        kw["epsilon_ladder"] = (float(epsilon),)
    return kw


def run_suite(name, options) -> dict:
    return _suite_function(name)(**options)


def _sweep_cell(args):
    suite, options = args
    try:
        return {"ok": True, "report": run_suite(suite, options)}
    except (ConfigError, NumericalAbort, ValueError) as exc:
        return {"ok": False, "error": f"{type(exc).__name__}: {exc}"}


def _summary_row(suite, axis, value, cell) -> dict:
    row = {axis: value, "ok": cell["ok"]}
    if not cell["ok"]:
        row["error"] = cell["error"]
        return row
    rep = cell["report"]
    row["pass"] = bool(rep.get("pass", False))
    if suite == "front-speed":
        fit = next(iter(rep["levels"].values()))
        row.update(sigma_hat=fit["sigma_hat"], target=rep["target"],
                   relative_error=fit["relative_error"], r_squared=fit["r_squared"])
    elif suite == "verify-lemma":
        row["C_hat"] = rep["C_hat"]
    elif "windows" in rep:
        for wname, verdict in rep["windows"].items():
            errs = verdict["errors"] if "errors" in verdict else verdict["u"]["errors"]
            row[f"error_{wname}"] = errs[-1]
    return row


def sweep(suite, axis, values, options=None, threads=1) -> dict:
    """Run ``suite`` once per value of ``axis`` and merge the reports.

    Cells are independent; a failing cell is recorded and the sweep goes on.
    With ``threads > 1`` cells run in separate processes and the table keeps
    the order of ``values``.
    """
    if suite not in SUITES:
        raise ConfigError(f"unknown suite {suite!r}; choose from {SUITES}")
    if axis not in ("alpha", "epsilon"):
        raise ConfigError("sweep axis must be alpha or epsilon")
    values = [float(v) for v in values]
    if not values:
        raise ConfigError("sweep needs at least one value")
    base = dict(options or {})
    jobs = []
    for v in values:
        kw = dict(base)
        if axis == "alpha":
            kw["alpha"] = v
        else:
            kw["epsilon_ladder"] = (v,)
        jobs.append((suite, kw))
    if threads > 1:
        with ProcessPoolExecutor(max_workers=int(threads)) as pool:
            cells = list(pool.map(_sweep_cell, jobs))
    else:
        cells = [_sweep_cell(j) for j in jobs]
    rows = [_summary_row(suite, axis, v, c) for v, c in zip(values, cells)]
    return {"suite": suite, "axis": axis, "values": values, "rows": rows,
            "cells": cells, "failed": sum(not c["ok"] for c in cells)}


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def _load_config(args, force_problem=None) -> RunConfig:
    if not args.config:
        raise ConfigError(f"{args.verb} needs --config")
    overrides = list(args.set or [])
    if args.alpha is not None:
        overrides.append(f"alpha={args.alpha}")
    if args.epsilon is not None:
        overrides.append(f"epsilon={args.epsilon}")
    if args.A is not None:
        overrides.append(f"A={args.A}")
    cfg = RunConfig.from_file(args.config, overrides)
    if force_problem and not cfg.problem.startswith(force_problem):
        raise ConfigError(f"{args.verb} needs a {force_problem} problem, config has {cfg.problem!r}")
    return cfg


def _cmd_simulate(args, out: Path) -> int:
    from .dynamics import run

    cfg = _load_config(args, "hj" if args.verb == "hj" else None)
    if args.verb == "simulate" and cfg.problem.startswith("hj"):
        raise ConfigError("use the hj verb for the limit equations")
    traj = run(cfg)
    column = "u" if args.verb == "hj" else "n"
    write_csv(out / f"{args.verb}.csv", trajectory_columns(traj, column))
    if traj.mass_times:
        write_csv(out / "mass.csv", {"t": traj.mass_times, "I": traj.mass_values})
    write_json(out / "metadata.json", run_metadata(args.verb, cfg, {"record": traj.record}))
    return 0


def _cmd_hamiltonian_table(args, out: Path) -> int:
    from .hamilton_jacobi import Hamiltonian, hamiltonian_bound_constants

    alpha = 1.0 if args.alpha is None else args.alpha
    A = 0.5 if args.A is None else args.A
    H = Hamiltonian(alpha, A)
    out.mkdir(parents=True, exist_ok=True)
    H.to_csv(out / "hamiltonian.csv")
    consts = hamiltonian_bound_constants(alpha, A)
    report = dict(consts, alpha=alpha, A=A, n_nodes=int(H.p.size), dH_max=H.dH_max,
                  kernel=H.kq.metadata())
    write_json(out / "hamiltonian.json", report)
    write_json(out / "metadata.json", run_metadata(args.verb, None, {"alpha": alpha, "A": A}))
    return 0


def _cmd_verify(args, out: Path) -> int:
    options = suite_options(args.verb, args.alpha, args.epsilon, args.set or ())
    report = run_suite(args.verb, options)
    name = args.verb.replace("-", "_")
    write_json(out / f"{name}.json", report)
    if "ladder" in report:
        from .asymptotics import ladder_table
        write_csv(out / f"{name}_ladder.csv", ladder_table(report))
    write_json(out / "metadata.json", run_metadata(args.verb, None, {"options": options}))
    print(f"{args.verb}: {'PASS' if report.get('pass') else 'FAIL'}")
    return 0 if report.get("pass") else 1


def _cmd_sweep(args, out: Path) -> int:
    if not args.suite:
        raise ConfigError("sweep needs a suite name")
    values = [v for v in (args.values or "").split(",") if v.strip()]
    if not values:
        raise ConfigError("sweep needs a non-empty --values list")
    try:
        values = [float(v) for v in values]
    except ValueError as exc:
        raise ConfigError(f"bad sweep value: {exc}") from exc
    options = suite_options(args.suite, None, None, args.set or ())
    report = sweep(args.suite, args.axis, values, options, args.threads)
    rows = report["rows"]
    keys = []
    for row in rows:
        keys += [k for k in row if k not in keys and k != "error"]
    write_csv(out / "sweep.csv", {k: [row.get(k, "") for row in rows] for k in keys})
    write_json(out / "sweep.json", report)
    write_json(out / "metadata.json", run_metadata("sweep", None, {
        "suite": args.suite, "axis": args.axis, "values": values, "options": options}))
    for row in rows:
        print(", ".join(f"{k}={v}" for k, v in row.items()))
    return 1 if report["failed"] else 0


class _Parser(argparse.ArgumentParser):
    """Argument parser whose errors exit with status 2 after the usage text."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(2, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="fraclimits", description="Fractional KPP and small-step asymptotics.")
    p.add_argument("verb", choices=VERBS)
    p.add_argument("suite", nargs="?", help="suite to sweep (sweep only)")
    p.add_argument("--config", help="INI run configuration")
    p.add_argument("--out", default="out", help="output directory")
    p.add_argument("--alpha", type=float)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--A", type=float, help="Lipschitz budget for the Hamiltonian")
    p.add_argument("--set", action="append", metavar="KEY=VALUE",
                   help="config override or suite option (repeatable)")
    p.add_argument("--threads", type=int, default=1, help="parallel sweep cells")
    p.add_argument("--axis", default="alpha", help="sweep axis: alpha or epsilon")
    p.add_argument("--values", help="comma-separated sweep values")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.suite and args.verb != "sweep":
        print(f"fraclimits: error: unexpected argument {args.suite!r}", file=sys.stderr)
        return 2
    out = Path(args.out)
    handlers = {"simulate": _cmd_simulate, "hj": _cmd_simulate,
                "hamiltonian-table": _cmd_hamiltonian_table, "sweep": _cmd_sweep}
    handler = handlers.get(args.verb, _cmd_verify)
    try:
        return handler(args, out)
    except ConfigError as exc:
        print(f"fraclimits: configuration error: {exc}", file=sys.stderr)
        return 2
    except NumericalAbort as exc:
        print(f"fraclimits: numerical abort: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
