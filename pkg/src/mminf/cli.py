"""Command-line front door: verification campaigns, oracle cross-checks,
sharpness runs and parameter sweeps, all emitting deterministic CSV.

Exit codes: 0 all verdicts pass, 1 any fail, 2 usage error, 3 when --strict
is set and some cases were untestable at this precision.
"""

from __future__ import annotations

import argparse
import csv
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .bounds import (
    sharpness_decay,
    verify_generalized,
    verify_kernel_lemma,
    verify_theorem,
)
from .kernel import Observable, QueueParams, kernel_entry
from .oracle import uniformized_kernel

DEFAULT_RHO = [0.25, 0.5, 1.0, 2.0, 5.0, 10.0]
DEFAULT_P = [round(0.05 * i, 2) for i in range(1, 20)]


@dataclass
class RunConfig:
    command: str
    options: dict


def parse_observable(spec: str) -> Observable:
    """Parse 'table:0=1,1=3,4=2' or 'indicator:0..3' / 'indicator:0,1,5'."""
    kind, _, body = spec.partition(":")
    if kind == "table" and body:
        table = {}
        for item in body.split(","):
            n_str, _, v_str = item.partition("=")
            table[int(n_str)] = float(v_str)
        return Observable.from_table(table)
    if kind == "indicator" and body:
        if ".." in body:
            lo_str, hi_str = body.split("..")
            points = range(int(lo_str), int(hi_str) + 1)
        else:
            points = [int(x) for x in body.split(",")]
        return Observable.indicator(points)
    raise ValueError(f"cannot parse observable spec {spec!r}")


def _fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.17g}"
    return str(x)


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--deficit", type=float, default=1e-12)
    p.add_argument("--out", type=str, default=None)
    p.add_argument("--strict", action="store_true")
    p.add_argument("--jobs", type=int, default=1)


def parse_args(argv) -> RunConfig:
    parser = argparse.ArgumentParser(
        prog="mminf",
        description="Certified verification of infinite-server queue "
        "semi-log-convexity inequalities.",
    )
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("verify-lemma", help="kernel semi-ultra-log-convexity")
    p.add_argument("--rho", type=float, action="append")
    p.add_argument("--p", type=float, action="append")
    p.add_argument("--mu", type=float, default=1.0)
    p.add_argument("--kmax", type=int, default=30)
    p.add_argument("--nmax", type=int, default=60)
    _add_common(p)

    p = sub.add_parser("verify-theorem", help="semigroup semi-log-convexity")
    p.add_argument("--rho", type=float, action="append")
    p.add_argument("--p", type=float, action="append")
    p.add_argument("--mu", type=float, default=1.0)
    p.add_argument("--nmax", type=int, default=40)
    p.add_argument("--f", type=str, default="indicator:0..3")
    p.add_argument("--bound", choices=["sharp", "glmrs"], default="sharp")
    _add_common(p)

    p = sub.add_parser(
        "verify-generalized", help="binomial*Poisson semi-ultra-log-convexity"
    )
    p.add_argument("--a", type=float, action="append")
    p.add_argument("--b", type=float, action="append")
    p.add_argument("--kmax", type=int, default=20)
    p.add_argument("--nmax", type=int, default=40)
    _add_common(p)

    p = sub.add_parser("oracle-check", help="kernel vs uniformization oracle")
    p.add_argument("--rho", type=float, action="append")
    p.add_argument("--p", type=float, action="append")
    p.add_argument("--mu", type=float, default=1.0)
    p.add_argument("--kmax", type=int, default=10)
    p.add_argument("--nmax", type=int, default=20)
    p.add_argument("--N", type=int, default=80)
    p.add_argument("--tol", type=float, default=1e-10)
    _add_common(p)

    p = sub.add_parser("sharpness", help="both sides of the sharp bound over t")
    p.add_argument("--rho", type=float, default=1.0)
    p.add_argument("--mu", type=float, default=1.0)
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--f", type=str, default="indicator:0..1")
    p.add_argument("--t", type=float, action="append")
    p.add_argument("--delta", type=float, default=1e-6)
    _add_common(p)

    p = sub.add_parser("sweep", help="verify-lemma over the default grid")
    p.add_argument("--rho", type=float, action="append")
    p.add_argument("--p", type=float, action="append")
    p.add_argument("--mu", type=float, default=1.0)
    p.add_argument("--kmax", type=int, default=30)
    p.add_argument("--nmax", type=int, default=60)
    _add_common(p)

    if not argv:
        parser.print_help(sys.stderr)
        raise SystemExit(2)
    ns = parser.parse_args(argv)
    if ns.command is None:
        parser.print_help(sys.stderr)
        raise SystemExit(2)
    opts = vars(ns).copy()
    command = opts.pop("command")
    _validate(command, opts, parser)
    return RunConfig(command=command, options=opts)


def _validate(command, opts, parser):
    deficit = opts.get("deficit")
    if deficit is not None and not 0.0 < deficit < 1.0:
        parser.error(f"--deficit must lie in (0,1), got {deficit}")
    for name in ("p",):
        vals = opts.get(name)
        if vals:
            for v in vals:
                if not 0.0 < v < 1.0:
                    parser.error(f"--p values must lie in (0,1), got {v}")
    for v in opts.get("a") or []:
        if not 0.0 <= v <= 1.0:
            parser.error(f"--a values must lie in [0,1], got {v}")
    for v in opts.get("b") or []:
        if v < 0.0:
            parser.error(f"--b values must be non-negative, got {v}")
    rho_opt = opts.get("rho")
    rho_vals = (
        rho_opt if isinstance(rho_opt, list) else [rho_opt] if rho_opt is not None else []
    )
    for v in rho_vals:
        if v <= 0.0:
            parser.error(f"--rho values must be positive, got {v}")
    for key in ("f",):
        if key in opts and opts[key] is not None:
            try:
                parse_observable(opts[key])
            except (ValueError, KeyError) as exc:
                parser.error(f"bad --f spec: {exc}")


def _report_rows(report, id_names, verdict_of=None):
    rows = []
    for case in report.cases:
        ids = [_fmt(x) for x in case.key]
        if not case.testable:
            rows.append(ids + ["", "", "untestable"])
        else:
            rows.append(
                ids
                + [_fmt(case.margin), _fmt(case.budget), "pass" if case.passed else "fail"]
            )
    return rows


def _lemma_cell(args):
    rho, p, mu, kmax, nmax, deficit = args
    params = QueueParams(lam=rho * mu, mu=mu)
    report = verify_kernel_lemma(params, params.t_for_p(p), kmax, nmax, deficit)
    return _report_rows(report, ("rho", "p", "k", "n"))


def _theorem_cell(args):
    rho, p, mu, nmax, deficit, f_spec, bound = args
    params = QueueParams(lam=rho * mu, mu=mu)
    f = parse_observable(f_spec)
    report = verify_theorem(
        params, params.t_for_p(p), f, nmax, deficit, against=bound
    )
    return _report_rows(report, ("rho", "p", "n"))


def _generalized_cell(args):
    a, b, kmax, nmax, deficit = args
    report = verify_generalized(a, b, kmax, nmax, deficit)
    return _report_rows(report, ("a", "b", "k"))


def _oracle_cell(args):
    rho, p, mu, kmax, nmax, big_n, tol = args
    params = QueueParams(lam=rho * mu, mu=mu)
    t = params.t_for_p(p)
    mat = uniformized_kernel(params, t, big_n, tol)
    rows = []
    for k in range(kmax + 1):
        disc = max(
            abs(math.exp(kernel_entry(params, t, k, n)) - mat[k, n])
            for n in range(nmax + 1)
        )
        verdict = "pass" if disc <= 10.0 * tol else "fail"
        rows.append([_fmt(rho), _fmt(p), str(k), _fmt(disc), _fmt(tol), verdict])
    return rows


def _run_cells(cells, worker, jobs):
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            chunks = list(pool.map(worker, cells))
    else:
        chunks = [worker(c) for c in cells]
    return [row for chunk in chunks for row in chunk]


def run(config: RunConfig) -> int:
    o = config.options
    jobs = o.get("jobs", 1)
    deficit = o.get("deficit", 1e-12)
    if config.command in ("verify-lemma", "sweep"):
        rhos = o["rho"] or DEFAULT_RHO
        ps = o["p"] or DEFAULT_P
        cells = [
            (rho, p, o["mu"], o["kmax"], o["nmax"], deficit)
            for rho in rhos
            for p in ps
        ]
        rows = _run_cells(cells, _lemma_cell, jobs)
        header = ["rho", "p", "k", "n", "margin", "error_budget", "verdict"]
    elif config.command == "verify-theorem":
        rhos = o["rho"] or [0.5, 1.0, 2.0]
        ps = o["p"] or [round(0.1 * i, 1) for i in range(1, 10)]
        cells = [
            (rho, p, o["mu"], o["nmax"], deficit, o["f"], o["bound"])
            for rho in rhos
            for p in ps
        ]
        rows = _run_cells(cells, _theorem_cell, jobs)
        header = ["rho", "p", "n", "margin", "error_budget", "verdict"]
    elif config.command == "verify-generalized":
        a_vals = o["a"] or [0.0, 0.25, 0.5, 0.75, 0.9]
        b_vals = o["b"] or [0.0, 0.5, 1.0, 2.0, 5.0]
        cells = [
            (a, b, o["kmax"], o["nmax"], deficit)
            for a in a_vals
            for b in b_vals
            if not (a == 0.0 and b == 0.0)
        ]
        rows = _run_cells(cells, _generalized_cell, jobs)
        header = ["a", "b", "k", "n", "margin", "error_budget", "verdict"]
    elif config.command == "oracle-check":
        rhos = o["rho"] or [0.5, 1.0, 2.0, 5.0]
        ps = o["p"] or [0.1, 0.5, 0.9]
        cells = [
            (rho, p, o["mu"], o["kmax"], o["nmax"], o["N"], o["tol"])
            for rho in rhos
            for p in ps
        ]
        rows = _run_cells(cells, _oracle_cell, jobs)
        header = ["rho", "p", "k", "max_abs_discrepancy", "tol", "verdict"]
    elif config.command == "sharpness":
        t_vals = sorted(o["t"] or [1.0, 2.0, 4.0, 8.0, 16.0])
        params = QueueParams(lam=o["rho"] * o["mu"], mu=o["mu"])
        f = parse_observable(o["f"])
        table = sharpness_decay(params, f, o["n"], t_vals, deficit)
        rows = []
        t_final = t_vals[-1]
        for t, lhs, rhs in table:
            if t == t_final:
                verdict = "pass" if max(lhs, rhs) <= o["delta"] else "fail"
            else:
                verdict = "na"
            rows.append([_fmt(t), _fmt(lhs), _fmt(rhs), verdict])
        header = ["t", "laplacian_abs", "bound_abs", "verdict"]
    else:
        raise ValueError(f"unknown command {config.command!r}")

    n_ids = len(header) - 3
    rows.sort(key=lambda r: tuple(float(x) for x in r[:n_ids]))
    out_path = o.get("out")
    if out_path is None:
        out_dir = os.environ.get("MMINF_OUT_DIR", ".")
        out_path = os.path.join(out_dir, f"{config.command}.csv")
    echo = " ".join(
        f"{k}={v}"
        for k, v in sorted(o.items())
        if k not in ("out", "jobs") and v is not None
    )
    try:
        with open(out_path, "w", newline="") as fh:
            fh.write(f"# mminf {__version__} {config.command} {echo}\n")
            writer = csv.writer(fh)
            writer.writerow(header)
            writer.writerows(rows)
    except OSError as exc:
        print(f"mminf: cannot write {out_path}: {exc}", file=sys.stderr)
        return 2

    verdicts = [row[-1] for row in rows]
    if any(v == "fail" for v in verdicts):
        return 1
    if o.get("strict") and any(v == "untestable" for v in verdicts):
        return 3
    return 0


def main(argv=None) -> int:
    config = parse_args(sys.argv[1:] if argv is None else list(argv))
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
