"""Command-line front end: ``qsd-mminf {theta,qsd,laplace,simulate,verify}``.

stdout carries the payload (JSON or CSV), stderr carries logs. Exit codes:
0 ok, 2 parameter/domain error, 3 numerical or convergence error, 4 statistics
error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from importlib import resources

import numpy as np

from . import __version__
from .errors import (
    DomainError,
    InvalidThetaError,
    NearSingularityError,
    ParameterError,
    QsdError,
    StatisticsError,
)
from .laplace import mean_absorption_time, mgf_absorption
from .model import ModelParams
from .qsd import qsd_from_gf, qsd_recurrence
from .sim import (
    MIN_FIT_SURVIVORS,
    MIN_HIST_SURVIVORS,
    SimConfig,
    conditional_histogram,
    fit_survival_rate,
    mean_time,
    run,
    total_variation,
)
from .solver import DEFAULT_TOL, certify_equivalence, solve_theta_star_series
from .special import EXTENDED_DPS, identity_residual

SCHEMA_VERSION = 1
DEFAULT_N = 100_000
DEFAULT_SEED = 42
DEFAULT_GRID = "-0.95:5:30,-10:10:30"
IDENTITY_THRESHOLD = 1e-10

log = logging.getLogger("qsd_mminf")


def output_schema():
    """The JSON schema every ``--format json`` record validates against."""
    return json.loads(resources.files(__package__).joinpath("output.schema.json").read_text())


def _num(x):
    """JSON-safe float: non-finite values become null."""
    x = float(x)
    return x if math.isfinite(x) else None


class Record:
    def __init__(self, command, params=None, tolerances=None, seed=None):
        self.command = command
        self.params = params
        self.tolerances = tolerances or {}
        self.seed = seed
        self.payload = {}
        self.rows = []  # CSV body
        self.header = ["field", "value", "error"]
        self.error = None

    def scalar(self, name, value, error=None):
        self.payload[name] = value
        if error is not None:
            self.payload[name + "_error"] = error
        self.rows.append([name, value, "" if error is None else error])

    def as_dict(self):
        out = {
            "schema_version": SCHEMA_VERSION,
            "artifact_version": __version__,
            "command": self.command,
            "params": None if self.params is None else {"a": self.params.a, "q": self.params.q},
            "tolerances": self.tolerances,
            "seed": self.seed,
            "ok": self.error is None,
            "payload": self.payload,
        }
        if self.error is not None:
            out["error"] = self.error
        return out

    def render(self, fmt):
        if fmt == "json":
            return json.dumps(self.as_dict(), indent=2, sort_keys=True, allow_nan=False) + "\n"
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        if self.error is not None:
            writer.writerow(["error_type", "message"])
            writer.writerow([self.error["type"], self.error["message"]])
        else:
            writer.writerow(self.header)
            writer.writerows([["" if v is None else v for v in row] for row in self.rows])
        return buf.getvalue()


def _params(args):
    return ModelParams(args.a, args.q)


def cmd_theta(args, rec):
    params = _params(args)
    rec.params = params
    rec.tolerances = {"tol": args.tol}
    report = certify_equivalence(params, args.tol)
    rec.scalar("theta_series", report.series.theta, report.series.bracket_width)
    rec.scalar("theta_integral", report.integral.theta, report.integral.bracket_width)
    rec.scalar("difference", report.difference, 4 * args.tol * params.q)
    rec.payload["pass"] = report.passed
    rec.rows.append(["pass", str(report.passed).lower(), ""])


def cmd_qsd(args, rec):
    params = _params(args)
    rec.params = params
    rec.tolerances = {"tol": args.tol, "eps_tail": 1e-14}
    if args.minimal:
        sol = solve_theta_star_series(params, args.tol)
        theta, theta_err = sol.theta, sol.bracket_width
    else:
        theta, theta_err = args.theta, 0.0
    rec.payload["theta"] = theta
    rec.payload["theta_error"] = theta_err
    rec.payload["minimal"] = bool(args.minimal)
    rec_vec = qsd_recurrence(params, theta)
    gf_vec = qsd_from_gf(params, theta, args.n)
    dense = rec_vec.dense(args.n)
    diff = np.abs(dense - gf_vec.probs)
    rec.payload["entries"] = [
        {"k": k + 1, "nu_recurrence": float(dense[k]), "nu_gf": float(gf_vec.probs[k]), "abs_diff": float(diff[k])}
        for k in range(args.n)
    ]
    rec.payload["max_discrepancy"] = float(diff.max())
    rec.payload["truncation_N"] = rec_vec.truncation_N
    rec.payload["normalization"] = _num(rec_vec.total_mass)
    rec.payload["normalization_error"] = _num(rec_vec.tail_mass_estimate)
    rec.header = ["k", "nu_recurrence", "nu_gf", "abs_diff"]
    rec.rows = [[e["k"], e["nu_recurrence"], e["nu_gf"], e["abs_diff"]] for e in rec.payload["entries"]]


def _parse_grid(text):
    text = text.strip()
    if ":" in text:
        lo, hi, n = text.split(":")
        return [float(v) for v in np.linspace(float(lo), float(hi), int(n))]
    return [float(v) for v in text.split(",") if v.strip()]


def cmd_laplace(args, rec):
    params = _params(args)
    rec.params = params
    rec.tolerances = {"tol": args.tol, "guard": args.guard}
    sol = solve_theta_star_series(params, args.tol)
    rec.payload["theta_star"] = sol.theta
    rec.payload["theta_star_error"] = sol.bracket_width
    points = []
    for theta in _parse_grid(args.theta_grid):
        entry = {"theta": theta, "value": None, "error": None, "status": "ok", "message": ""}
        try:
            pt = mgf_absorption(params, theta, args.tol, theta_star=sol.theta, guard=args.guard)
            entry["value"], entry["error"] = pt.value, pt.abs_error_estimate
        except NearSingularityError as exc:
            entry["status"], entry["message"] = "near_singularity", str(exc)
        except DomainError as exc:
            entry["status"], entry["message"] = "domain_error", str(exc)
        points.append(entry)
    rec.payload["points"] = points
    rec.header = ["theta", "value", "error", "status"]
    rec.rows = [[p["theta"], p["value"], p["error"], p["status"]] for p in points]


def cmd_simulate(args, rec):
    params = _params(args)
    rec.params = params
    if args.n < 1:
        raise ParameterError("n", f"must be >= 1, got {args.n}")
    sol = solve_theta_star_series(params, args.tol)
    th = sol.theta
    t_max = args.t_max if args.t_max is not None else 50.0 / th
    if args.probes is not None:
        probes = tuple(_parse_grid(args.probes))
    else:
        probes = tuple(float(p) for p in np.linspace(5.0 / th, min(30.0 / th, t_max), 6))
    rec.seed = args.seed
    rec.tolerances = {"tol": args.tol, "t_max": t_max, "probes": list(probes), "k_max": args.k_max}
    config = SimConfig(params, 1, args.n, t_max, seed=args.seed, probes=probes)
    log.info("simulating %d trajectories (seed %d)", args.n, args.seed)
    stats = run(config, workers=args.workers)

    rec.scalar("n_trajectories", stats.n_trajectories)
    rec.scalar("n_censored", stats.n_censored)
    rec.scalar("theta_star", th, sol.bracket_width)
    if stats.n_censored == 0:
        m, se = mean_time(stats)
        rec.scalar("mean_T", m, se)
    rec.scalar("mean_T_closed_form", mean_absorption_time(params), 0.0)

    if args.window is not None:
        lo, hi = (float(v) for v in args.window.split(","))
    else:
        ordered = np.sort(stats.absorption_times)
        lo = probes[0]
        hi = min(probes[-1], t_max)
        if len(ordered) > MIN_FIT_SURVIVORS:
            # Midpoint between the 51st and 50th largest times leaves exactly 50 alive.
            cut = 0.5 * (ordered[-MIN_FIT_SURVIVORS - 1] + ordered[-MIN_FIT_SURVIVORS])
            hi = min(hi, cut)
    fit = fit_survival_rate(stats, (lo, hi))
    rec.scalar("fitted_rate", fit.rate, fit.stderr)
    rec.payload["fit_window"] = [fit.window[0], fit.window[1]]
    rec.rows.append(["fit_window", f"{fit.window[0]!r};{fit.window[1]!r}", ""])

    usable = [p for p in probes if len(stats.states_at[p]) >= MIN_HIST_SURVIVORS]
    if not usable:
        raise StatisticsError(f"no probe time has {MIN_HIST_SURVIVORS} survivors; probes: {list(probes)}")
    probe = usable[-1]
    hist = conditional_histogram(stats, probe, args.k_max)
    ref = qsd_recurrence(params, th)
    tv = total_variation(hist, ref)
    rec.scalar("tv_distance", tv, math.sqrt(args.k_max / hist.n_survivors))
    rec.scalar("tv_probe_time", probe)
    rec.scalar("n_survivors_at_probe", hist.n_survivors)
    nu = ref.dense(args.k_max)
    rec.payload["histogram"] = [
        {
            "k": k + 1,
            "p": float(hist.probs[k]),
            "stderr": math.sqrt(hist.probs[k] * (1 - hist.probs[k]) / hist.n_survivors),
            "nu_star": float(nu[k]),
        }
        for k in range(args.k_max)
    ]
    rec.scalar("histogram_overflow", hist.overflow)


def cmd_verify(args, rec):
    rec.tolerances = {"tol": args.tol, "dps": args.dps, "threshold": args.threshold}
    if args.points:
        pts = [tuple(float(v) for v in p.split(",")) for p in args.points.split(";") if p.strip()]
    else:
        s_spec, x_spec = args.grid_spec.split(",")
        s_lo, s_hi, ns = s_spec.split(":")
        x_lo, x_hi, nx = x_spec.split(":")
        s_grid = np.linspace(float(s_lo), float(s_hi), int(ns) + 1)[1:]  # open at s_lo
        x_grid = np.linspace(float(x_lo), float(x_hi), int(nx))
        pts = [(float(s), float(x)) for s in s_grid for x in x_grid]
    rows, worst, worst_at, n_err = [], 0.0, None, 0
    for s, x in pts:
        entry = {"s": s, "x": x, "residual": None, "status": "ok"}
        try:
            r = identity_residual(s, x, args.tol, dps=args.dps)
            entry["residual"] = r
            if r > args.threshold:
                entry["status"] = "fail"
            if r > worst or worst_at is None:
                worst, worst_at = r, {"s": s, "x": x}
        except DomainError as exc:
            entry["status"], entry["message"] = "domain_error", str(exc)
            n_err += 1
        rows.append(entry)
    rec.payload["n_points"] = len(pts)
    rec.payload["n_domain_errors"] = n_err
    rec.payload["max_residual"] = worst if worst_at is not None else None
    rec.payload["max_residual_error"] = 2 * args.tol
    rec.payload["max_at"] = worst_at
    rec.payload["failures"] = [r for r in rows if r["status"] != "ok"]
    rec.payload["pass"] = not any(r["status"] == "fail" for r in rows)
    rec.header = ["s", "x", "residual", "status"]
    rec.rows = [[r["s"], r["x"], r["residual"], r["status"]] for r in rows]


def build_parser():
    parser = argparse.ArgumentParser(
        prog="qsd-mminf",
        description="Survival rate, QSDs and simulation of the M/M/inf queue absorbed at 0.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, with_model=True):
        if with_model:
            p.add_argument("--a", type=float, default=1.0, help="arrival rate (default 1)")
            p.add_argument("--q", type=float, default=1.0, help="per-customer service rate (default 1)")
        p.add_argument("--tol", type=float, default=DEFAULT_TOL, help="solver/quadrature tolerance (default 1e-12)")
        p.add_argument("--format", choices=("json", "csv"), default="json")

    p = sub.add_parser("theta", help="theta* by both characterizations and their difference")
    common(p)
    p.set_defaults(func=cmd_theta)

    p = sub.add_parser("qsd", help="QSD entries from the recurrence and the generating function")
    common(p)
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--theta", type=float, help="survival rate of the QSD, in (0, theta*]")
    g.add_argument("--minimal", action="store_true", help="use theta = theta* (the Yaglom limit)")
    p.add_argument("--n", type=int, default=20, help="number of entries (default 20)")
    p.set_defaults(func=cmd_qsd)

    p = sub.add_parser("laplace", help="E_1[exp(theta T)] over a grid of theta")
    common(p)
    p.add_argument("--theta-grid", default="0.001:0.4:20", help="comma list or lo:hi:n (default 0.001:0.4:20)")
    p.add_argument("--guard", type=float, default=1e-4, help="refuse points within guard*q of theta* (default 1e-4)")
    p.set_defaults(func=cmd_laplace)

    p = sub.add_parser("simulate", help="Monte Carlo absorption times, survival slope and Yaglom histogram")
    common(p)
    p.add_argument("--n", type=int, default=DEFAULT_N, help=f"trajectories (default {DEFAULT_N})")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED, help=f"64-bit seed (default {DEFAULT_SEED})")
    p.add_argument("--t-max", type=float, default=None, help="censoring horizon (default 50/theta*)")
    p.add_argument("--probes", default=None, help="probe times, comma list or lo:hi:n (default 6 points on [5/theta*, 30/theta*])")
    p.add_argument("--window", default=None, help="fit window 'lo,hi' (default first probe to the last time with 50 survivors)")
    p.add_argument("--k-max", type=int, default=30, help="histogram states 1..k_max (default 30)")
    p.add_argument("--workers", type=int, default=None, help="worker threads; capped by $QSD_MMINF_THREADS")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("verify", help="residual of F(s,x) = 1 - s e^x bargamma(s,x) over a grid")
    common(p, with_model=False)
    p.add_argument("--grid-spec", default=DEFAULT_GRID, help=f"'s_lo:s_hi:ns,x_lo:x_hi:nx', s open at s_lo (default {DEFAULT_GRID})")
    p.add_argument("--points", default=None, help="explicit points 's,x;s,x;...' instead of a grid")
    p.add_argument("--dps", type=int, default=EXTENDED_DPS, help=f"working digits (default {EXTENDED_DPS})")
    p.add_argument("--threshold", type=float, default=IDENTITY_THRESHOLD, help="pass threshold (default 1e-10)")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None):
    logging.basicConfig(stream=sys.stderr, level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    rec = Record(args.command)
    code = 0
    try:
        args.func(args, rec)
    except QsdError as exc:
        code = exc.exit_code
        rec.error = {"type": type(exc).__name__, "message": str(exc)}
        if isinstance(exc, ParameterError):
            rec.error["field"] = exc.field
        if isinstance(exc, InvalidThetaError):
            rec.error["index"] = exc.index
        log.error("%s", exc)
    sys.stdout.write(rec.render(args.format))
    return code


if __name__ == "__main__":
    sys.exit(main())
