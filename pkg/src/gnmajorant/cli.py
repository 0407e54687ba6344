"""Command-line front end.

Exit codes: 0 success, 2 usage or parameter error, 3 non-convergence,
4 verification failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from typing import Optional

import numpy as np

from .errors import GNMajorantError, SharpnessNotMet
from .families import (
    L_PRESETS,
    holder_majorant,
    integrable_L_preset,
    linear_majorant,
    lipschitz_majorant,
    smale_majorant,
)
from .majorant import MajorantFunction, compute_radii
from .problems import ProblemInstance, corpus, get_problem, problem_names
from .solver import CONVERGED, SolveConfig, gauss_newton_solve
from .verify import (
    DEFAULT_SEED,
    cycle_demo,
    majorant_trajectory,
    odd_extension_problem,
    sphere_directions,
    verify_problem,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NONCONVERGENCE = 3
EXIT_VERIFY_FAILED = 4

FAMILIES = ("holder", "lipschitz", "smale", "integrable-L", "linear")
SWEEP_FRACTIONS = tuple(round(0.1 * i, 10) for i in range(1, 16))


class UsageError(Exception):
    pass


def fmt(x) -> str:
    """17 significant digits, so a CSV value round-trips to the same double."""
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else str(x)
    return obj


def to_json(payload: dict) -> str:
    return json.dumps(_jsonable({"schema": 1, **payload}), indent=2, sort_keys=False) + "\n"


def to_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


def emit(text: str, output: Optional[str]) -> None:
    if output:
        with open(output, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def human_stream(args):
    """Summaries go to stderr when stdout carries machine-readable output."""
    return sys.stderr if args.format and not args.output else sys.stdout


def parse_vector(text: str) -> np.ndarray:
    try:
        return np.array([float(v) for v in text.split(",")])
    except ValueError as exc:
        raise UsageError(f"cannot parse vector {text!r}") from exc


# -- argument helpers --------------------------------------------------------

def _add_io(p):
    p.add_argument("--output", help="write the result to this path instead of stdout")
    p.add_argument("--format", choices=("csv", "json"), default=None)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)


def _add_solver(p):
    p.add_argument("--max-iters", type=int, default=100)
    p.add_argument("--step-tol", type=float, default=1e-14)
    p.add_argument("--grad-tol", type=float, default=1e-12)


def _add_family(p, required=False):
    p.add_argument("--family", choices=FAMILIES, required=required)
    p.add_argument("--K", type=float, default=None)
    p.add_argument("--p", type=float, default=None)
    p.add_argument("--gamma", type=float, default=None)
    p.add_argument("--preset", choices=L_PRESETS, default=None)
    p.add_argument("--R", type=float, default=None, help="domain bound for integrable-L presets")


def _add_problem(p):
    p.add_argument("--problem", required=True,
                   help="problem name (see `list`); `cycle` builds the odd extension of --family")
    p.add_argument("--a", type=float, default=None)
    p.add_argument("--b", type=float, default=None)
    p.add_argument("--K-override", dest="K_override", type=float, default=None,
                   help="replace the attached Hölder/Lipschitz constant")
    p.add_argument("--gamma-override", dest="gamma_override", type=float, default=None)


def _cfg(args) -> SolveConfig:
    try:
        return SolveConfig(max_iters=args.max_iters, step_tol=args.step_tol, grad_tol=args.grad_tol)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def build_majorant(args) -> MajorantFunction:
    fam = args.family
    if fam is None:
        raise UsageError("--family is required")
    if fam in ("holder", "lipschitz"):
        if args.K is None:
            raise UsageError(f"--K is required for --family {fam}")
        if fam == "lipschitz":
            return lipschitz_majorant(args.K)
        return holder_majorant(args.K, 1.0 if args.p is None else args.p)
    if fam == "smale":
        if args.gamma is None:
            raise UsageError("--gamma is required for --family smale")
        return smale_majorant(args.gamma)
    if fam == "linear":
        return linear_majorant()
    if args.preset is None:
        raise UsageError("--preset is required for --family integrable-L")
    kwargs = {"K": 1.0 if args.K is None else args.K, "R": args.R}
    if args.p is not None:
        kwargs["p"] = args.p
    return integrable_L_preset(args.preset, **kwargs)


def resolve_problem(args) -> ProblemInstance:
    if args.problem == "cycle":
        if getattr(args, "family", None) is None:
            raise UsageError("--problem cycle needs --family and its parameters")
        return odd_extension_problem(build_majorant(args))
    problem = get_problem(args.problem, args.a, args.b)
    m = problem.majorant
    if args.K_override is not None:
        if m is None or m.name != "holder":
            raise UsageError("--K-override applies only to Hölder/Lipschitz certificates")
        problem = problem.with_majorant(holder_majorant(args.K_override, m.params["p"]),
                                        f"K overridden to {args.K_override}")
    if args.gamma_override is not None:
        if m is None or m.name != "smale":
            raise UsageError("--gamma-override applies only to Smale certificates")
        problem = problem.with_majorant(smale_majorant(args.gamma_override),
                                        f"gamma overridden to {args.gamma_override}")
    return problem


def _start_point(args, problem: ProblemInstance, r: float) -> np.ndarray:
    if args.x0 is not None:
        x0 = parse_vector(args.x0)
        if x0.size != problem.n:
            raise UsageError(f"--x0 needs {problem.n} components")
        return x0
    if args.start_frac is None:
        raise UsageError("give --x0 or --start-frac")
    if not 0 < args.start_frac:
        raise UsageError("--start-frac must be positive")
    if not math.isfinite(r):
        raise UsageError("certified radius is unbounded; give --x0")
    d = sphere_directions(problem.n, 1, args.seed)[0]
    return problem.x_star + args.start_frac * r * d


# -- commands ----------------------------------------------------------------

def cmd_radius(args) -> int:
    m = build_majorant(args)
    rep = compute_radii(m, args.kappa, numeric=args.numeric)
    out = human_stream(args)
    fields = ("kappa", "nu", "rho", "sigma", "r")
    for name in fields:
        method = rep.method.get(name, "input")
        print(f"{name:>6} = {fmt(getattr(rep, name))}  [{method}]", file=out)
    print(f"sharpness f(rho)/(rho f'(rho)) - 1 = {fmt(rep.sharpness)}; optimal radius: {rep.is_optimal}",
          file=out)
    if args.output or args.format:
        if (args.format or "json") == "json":
            text = to_json({"command": "radius", "family": m.name, "params": m.params, **rep.to_dict()})
        else:
            rows = [(n, getattr(rep, n), rep.method.get(n, "input")) for n in fields]
            rows.append(("is_optimal", rep.is_optimal, ""))
            text = to_csv(("quantity", "value", "method"), rows)
        emit(text, args.output)
    return EXIT_OK


def solve_rows(problem: ProblemInstance, trace, certified: bool, t_seq):
    m = problem.majorant
    p = m.rate_exponent if m is not None else None
    errs = trace.errors
    rows = []
    for k, x in enumerate(trace.iterates):
        ratio = p_ratio = None
        if k > 0 and errs[k - 1] > 0:
            ratio = errs[k] / errs[k - 1]
            if p is not None:
                p_ratio = errs[k] / errs[k - 1] ** (p + 1)
        t_k = t_seq[k] if certified else None
        rows.append([k, *x, trace.residual_norms[k], errs[k], t_k, ratio, p_ratio,
                     "certified" if certified else "uncertified"])
    header = ["k", *[f"x_{i}" for i in range(problem.n)], "res_norm", "err_norm", "t_k",
              "ratio", "p_ratio", "certificate"]
    return header, rows


def cmd_solve(args) -> int:
    problem = resolve_problem(args)
    m = problem.majorant
    r = compute_radii(m, problem.kappa).r if m is not None else math.nan
    x0 = _start_point(args, problem, r)
    trace = gauss_newton_solve(problem, x0, _cfg(args))
    t0 = float(np.linalg.norm(x0 - problem.x_star))
    certified = m is not None and t0 < r
    t_seq = majorant_trajectory(m, t0, len(trace.iterates))[0] if certified else None
    header, rows = solve_rows(problem, trace, certified, t_seq)
    if (args.format or "csv") == "csv":
        text = to_csv(header, rows)
    else:
        text = to_json({"command": "solve", "problem": problem.name, "status": trace.status,
                        "certified": certified, "columns": header, "rows": rows})
    emit(text, args.output)
    print(f"# {problem.name}: {trace.status} after {trace.iterations} iterations "
          f"({'certified' if certified else 'uncertified'} start)", file=sys.stderr)
    return EXIT_OK if trace.status == CONVERGED else EXIT_NONCONVERGENCE


def cmd_verify(args) -> int:
    problem = resolve_problem(args)
    fracs = (0.25, 0.5, 0.9) if args.start_frac is None else (args.start_frac,)
    report = verify_problem(problem, start_fracs=fracs, directions=args.directions,
                            samples=args.samples, seed=args.seed, cfg=_cfg(args))
    rr = report.radius_report
    out = human_stream(args)
    print(f"{problem.name}: r = {fmt(rr.r)}, sigma = {fmt(rr.sigma)}, optimal = {rr.is_optimal}", file=out)
    n_bound = len(report.bound_checks)
    n_ok = sum(b["pass"] for b in report.bound_checks)
    print(f"  lockstep bound checks: {n_ok}/{n_bound} pass", file=out)
    n_rate_ok = sum(r["pass"] for r in report.rate_records)
    print(f"  rate checks: {n_rate_ok}/{len(report.rate_records)} pass", file=out)
    cp = report.condition_probe
    frac = fmt(cp.detail["pass_fraction"])
    print(f"  condition probe: pass fraction {frac} (worst margin {cp.margin:.3e})", file=out)
    print(f"  uniqueness probe: {report.uniqueness_probe.status}", file=out)
    for name, check in report.extra_checks.items():
        print(f"  {name}: {check.status}", file=out)
    if report.cycle_result is not None:
        verdict = "reproduced" if report.cycle_result.is_cycle else "NOT reproduced"
        print(f"  sharpness cycle: {verdict}", file=out)
    print(f"  overall: {'PASS' if report.overall else 'FAIL'}", file=out)

    if args.output or args.format:
        if (args.format or "json") == "json":
            text = to_json(report.to_dict())
        else:
            text = to_csv(("run", "k", "err", "t_k", "slack", "pass"),
                          [(b["run"], b["k"], b["err"], b["t"], b["slack"], b["pass"])
                           for b in report.bound_checks])
        emit(text, args.output)
    if not report.overall:
        for rec in report.failures()[:5]:
            print("FAILED: " + json.dumps(_jsonable(rec)), file=sys.stderr)
        return EXIT_VERIFY_FAILED
    return EXIT_OK


def cmd_cycle(args) -> int:
    m = build_majorant(args)
    try:
        res = cycle_demo(m)
    except SharpnessNotMet as exc:
        print(f"SharpnessNotMet: {exc}", file=sys.stderr)
        return EXIT_USAGE
    out = human_stream(args)
    print(" ".join(f"{x:.6f}" for x in res.iterates[:4]), file=out)
    print(f"rho = {fmt(res.rho)}; 2-cycle {'reproduced' if res.is_cycle else 'NOT reproduced'}", file=out)
    if args.output or args.format:
        text = to_json({"command": "cycle", **res.to_dict()}) if (args.format or "json") == "json" \
            else to_csv(("k", "x_k"), list(enumerate(res.iterates)))
        emit(text, args.output)
    return EXIT_OK


def sweep_rows(problem: ProblemInstance, fractions, directions: int, seed: int, cfg: SolveConfig):
    m = problem.majorant
    r = compute_radii(m, problem.kappa).r
    dirs = sphere_directions(problem.n, directions, seed)
    tol = 1e-8 * (1.0 + float(np.linalg.norm(problem.x_star)))
    rows = []
    for frac in fractions:
        for j, d in enumerate(dirs):
            trace = gauss_newton_solve(problem, problem.x_star + frac * r * d, cfg)
            final = trace.errors[-1]
            reached = trace.status == CONVERGED and final <= tol
            rows.append((frac, j, reached, trace.iterations, final, trace.status))
    rows.sort(key=lambda row: (row[0], row[1]))
    return rows


def cmd_sweep(args) -> int:
    problem = resolve_problem(args)
    if problem.majorant is None:
        raise UsageError(f"{problem.name} has no majorant; cannot scale starts by r")
    fractions = SWEEP_FRACTIONS if args.fractions is None else tuple(parse_vector(args.fractions))
    rows = sweep_rows(problem, fractions, args.directions, args.seed, _cfg(args))
    header = ("fraction", "direction", "converged", "iterations", "final_error", "status")
    if (args.format or "csv") == "csv":
        text = to_csv(header, rows)
    else:
        text = to_json({"command": "sweep", "problem": problem.name, "columns": header, "rows": rows})
    emit(text, args.output)
    return EXIT_OK


def cmd_list(args) -> int:
    rows = []
    for p in corpus():
        m = p.majorant
        rr = compute_radii(m, p.kappa)
        rows.append((p.name, p.n, p.m, p.kappa, p.beta, m.name, rr.r, rr.sigma))
    header = ("name", "n", "m", "kappa", "beta", "majorant", "r", "sigma")
    if (args.format or "csv") == "csv":
        emit(to_csv(header, rows), args.output)
    else:
        emit(to_json({"command": "list", "columns": header, "rows": rows}), args.output)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gnmajorant",
                                     description="Gauss-Newton local convergence certificates")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("radius", help="convergence and uniqueness radii of a majorant family")
    _add_family(p, required=True)
    p.add_argument("--kappa", type=float, default=math.inf)
    p.add_argument("--numeric", action="store_true", help="ignore closed forms; use bisection")
    _add_io(p)
    p.set_defaults(func=cmd_radius)

    p = sub.add_parser("solve", help="run Gauss-Newton and write the iteration trace")
    _add_problem(p)
    _add_family(p)
    p.add_argument("--x0")
    p.add_argument("--start-frac", type=float, default=None)
    _add_solver(p)
    _add_io(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("verify", help="check the certificate against Gauss-Newton runs")
    _add_problem(p)
    _add_family(p)
    p.add_argument("--start-frac", type=float, default=None)
    p.add_argument("--directions", type=int, default=8)
    p.add_argument("--samples", type=int, default=1000)
    _add_solver(p)
    _add_io(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("cycle", help="Gauss-Newton 2-cycle at the optimal radius")
    _add_family(p, required=True)
    _add_io(p)
    p.set_defaults(func=cmd_cycle)

    p = sub.add_parser("sweep", help="empirical convergence over start-radius fractions")
    _add_problem(p)
    _add_family(p)
    p.add_argument("--fractions", default=None, help="comma-separated fractions of r")
    p.add_argument("--directions", type=int, default=8)
    _add_solver(p)
    _add_io(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("list", help="list the built-in problems")
    p.add_argument("--output")
    p.add_argument("--format", choices=("csv", "json"), default=None)
    p.set_defaults(func=cmd_list)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, GNMajorantError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
