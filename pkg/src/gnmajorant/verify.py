"""Compare Gauss-Newton runs against what the majorant certifies.

Every inequality is checked in floating point with an additive slack of
``1e-10 * (1 + scale)``; anything beyond the slack is a failure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import (
    FAIL,
    PASS,
    CheckResult,
    MissingMajorant,
    OutOfDomain,
    OutsideCertifiedBall,
    SharpnessNotMet,
)
from .linalg import as_vector, operator_norm, pseudoinverse_norm
from .majorant import (
    SHARPNESS_TOL,
    MajorantFunction,
    RadiusReport,
    check_h3,
    compute_radii,
    run_majorant_sequence,
    sharpness_value,
)
from .problems import ProblemInstance
from .solver import CONVERGED, IterationTrace, SolveConfig, gauss_newton_solve, gn_step

SLACK = 1e-10
DEFAULT_SEED = 42


def slack(scale: float) -> float:
    return SLACK * (1.0 + abs(scale))


@dataclass
class CycleResult:
    rho: float
    iterates: list
    sharpness: float
    is_cycle: bool

    def to_dict(self) -> dict:
        return {"rho": self.rho, "iterates": list(self.iterates),
                "sharpness": self.sharpness, "is_cycle": self.is_cycle}


@dataclass
class LinearizationErrors:
    E_F_norm: float
    e_f_value: float
    beta: float
    holds: bool


@dataclass
class VerificationReport:
    problem_name: str
    radius_report: RadiusReport
    bound_checks: list = field(default_factory=list)
    rate_records: list = field(default_factory=list)
    condition_probe: Optional[CheckResult] = None
    cycle_result: Optional[CycleResult] = None
    uniqueness_probe: Optional[CheckResult] = None
    extra_checks: dict = field(default_factory=dict)
    traces: list = field(default_factory=list)

    @property
    def overall(self) -> bool:
        ok = all(rec["pass"] for rec in self.bound_checks)
        ok = ok and all(rec["pass"] for rec in self.rate_records)
        for check in (self.condition_probe, self.uniqueness_probe):
            if check is not None:
                ok = ok and check.passed
        if self.cycle_result is not None:
            ok = ok and self.cycle_result.is_cycle
        return ok and all(c.passed for c in self.extra_checks.values())

    def failures(self) -> list:
        bad = [dict(kind="bound", **rec) for rec in self.bound_checks if not rec["pass"]]
        bad += [dict(kind="rate", **rec) for rec in self.rate_records if not rec["pass"]]
        for name, check in [("condition_probe", self.condition_probe),
                            ("uniqueness_probe", self.uniqueness_probe), *self.extra_checks.items()]:
            if check is not None and not check.passed:
                bad.append({"kind": name, **check.to_dict()})
        if self.cycle_result is not None and not self.cycle_result.is_cycle:
            bad.append({"kind": "cycle", **self.cycle_result.to_dict()})
        return bad

    def to_dict(self) -> dict:
        return {
            "schema": 1,
            "problem": self.problem_name,
            "overall": self.overall,
            "radii": self.radius_report.to_dict(),
            "bound_checks": self.bound_checks,
            "rate_records": self.rate_records,
            "condition_probe": None if self.condition_probe is None else self.condition_probe.to_dict(),
            "uniqueness_probe": None if self.uniqueness_probe is None else self.uniqueness_probe.to_dict(),
            "cycle": None if self.cycle_result is None else self.cycle_result.to_dict(),
            "extra_checks": {k: v.to_dict() for k, v in self.extra_checks.items()},
        }


def _require_majorant(problem, m):
    m = m if m is not None else problem.majorant
    if m is None:
        raise MissingMajorant(f"{problem.name} has no attached majorant")
    return m


def majorant_trajectory(m: MajorantFunction, t0: float, length: int, p: Optional[float] = None):
    """``t_0 .. t_{length-1}``; entries past the point where ``t`` drops below 1e-15 are 0.

    Returns ``(t, exact)`` where ``exact`` is how many entries were iterated.
    """
    if t0 == 0:
        return [0.0] * length, length
    seq = run_majorant_sequence(m, t0, max_steps=max(length - 1, 0), p=p)
    ts = list(seq.t[:length])
    exact = len(ts)
    ts += [0.0] * (length - exact)
    return ts, exact


def verify_majorant_bound(problem: ProblemInstance, x0, m: Optional[MajorantFunction] = None,
                          p: Optional[float] = None, cfg: SolveConfig = SolveConfig(),
                          run_index: int = 0, report: Optional[VerificationReport] = None
                          ) -> VerificationReport:
    """Run Gauss-Newton and the majorant sequence in lockstep from ``x0``.

    Checks ``||x_k - x*|| <= t_k`` at every step. When the rate hypothesis
    holds for ``p`` (default: the family's exponent) it also checks
    ``||x_{k+1} - x*|| <= (t_{k+1}/t_k^(p+1)) ||x_k - x*||^(p+1)``, the same with
    ``t_1/t_0^(p+1)``, and the closed envelope in ``t_0, t_1``.
    """
    m = _require_majorant(problem, m)
    radii = compute_radii(m, problem.kappa)
    x0 = as_vector(x0)
    t0 = float(np.linalg.norm(x0 - problem.x_star))
    if not t0 < radii.r:
        raise OutsideCertifiedBall(f"||x0 - x*|| = {t0} is not below r = {radii.r}")
    if report is None:
        report = VerificationReport(problem.name, radii)

    trace = gauss_newton_solve(problem, x0, cfg)
    report.traces.append(trace)
    errs = trace.errors
    if p is None:
        p = m.rate_exponent
    rate_ok = p is not None and check_h3(m, p).passed
    ts, exact = majorant_trajectory(m, t0, len(errs), p if rate_ok else None)

    for k, (e, t) in enumerate(zip(errs, ts)):
        s = t - e
        report.bound_checks.append({"run": run_index, "k": k, "err": e, "t": t, "slack": s,
                                    "pass": bool(s >= -slack(t))})
    if trace.status != CONVERGED:
        report.bound_checks.append({"run": run_index, "k": len(errs), "err": math.nan, "t": math.nan,
                                    "slack": math.nan, "pass": False, "status": trace.status})

    for k in range(len(errs) - 1):
        e, e1 = errs[k], errs[k + 1]
        rec = {"run": run_index, "k": k, "ratio": e1 / e if e > 0 else math.nan}
        ok = True
        if rate_ok and k + 1 < exact and ts[k] > 0:
            c_k = ts[k + 1] / ts[k] ** (p + 1)
            c_0 = ts[1] / ts[0] ** (p + 1)
            bound_k = c_k * e ** (p + 1)
            bound_0 = c_0 * e ** (p + 1)
            rec.update(p=p, p_ratio=e1 / e ** (p + 1) if e > 0 else math.nan,
                       majorant_p_ratio=c_k, bound_k=bound_k, bound_0=bound_0)
            ok = e1 <= bound_k + slack(bound_k) and e1 <= bound_0 + slack(bound_0)
        rec["pass"] = bool(ok)
        report.rate_records.append(rec)

    if rate_ok and exact >= 2 and ts[0] > 0:
        q = ts[1] / ts[0]
        for k, e in enumerate(errs):
            expo = k if p == 0 else ((p + 1) ** k - 1) / p
            env = ts[0] * q ** expo
            if not e <= env + slack(env):
                report.rate_records.append({"run": run_index, "k": k, "envelope": env, "err": e, "pass": False})
    return report


def _ball_sample(rng, center, radius, count):
    n = center.size
    d = rng.standard_normal((count, n))
    d /= np.linalg.norm(d, axis=1)[:, None]
    rad = radius * rng.random(count) ** (1.0 / n)
    return center + d * rad[:, None]


def probe_radius(problem: ProblemInstance, m: MajorantFunction, radii: Optional[RadiusReport] = None) -> float:
    """Sampling radius: ``min(kappa, R)``, or ``min(R, 10 rho)`` for an unbounded domain."""
    radii = radii or compute_radii(m, problem.kappa)
    kappa = min(problem.kappa, m.R)
    if math.isinf(kappa):
        kappa = min(m.R, 10.0 * radii.rho)
    if math.isinf(kappa):
        kappa = 10.0
    return kappa


def probe_majorant_condition(problem: ProblemInstance, m: Optional[MajorantFunction] = None,
                             samples: int = 1000, seed: int = DEFAULT_SEED,
                             taus: Optional[Sequence[float]] = None) -> CheckResult:
    """Sample ``beta ||J(x) - J(x* + tau (x - x*))|| <= f'(||x-x*||) - f'(tau ||x-x*||)``."""
    m = _require_majorant(problem, m)
    if samples < 1:
        raise ValueError("samples must be >= 1")
    rng = np.random.default_rng(seed)
    radius = probe_radius(problem, m)
    xs = _ball_sample(rng, problem.x_star, radius, samples)
    tau = rng.random(samples) if taus is None else np.resize(np.asarray(taus, dtype=float), samples)
    beta = problem.beta
    passed = 0
    worst = math.inf
    worst_at = None
    for x, tu in zip(xs, tau):
        d = x - problem.x_star
        t = float(np.linalg.norm(d))
        lhs = beta * operator_norm(np.asarray(problem.J(x)) - np.asarray(problem.J(problem.x_star + tu * d)))
        rhs = m.f_prime(t) - m.f_prime(tu * t)
        margin = rhs - lhs
        if margin >= -slack(rhs):
            passed += 1
        if margin < worst:
            worst, worst_at = margin, (t, float(tu))
    frac = passed / samples
    return CheckResult(PASS if passed == samples else FAIL, margin=worst, label="sampled",
                       detail={"pass_fraction": frac, "samples": samples, "seed": seed,
                               "radius": radius, "worst_at": worst_at})


def odd_extension_problem(m: MajorantFunction) -> ProblemInstance:
    """Scalar problem ``h(t) = sign(t) f(|t|)`` on ``(-R, R)``, root 0, ``h'(t) = f'(|t|)``."""

    def h(x):
        t = float(np.asarray(x).reshape(-1)[0])
        return np.array([m.f(t) if t >= 0 else -m.f(-t)])

    def dh(x):
        t = float(np.asarray(x).reshape(-1)[0])
        return np.array([[m.f_prime(abs(t))]])

    return ProblemInstance(name=f"odd-extension-{m.name}", F=h, J=dh, x_star=np.zeros(1),
                           domain_radius=m.R, majorant=m,
                           majorant_note="odd extension of the majorant itself")


def cycle_demo(m: MajorantFunction, steps: int = 4) -> CycleResult:
    """Gauss-Newton on the odd extension from ``-rho``: a 2-cycle when ``rho`` is sharp."""
    radii = compute_radii(m)
    rho = radii.rho
    sharp = sharpness_value(m, rho)
    if not (abs(sharp - 1.0) < SHARPNESS_TOL and rho < radii.kappa):
        raise SharpnessNotMet(f"f(rho)/(rho f'(rho)) - 1 = {sharp} (need 1), rho = {rho}")
    h = odd_extension_problem(m)
    xs = [-rho]
    x = np.array([-rho])
    for _ in range(steps):
        x = gn_step(h, x)
        xs.append(float(x[0]))
    is_cycle = abs(xs[1] - rho) < 1e-9 and abs(xs[2] + rho) < 1e-9
    return CycleResult(rho=rho, iterates=xs, sharpness=sharp, is_cycle=bool(is_cycle))


def uniqueness_probe(problem: ProblemInstance, m: Optional[MajorantFunction] = None,
                     samples: int = 1000, seed: int = DEFAULT_SEED,
                     radius: Optional[float] = None) -> CheckResult:
    """``f < 0`` on a grid in ``(0, sigma)`` and no zero of ``F`` sampled in ``B(x*, sigma)``.

    ``radius`` replaces ``sigma`` for the sampled part (e.g. a printed value);
    a disagreement with ``sigma`` is flagged in the result detail.
    """
    m = _require_majorant(problem, m)
    radii = compute_radii(m, problem.kappa)
    sigma = radii.sigma
    if math.isinf(sigma):
        sigma = probe_radius(problem, m, radii)
    grid = sigma * np.arange(1, 1025) / 1025.0
    fvals = np.array([m.f(t) for t in grid])
    scalar_ok = bool(np.all(fvals < 0))

    ball = sigma if radius is None else radius
    detail = {"sigma": sigma, "ball": ball, "scalar_grid_ok": scalar_ok, "samples": samples}
    if radius is not None:
        detail["radius_discrepancy"] = bool(abs(radius - sigma) > 1e-9 * max(1.0, sigma))
    rng = np.random.default_rng(seed)
    xs = _ball_sample(rng, problem.x_star, ball, samples)
    norms = np.array([np.linalg.norm(problem.F(x)) for x in xs if np.any(x != problem.x_star)])
    empirical_ok = bool(np.all(norms > 1e-10))
    detail["min_residual"] = float(norms.min()) if norms.size else math.nan
    status = PASS if scalar_ok and empirical_ok else FAIL
    return CheckResult(status, margin=float(-fvals.max()), label="sampled", detail=detail)


def linearization_errors(problem: ProblemInstance, m: Optional[MajorantFunction], x) -> LinearizationErrors:
    """``beta ||E_F(x, x*)||`` against ``e_f(||x - x*||, 0) = t f'(t) - f(t)``."""
    m = _require_majorant(problem, m)
    x = as_vector(x)
    d = problem.x_star - x
    t = float(np.linalg.norm(d))
    if not t < min(problem.kappa, m.R):
        raise OutOfDomain(f"||x - x*|| = {t} is not below kappa")
    E = problem.F(problem.x_star) - (problem.F(x) + np.asarray(problem.J(x)) @ d)
    e_norm = float(np.linalg.norm(E))
    e_f = m.f(0.0) - (m.f(t) + m.f_prime(t) * (0.0 - t))
    beta = problem.beta
    return LinearizationErrors(E_F_norm=e_norm, e_f_value=e_f, beta=beta,
                               holds=bool(beta * e_norm <= e_f + slack(e_f)))


def pseudoinverse_ball_bound(problem: ProblemInstance, m: Optional[MajorantFunction], x) -> CheckResult:
    """``||F'(x)^+|| <= beta / |f'(||x - x*||)|`` inside ``B(x*, min(nu, kappa))``."""
    m = _require_majorant(problem, m)
    x = as_vector(x)
    t = float(np.linalg.norm(x - problem.x_star))
    radii = compute_radii(m, problem.kappa)
    if not t < min(radii.nu, radii.kappa):
        raise OutOfDomain(f"||x - x*|| = {t} is not below min(nu, kappa)")
    lhs = pseudoinverse_norm(problem.J(x))
    rhs = problem.beta / abs(m.f_prime(t))
    ok = lhs <= rhs * (1.0 + SLACK)
    return CheckResult(PASS if ok else FAIL, lhs=lhs, rhs=rhs, margin=rhs - lhs)


def sphere_directions(n: int, count: int, seed: int = DEFAULT_SEED) -> np.ndarray:
    """``count`` seeded unit vectors in ``R^n``; in one dimension they alternate -1, +1."""
    if n == 1:
        return np.array([[(-1.0) ** (i + 1)] for i in range(count)])
    rng = np.random.default_rng(seed)
    d = rng.standard_normal((count, n))
    return d / np.linalg.norm(d, axis=1)[:, None]


def verify_problem(problem: ProblemInstance, m: Optional[MajorantFunction] = None,
                   start_fracs: Sequence[float] = (0.25, 0.5, 0.9), directions: int = 8,
                   samples: int = 1000, seed: int = DEFAULT_SEED,
                   cfg: SolveConfig = SolveConfig(), ball_points: int = 100) -> VerificationReport:
    """The full harness: lockstep bounds from several starts, condition and
    uniqueness probes, the pointwise bounds, and the sharpness cycle."""
    m = _require_majorant(problem, m)
    radii = compute_radii(m, problem.kappa)
    report = VerificationReport(problem.name, radii)
    dirs = sphere_directions(problem.n, directions, seed)
    run = 0
    for frac in start_fracs:
        if not 0 < frac < 1:
            raise ValueError(f"start fraction must lie in (0, 1), got {frac}")
        for d in dirs:
            verify_majorant_bound(problem, problem.x_star + frac * radii.r * d, m, cfg=cfg,
                                  run_index=run, report=report)
            run += 1

    report.condition_probe = probe_majorant_condition(problem, m, samples, seed)
    printed = problem.params.get("printed_uniqueness_radius")
    report.uniqueness_probe = uniqueness_probe(problem, m, samples, seed, radius=printed)

    rng = np.random.default_rng(seed + 1)
    inner = min(radii.nu, radii.kappa, radii.r)
    pts = _ball_sample(rng, problem.x_star, inner, ball_points)
    lin = [linearization_errors(problem, m, x) for x in pts]
    n_lin = sum(e.holds for e in lin)
    report.extra_checks["linearization"] = CheckResult(
        PASS if n_lin == len(lin) else FAIL, label="sampled",
        margin=min(e.e_f_value - e.beta * e.E_F_norm for e in lin),
        detail={"pass_fraction": n_lin / len(lin)})
    ball = [pseudoinverse_ball_bound(problem, m, x) for x in pts]
    n_ball = sum(c.passed for c in ball)
    report.extra_checks["pseudoinverse_ball"] = CheckResult(
        PASS if n_ball == len(ball) else FAIL, label="sampled",
        margin=min(c.margin for c in ball), detail={"pass_fraction": n_ball / len(ball)})

    if radii.is_optimal:
        report.cycle_result = cycle_demo(m)
    return report


def superlinear_by(trace: IterationTrace, k_max: int = 10, threshold: float = 1e-3) -> bool:
    """True when some ratio ``e_{k+1}/e_k`` with ``k < k_max`` falls below ``threshold``."""
    errs = trace.errors
    for k in range(min(k_max, len(errs) - 1)):
        if errs[k] > 0 and errs[k + 1] / errs[k] < threshold:
            return True
    return len(errs) >= 1 and errs[-1] == 0.0
