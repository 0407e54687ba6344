"""Scalar majorant functions, their radii, and the scalar Newton sequence.

A majorant ``f`` on ``[0, R)`` satisfies ``f(0) = 0``, ``f'(0) = -1`` and has a
strictly increasing derivative. From it we derive

* ``nu``    -- the end of the interval where ``f' < 0``;
* ``rho``   -- the largest ``delta`` with ``|n_f(t)| / t < 1`` on ``(0, delta)``;
* ``sigma`` -- the end of the interval (inside ``(0, kappa)``) where ``f < 0``;
* ``r = min(kappa, rho)``, the certified convergence radius,

where ``n_f(t) = t - f(t)/f'(t)`` is the Newton map of ``f``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import (
    FAIL,
    PASS,
    CheckResult,
    HypothesisViolated,
    MonotonicityViolated,
    NoNegativeDerivative,
    OutOfDomain,
)

H1_TOL = 1e-12
H2_GRID = 4096
H2_MARGIN = -1e-14
RHO_GRID = 4096
SEQ_FLOOR = 1e-15
SHARPNESS_TOL = 1e-8
NU_GUARD = 1e-14

CLOSED_FORM = "closed-form"
NUMERIC = "numeric"
BISECTION = "bisection"


@dataclass(frozen=True)
class MajorantFunction:
    """A majorant ``f`` with derivative ``f_prime`` on ``[0, R)``.

    ``closed_radii``, when given, returns ``(nu, rho, sigma)`` with ``sigma``
    not yet clipped to ``kappa``. ``closed_step`` is the family's printed
    recurrence for ``t_{k+1}``; it is kept as an oracle, the generic path is
    what the iteration uses. ``rate_exponent`` is an exponent ``p`` for which
    the rate hypothesis is known to hold.
    """

    f: Callable[[float], float]
    f_prime: Callable[[float], float]
    R: float = math.inf
    kind: str = NUMERIC
    name: str = "numeric"
    params: dict = field(default_factory=dict)
    closed_radii: Optional[Callable[[], tuple]] = None
    closed_step: Optional[Callable[[float], float]] = None
    rate_exponent: Optional[float] = None
    h2_proved: bool = False

    def __post_init__(self):
        if not self.R > 0:
            raise HypothesisViolated(f"domain bound R must be positive, got {self.R}")
        f0 = float(self.f(0.0))
        d0 = float(self.f_prime(0.0))
        if abs(f0) > H1_TOL or abs(d0 + 1.0) > H1_TOL:
            raise HypothesisViolated(f"h1 fails: f(0)={f0:.3e}, f'(0)={d0:.3e}")
        if not self.h2_proved:
            ok, worst = _sampled_increasing(self.f_prime, self.R)
            if not ok:
                raise HypothesisViolated(f"h2 fails on the sample grid (worst increment {worst:.3e})")

    def as_numeric(self) -> "MajorantFunction":
        """Same ``f`` with every closed form stripped, forcing the numeric paths."""
        return MajorantFunction(self.f, self.f_prime, R=self.R, kind=NUMERIC,
                                name=self.name, params=dict(self.params),
                                rate_exponent=self.rate_exponent, h2_proved=self.h2_proved)


def _sample_grid(upper: float, n: int) -> np.ndarray:
    if math.isinf(upper):
        upper = 1e4
    else:
        upper = upper * (1.0 - 1e-9)
    return np.concatenate(([0.0], np.geomspace(upper * 1e-12, upper, n - 1)))


def _sampled_increasing(fp, R: float) -> tuple[bool, float]:
    grid = _sample_grid(R, H2_GRID)
    vals = np.array([fp(t) for t in grid])
    if not np.all(np.isfinite(vals)):
        return False, -math.inf
    diffs = np.diff(vals)
    worst = float(diffs.min())
    return worst >= H2_MARGIN, worst


def newton_map(m: MajorantFunction, t: float) -> float:
    """``n_f(t) = t - f(t)/f'(t)``; defined where ``f'(t) < 0``."""
    if t < 0 or t >= m.R:
        raise OutOfDomain(f"t={t} outside [0, R={m.R})")
    if t == 0:
        return 0.0
    d = m.f_prime(t)
    if not d < 0:
        raise OutOfDomain(f"f'({t}) = {d} is not negative (t >= nu)")
    q = m.f(t) / d
    n = t - q
    if n > 4 * np.finfo(float).eps * max(t, abs(q)):
        raise HypothesisViolated(f"n_f({t}) = {n} > 0 contradicts h1/h2")
    return min(n, 0.0)


def majorant_step(m: MajorantFunction, t: float) -> float:
    """One step ``t -> |n_f(t)|`` of the majorant sequence."""
    if t == 0:
        return 0.0
    s = abs(newton_map(m, t))
    if not s < t:
        raise OutOfDomain(f"|n_f({t})| = {s} >= t; t is not below rho")
    return s


@dataclass
class RadiusReport:
    kappa: float
    nu: float
    rho: float
    sigma: float
    r: float
    method: dict
    is_optimal: bool
    sharpness: float = math.nan

    def to_dict(self) -> dict:
        return {
            "kappa": self.kappa,
            "nu": self.nu,
            "rho": self.rho,
            "sigma": self.sigma,
            "r": self.r,
            "method": dict(self.method),
            "is_optimal": self.is_optimal,
            "sharpness": self.sharpness,
        }


def _bisect(fun, lo: float, hi: float) -> float:
    """Boundary between ``fun < 0`` (at ``lo``) and ``fun >= 0`` (at ``hi``)."""
    for _ in range(2000):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if fun(mid) < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _first_nonnegative(fun, upper: float, n: int = RHO_GRID):
    """Scan ``(0, upper)`` for the first point where ``fun >= 0``.

    Returns the crossing located by bisection, or ``None`` when ``fun < 0`` on
    the whole scan. Infinite ``upper`` uses a doubling scan instead.
    """
    raw = fun

    def fun(t):
        try:
            return raw(t)
        except (OverflowError, ZeroDivisionError):
            return math.inf

    if math.isinf(upper):
        grid = (2.0 ** k for k in range(-60, 1000))
    else:
        grid = iter(np.geomspace(upper * 1e-12, upper, n))
    prev = 0.0
    for t in grid:
        t = float(t)
        v = fun(t)
        if v >= 0 or not math.isfinite(v):
            return _bisect(fun, prev, t)
        prev = t
    return None


def _numeric_nu(m: MajorantFunction) -> float:
    upper = m.R if math.isinf(m.R) else m.R * (1.0 - 1e-12)
    nu = _first_nonnegative(m.f_prime, upper)
    if nu is None:
        return m.R
    if nu <= 0:
        raise NoNegativeDerivative("f' >= 0 at every sampled t > 0")
    return nu


def _nu_guard(nu: float) -> float:
    return nu - max(NU_GUARD, 4 * np.finfo(float).eps * nu)


def _numeric_rho(m: MajorantFunction, nu: float) -> float:
    def g(t):
        return abs(t - m.f(t) / m.f_prime(t)) / t - 1.0

    upper = math.inf if math.isinf(nu) else _nu_guard(nu)
    rho = _first_nonnegative(g, upper)
    return nu if rho is None else rho


def _numeric_sigma(m: MajorantFunction, kappa: float) -> float:
    upper = kappa
    if not math.isinf(upper) and upper == m.R:
        upper = upper * (1.0 - 1e-12)
    sigma = _first_nonnegative(m.f, upper)
    return kappa if sigma is None else sigma


def sharpness_value(m: MajorantFunction, rho: float) -> float:
    """``f(rho)/(rho f'(rho)) - 1``; equals 1 exactly when ``rho`` is optimal."""
    if not math.isfinite(rho):
        return math.nan
    return m.f(rho) / (rho * m.f_prime(rho)) - 1.0


def compute_radii(m: MajorantFunction, kappa: float = math.inf, numeric: bool = False) -> RadiusReport:
    """Radii ``nu, rho, sigma, r`` for ``m`` on a domain ball of radius ``kappa``.

    ``kappa`` is clipped to ``R``. Closed forms are used when the family has
    them unless ``numeric`` is set.
    """
    if not kappa > 0:
        raise ValueError(f"kappa must be positive, got {kappa}")
    kappa = min(kappa, m.R)
    if m.closed_radii is not None and not numeric:
        nu, rho, sigma = m.closed_radii()
        sigma = min(sigma, kappa)
        method = dict.fromkeys(("nu", "rho", "sigma"), CLOSED_FORM)
    else:
        nu = _numeric_nu(m)
        rho = _numeric_rho(m, nu)
        sigma = _numeric_sigma(m, kappa)
        method = dict.fromkeys(("nu", "rho", "sigma"), BISECTION)
    method["r"] = method["rho"] if rho <= kappa else "kappa"
    r = min(kappa, rho)
    sharp = sharpness_value(m, rho) if rho < m.R and rho < nu else math.nan
    is_optimal = bool(abs(sharp - 1.0) < SHARPNESS_TOL and rho < kappa)
    return RadiusReport(kappa=kappa, nu=nu, rho=rho, sigma=sigma, r=r, method=method,
                        is_optimal=is_optimal, sharpness=sharp)


@dataclass
class MajorantSequence:
    t: list
    ratios: list
    p_ratios: Optional[list] = None
    p: Optional[float] = None


def run_majorant_sequence(m: MajorantFunction, t0: float, max_steps: int = 100,
                          p: Optional[float] = None) -> MajorantSequence:
    """Iterate ``t_{k+1} = |n_f(t_k)|`` from ``t0`` until ``t_k < 1e-15``."""
    if not t0 > 0:
        raise OutOfDomain(f"t0 must be positive, got {t0}")
    ts = [float(t0)]
    while len(ts) <= max_steps and ts[-1] >= SEQ_FLOOR:
        nxt = majorant_step(m, ts[-1])
        if not nxt < ts[-1]:
            raise MonotonicityViolated(f"t_{len(ts)} = {nxt} >= t_{len(ts) - 1} = {ts[-1]}")
        ts.append(nxt)
    ratios = [b / a for a, b in zip(ts, ts[1:])]
    p_ratios = None
    if p is not None:
        p_ratios = [b / a ** (p + 1) for a, b in zip(ts, ts[1:])]
    return MajorantSequence(ts, ratios, p_ratios, p)


def check_h3(m: MajorantFunction, p: float, n: int = 512) -> CheckResult:
    """Sampled check that ``|n_f(t)| / t^(p+1)`` is strictly increasing on ``(0, nu)``.

    Increments down to ``-1e-12`` relative are tolerated as rounding noise,
    but the function must rise overall across the grid.
    """
    if not 0 <= p <= 1:
        raise OutOfDomain(f"p must lie in [0, 1], got {p}")
    nu = compute_radii(m).nu
    upper = 1e6 if math.isinf(nu) else nu * (1.0 - 1e-6)
    lower = 1e-8 if math.isinf(nu) else nu * 1e-4
    grid = np.geomspace(lower, upper, n)
    g = np.array([abs(newton_map(m, t)) / t ** (p + 1) for t in grid])
    rel = np.diff(g) / np.maximum(np.abs(g[1:]), np.finfo(float).tiny)
    worst = float(rel.min())
    ok = worst >= -1e-12 and g[-1] > g[0]
    return CheckResult(PASS if ok else FAIL, margin=worst, label="sampled",
                       detail={"p": p, "points": n, "g_first": float(g[0]), "g_last": float(g[-1])})
