"""Concrete majorant families.

Hölder-like (Lipschitz at ``p = 1``), Smale's analytic ``gamma`` family, the
degenerate linear majorant, and the generalized-Lipschitz family built from a
positive integrable ``L`` by quadrature.
"""

from __future__ import annotations

import bisect
import math
from functools import lru_cache
from typing import Callable, Optional

import numpy as np

from .errors import FAIL, PASS, CheckResult, InvalidParameter, NonPositiveL, OutOfDomain
from .majorant import CLOSED_FORM, NUMERIC, MajorantFunction
from .quadrature import simpson_leaves


def holder_majorant(K: float, p: float) -> MajorantFunction:
    """``f(t) = K t^(p+1)/(p+1) - t`` for the Hölder-like condition."""
    if not (K > 0 and math.isfinite(K)):
        raise InvalidParameter(f"K must be positive and finite, got {K}")
    if not 0 < p <= 1:
        raise InvalidParameter(f"p must lie in (0, 1], got {p}")

    def f(t):
        return K * t ** (p + 1) / (p + 1) - t

    def f_prime(t):
        return K * t ** p - 1.0

    def radii():
        nu = (1.0 / K) ** (1.0 / p)
        rho = ((p + 1) / ((2 * p + 1) * K)) ** (1.0 / p)
        sigma = ((p + 1) / K) ** (1.0 / p)
        return nu, rho, sigma

    def step(t):
        return K * p * t ** (p + 1) / ((p + 1) * (1.0 - K * t ** p))

    return MajorantFunction(f, f_prime, R=math.inf, kind=CLOSED_FORM, name="holder",
                            params={"K": K, "p": p}, closed_radii=radii, closed_step=step,
                            rate_exponent=p, h2_proved=True)


def lipschitz_majorant(K: float) -> MajorantFunction:
    return holder_majorant(K, 1.0)


def smale_majorant(gamma: float) -> MajorantFunction:
    """``f(t) = t/(1 - gamma t) - 2t`` on ``[0, 1/gamma)``."""
    if not (gamma > 0 and math.isfinite(gamma)):
        raise InvalidParameter(f"gamma must be positive and finite, got {gamma}")

    def f(t):
        return t / (1.0 - gamma * t) - 2.0 * t

    def f_prime(t):
        return 1.0 / (1.0 - gamma * t) ** 2 - 2.0

    def radii():
        nu = (1.0 - 1.0 / math.sqrt(2.0)) / gamma
        rho = (5.0 - math.sqrt(17.0)) / (4.0 * gamma)
        return nu, rho, 1.0 / (2.0 * gamma)

    def step(t):
        return gamma * t * t / (2.0 * (1.0 - gamma * t) ** 2 - 1.0)

    # f' is convex, so the rate hypothesis holds with p = 1
    return MajorantFunction(f, f_prime, R=1.0 / gamma, kind=CLOSED_FORM, name="smale",
                            params={"gamma": gamma}, closed_radii=radii, closed_step=step,
                            rate_exponent=1.0, h2_proved=True)


def linear_majorant() -> MajorantFunction:
    """``f(t) = -t``: the majorant of an affine map; Gauss-Newton is exact in one step."""
    return MajorantFunction(lambda t: -t, lambda t: -1.0, R=math.inf, kind=CLOSED_FORM,
                            name="linear", closed_radii=lambda: (math.inf, math.inf, math.inf),
                            closed_step=lambda t: 0.0)


class IntegrableLMajorant:
    """Generalized-Lipschitz majorant ``f(t) = int_0^t L(u)(t-u) du - t``.

    Both ``int_0^t L`` and ``int_0^t u L`` are tabulated at construction on
    one adaptive Simpson mesh over ``[0, R]``; evaluation at ``t`` adds a
    partial panel. ``f`` is assembled as ``t*I0 - I1 - t`` and ``f'`` as
    ``I0 - 1`` from the same numbers, so they stay mutually consistent.

    When ``singular_exponent`` ``a`` is given (``L(u) ~ c u^a`` near 0,
    ``a > -1``), the mesh starts at ``u = 1e-14`` with a geometric initial
    partition and the head ``[0, 1e-14]`` is integrated analytically.
    """

    START = 1e-14

    def __init__(self, L: Callable[[float], float], R: float, quadrature_tol: float = 1e-10,
                 singular_exponent: Optional[float] = None):
        if not (R > 0 and math.isfinite(R)):
            raise InvalidParameter(f"R must be positive and finite, got {R}")
        if not quadrature_tol > 0:
            raise InvalidParameter("quadrature_tol must be positive")
        if singular_exponent is not None and not singular_exponent > -1:
            raise InvalidParameter("an integrable algebraic singularity needs exponent > -1")
        self.L = L
        self.R = float(R)
        self.quadrature_tol = quadrature_tol
        self.singular_exponent = singular_exponent

        if singular_exponent is None:
            self.start = 0.0
            edges = np.linspace(0.0, self.R, 9)
        else:
            self.start = self.START
            n = int(math.ceil(math.log2(self.R / self.start)))
            edges = np.geomspace(self.start, self.R, n + 1)
            a = singular_exponent
            self._c = self._L(self.start) / self.start ** a

        panel_tol = quadrature_tol / (len(edges) - 1)
        leaves = []
        for lo, hi in zip(edges, edges[1:]):
            leaves.extend(simpson_leaves(self._integrand, float(lo), float(hi), panel_tol))
        self._nodes = [self.start] + [leaf[1] for leaf in leaves]
        self._tols = [leaf[3] for leaf in leaves]
        head = self._head(self.start)
        cum = np.cumsum([head] + [leaf[2] for leaf in leaves], axis=0)
        self._cum = cum
        self.integrals = lru_cache(maxsize=16384)(self._integrals)

    def _L(self, u):
        v = float(self.L(u))
        if not (v > 0 and math.isfinite(v)):
            raise NonPositiveL(f"L({u}) = {v} is not positive and finite")
        return v

    def _integrand(self, u):
        v = self._L(u)
        return np.array([v, u * v])

    def _head(self, t):
        if self.singular_exponent is None or t <= 0:
            return np.zeros(2)
        a = self.singular_exponent
        return np.array([self._c * t ** (a + 1) / (a + 1), self._c * t ** (a + 2) / (a + 2)])

    def _integrals(self, t: float) -> tuple[float, float]:
        """``(int_0^t L, int_0^t u L)``."""
        if t < 0 or t > self.R:
            raise OutOfDomain(f"t={t} outside [0, R={self.R}]")
        if t <= self.start:
            i0, i1 = self._head(t)
            return float(i0), float(i1)
        i = min(bisect.bisect_right(self._nodes, t) - 1, len(self._tols) - 1)
        base = self._cum[i]
        lo = self._nodes[i]
        if t > lo:
            part = sum(leaf[2] for leaf in simpson_leaves(self._integrand, lo, t, self._tols[i]))
            base = base + part
        return float(base[0]), float(base[1])

    def f(self, t):
        i0, i1 = self.integrals(float(t))
        return t * i0 - i1 - t

    def f_prime(self, t):
        return self.integrals(float(t))[0] - 1.0

    def step(self, t):
        i0, i1 = self.integrals(float(t))
        return i1 / (1.0 - i0)

    def majorant(self, rate_exponent: Optional[float] = None) -> MajorantFunction:
        return MajorantFunction(self.f, self.f_prime, R=self.R, kind=NUMERIC, name="integrable-L",
                                params={"R": self.R, "quadrature_tol": self.quadrature_tol},
                                closed_step=self.step, rate_exponent=rate_exponent)


def integrable_L_majorant(L, R: float, quadrature_tol: float = 1e-10,
                          singular_exponent: Optional[float] = None,
                          rate_exponent: Optional[float] = None) -> MajorantFunction:
    return IntegrableLMajorant(L, R, quadrature_tol, singular_exponent).majorant(rate_exponent)


L_PRESETS = ("constant", "holder", "sin2", "exp")


def integrable_L_preset(name: str, K: float = 1.0, p: float = 1.0 / 3.0,
                        R: Optional[float] = None, quadrature_tol: float = 1e-10) -> MajorantFunction:
    """Named ``L`` functions used by the CLI and the test-suite."""
    if name == "constant":
        if not K > 0:
            raise InvalidParameter("K must be positive")
        return integrable_L_majorant(lambda u: K, R or 4.0 / K, quadrature_tol, rate_exponent=1.0)
    if name == "holder":
        if not (K > 0 and 0 < p <= 1):
            raise InvalidParameter("need K > 0 and 0 < p <= 1")
        sigma = ((p + 1) / K) ** (1.0 / p)
        return integrable_L_majorant(lambda u: K * p * u ** (p - 1), R or 2.0 * sigma, quadrature_tol,
                                     singular_exponent=(p - 1) if p < 1 else None)
    if name == "sin2":
        return integrable_L_majorant(lambda u: 1.0 + math.sin(u) ** 2, R or 2.0, quadrature_tol)
    if name == "exp":
        return integrable_L_majorant(lambda u: math.exp(-u), R or 4.0, quadrature_tol)
    raise InvalidParameter(f"unknown L preset {name!r}; choose from {', '.join(L_PRESETS)}")


def check_condition_h(L, p: float, nu: float, n: int = 1024) -> CheckResult:
    """Sampled check that ``t^(1-p) L(t)`` is nondecreasing on ``(0, nu)``."""
    if not 0 <= p <= 1:
        raise InvalidParameter(f"p must lie in [0, 1], got {p}")
    if math.isinf(nu):
        grid = np.geomspace(1e-6, 1e6, n)
    else:
        grid = np.geomspace(nu * 1e-6, nu * (1.0 - 1e-9), n)
    vals = np.array([t ** (1.0 - p) * L(t) for t in grid])
    rel = np.diff(vals) / np.maximum(np.abs(vals[1:]), np.finfo(float).tiny)
    worst = float(rel.min())
    status = PASS if worst >= -1e-12 else FAIL
    return CheckResult(status, margin=worst, label="sampled", detail={"p": p, "nu": nu, "points": n})
