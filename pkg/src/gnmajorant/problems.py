"""Zero-residual, injective-overdetermined test problems with known roots."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import InvalidParameter, RankDeficient
from .families import holder_majorant, linear_majorant, lipschitz_majorant, smale_majorant
from .linalg import as_matrix, as_vector, operator_norm, pseudoinverse_norm
from .majorant import MajorantFunction

RESIDUAL_TOL = 1e-12


@dataclass(frozen=True)
class ProblemInstance:
    """``F: R^n -> R^m`` with Jacobian ``J``, root ``x_star`` and domain ball radius.

    The domain is ``B(x_star, domain_radius)``; ``math.inf`` means the whole
    space. ``majorant`` is an optional certificate with a note on where it
    came from.
    """

    name: str
    F: Callable[[np.ndarray], np.ndarray]
    J: Callable[[np.ndarray], np.ndarray]
    x_star: np.ndarray
    domain_radius: float = math.inf
    majorant: Optional[MajorantFunction] = None
    majorant_note: str = ""
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        x = as_vector(self.x_star)
        object.__setattr__(self, "x_star", x)
        res = np.linalg.norm(self.F(x))
        if not res < RESIDUAL_TOL:
            raise InvalidParameter(f"{self.name}: ||F(x*)|| = {res:.3e} is not zero")
        Jx = as_matrix(self.J(x))
        if Jx.shape[1] != x.size or Jx.shape[0] < Jx.shape[1]:
            raise InvalidParameter(f"{self.name}: Jacobian shape {Jx.shape} is not m x n with m >= n")
        # raises RankDeficient when F'(x*) is not injective
        beta = pseudoinverse_norm(Jx)
        object.__setattr__(self, "_beta", beta)
        object.__setattr__(self, "_shape", Jx.shape)

    @property
    def n(self) -> int:
        return self._shape[1]

    @property
    def m(self) -> int:
        return self._shape[0]

    @property
    def beta(self) -> float:
        """``||F'(x*)^+||``."""
        return self._beta

    @property
    def kappa(self) -> float:
        return self.domain_radius

    def with_majorant(self, majorant: MajorantFunction, note: str = "") -> "ProblemInstance":
        return ProblemInstance(self.name, self.F, self.J, self.x_star, self.domain_radius,
                               majorant, note, dict(self.params))


def real_cbrt(x):
    """Odd real cube root."""
    return np.cbrt(x)


def paper_example(a: float, b: float) -> ProblemInstance:
    """``H(x) = (a x^(4/3) - 2x, b x^(4/3) + x)`` with root 0 and a Hölder certificate, p = 1/3."""
    if a == 0 and b == 0:
        raise InvalidParameter("(a, b) must not be (0, 0)")
    s = 5.0 * (a * a + b * b)

    def F(x):
        x = float(np.asarray(x).reshape(-1)[0])
        x43 = x * real_cbrt(x)
        return np.array([a * x43 - 2.0 * x, b * x43 + x])

    def J(x):
        x = float(np.asarray(x).reshape(-1)[0])
        c = real_cbrt(x)
        return np.array([[4.0 / 3.0 * a * c - 2.0], [4.0 / 3.0 * b * c + 1.0]])

    K = 4.0 * math.sqrt(s) / 15.0
    return ProblemInstance(
        name=f"paper-example-{a:g}-{b:g}",
        F=F, J=J, x_star=np.zeros(1),
        majorant=holder_majorant(K, 1.0 / 3.0),
        majorant_note="Hölder-like bound with p = 1/3, K = 4 sqrt(5(a^2+b^2))/15 (analytic)",
        params={"a": a, "b": b,
                "printed_radius": (3.0 / math.sqrt(s)) ** 3,
                "printed_uniqueness_radius": (5.0 / math.sqrt(s)) ** 3},
    )


def linear_problem(A, x_star, domain_radius: float = math.inf, name: str = "linear") -> ProblemInstance:
    """``F(x) = A (x - x_star)``; Gauss-Newton lands on ``x_star`` in one step."""
    A = as_matrix(A)
    x_star = as_vector(x_star)
    if A.shape[1] != x_star.size:
        raise InvalidParameter(f"A has {A.shape[1]} columns but x_star has length {x_star.size}")
    if A.shape[0] < A.shape[1]:
        raise RankDeficient(f"{A.shape} matrix cannot have full column rank")
    pseudoinverse_norm(A)
    return ProblemInstance(
        name=name,
        F=lambda x: A @ (np.asarray(x, dtype=float) - x_star),
        J=lambda x: A,
        x_star=x_star, domain_radius=domain_radius,
        majorant=linear_majorant(),
        majorant_note="f(t) = -t; the Jacobian is constant",
    )


# Empirical Lipschitz constant of the smooth 2->3 Jacobian on B((1, 0), 1):
# max ||J(x) - J(z)|| / ||x - z|| over 10^4 seeded pairs is 3.1659; beta = 1.
# 4.0 >= 1.25 * 3.1659. Not a certificate.
SMOOTH_DOMAIN_RADIUS = 1.0
SMOOTH_LIPSCHITZ_SAMPLED = 3.1659
SMOOTH_K = 4.0


def _smooth_F(v):
    x, y = np.asarray(v, dtype=float)
    return np.array([x - 1.0, (x - 1.0) ** 2 + y, y * math.exp(x - 1.0)])


def _smooth_J(v):
    x, y = np.asarray(v, dtype=float)
    e = math.exp(x - 1.0)
    return np.array([[1.0, 0.0], [2.0 * (x - 1.0), 1.0], [y * e, e]])


def smooth_problem() -> ProblemInstance:
    return ProblemInstance(
        name="smooth-2x3", F=_smooth_F, J=_smooth_J, x_star=np.array([1.0, 0.0]),
        domain_radius=SMOOTH_DOMAIN_RADIUS,
        majorant=lipschitz_majorant(SMOOTH_K),
        majorant_note=f"Lipschitz K={SMOOTH_K}, empirical (1.25 x sampled max {SMOOTH_LIPSCHITZ_SAMPLED})",
    )


# F(x) = (sin x, x): beta = 1/sqrt(2); the n = 3 Taylor term dominates gamma.
SIN_GAMMA = math.sqrt((1.0 / math.sqrt(2.0)) / 6.0)


def sin_problem() -> ProblemInstance:
    return ProblemInstance(
        name="sin-analytic",
        F=lambda x: np.array([math.sin(float(x[0])), float(x[0])]),
        J=lambda x: np.array([[math.cos(float(x[0]))], [1.0]]),
        x_star=np.zeros(1),
        majorant=smale_majorant(SIN_GAMMA),
        majorant_note="Smale gamma = sqrt(beta/6), user supplied",
    )


def lipschitz_toy(c: float = 1.0) -> ProblemInstance:
    """``F(x) = x + c x^2 / 2``; ``beta = 1`` and the Lipschitz constant is ``|c|``."""
    if c == 0:
        raise InvalidParameter("c must be nonzero")
    return ProblemInstance(
        name="lipschitz-toy",
        F=lambda x: np.array([float(x[0]) + 0.5 * c * float(x[0]) ** 2]),
        J=lambda x: np.array([[1.0 + c * float(x[0])]]),
        x_star=np.zeros(1),
        majorant=lipschitz_majorant(abs(c)),
        majorant_note=f"Lipschitz K = |c| = {abs(c)} (analytic)",
        params={"c": c},
    )


LINEAR_3X2 = np.array([[2.0, 0.0], [0.0, 1.0], [1.0, 1.0]])


def corpus() -> list[ProblemInstance]:
    return [
        paper_example(1.0, 0.0),
        paper_example(0.0, 1.0),
        paper_example(3.0, 4.0),
        linear_problem(np.eye(2), np.zeros(2), domain_radius=10.0, name="linear-identity-2"),
        linear_problem(LINEAR_3X2, np.ones(2), domain_radius=10.0, name="linear-3x2"),
        smooth_problem(),
        sin_problem(),
        lipschitz_toy(1.0),
    ]


def problem_names() -> list[str]:
    return ["paper-example"] + [p.name for p in corpus()]


def get_problem(name: str, a: Optional[float] = None, b: Optional[float] = None) -> ProblemInstance:
    """Look a problem up by name; ``paper-example`` takes ``a`` and ``b`` (default 1, 0)."""
    if name == "paper-example":
        return paper_example(1.0 if a is None else a, 0.0 if b is None else b)
    for p in corpus():
        if p.name == name:
            return p
    raise InvalidParameter(f"unknown problem {name!r}; known: {', '.join(problem_names())}")


def estimate_lipschitz(J, center, radius: float, pairs: int = 10_000, seed: int = 0) -> float:
    """Largest sampled ``||J(x) - J(z)|| / ||x - z||`` over uniform pairs in a ball."""
    center = as_vector(center)
    rng = np.random.default_rng(seed)

    def draw():
        d = rng.standard_normal(center.size)
        d /= np.linalg.norm(d)
        return center + radius * rng.random() ** (1.0 / center.size) * d

    best = 0.0
    for _ in range(pairs):
        x, z = draw(), draw()
        best = max(best, operator_norm(as_matrix(J(x)) - as_matrix(J(z))) / np.linalg.norm(x - z))
    return best
