"""Pure Gauss-Newton iteration ``x_{k+1} = x_k - F'(x_k)^+ F(x_k)`` with a full trace."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import RankDeficient
from .linalg import as_vector, pseudoinverse_apply
from .problems import ProblemInstance

CONVERGED = "Converged"
MAX_ITERS = "MaxIters"
RANK_DEFICIENT = "RankDeficientJacobian"
DIVERGED = "Diverged"
STALLED = "Stalled"

DIVERGENCE_FACTOR = 1e6


@dataclass(frozen=True)
class SolveConfig:
    max_iters: int = 100
    step_tol: float = 1e-14
    grad_tol: float = 1e-12
    record_errors: bool = True

    def __post_init__(self):
        if self.max_iters < 0:
            raise ValueError("max_iters must be nonnegative")
        if not (self.step_tol > 0 and self.grad_tol > 0):
            raise ValueError("tolerances must be positive")


@dataclass
class IterationTrace:
    iterates: list = field(default_factory=list)
    residual_norms: list = field(default_factory=list)
    step_norms: list = field(default_factory=list)
    errors: Optional[list] = None
    status: str = MAX_ITERS

    @property
    def iterations(self) -> int:
        return len(self.iterates) - 1

    @property
    def converged(self) -> bool:
        return self.status == CONVERGED

    @property
    def final(self) -> np.ndarray:
        return self.iterates[-1]


def gn_step(problem: ProblemInstance, x) -> np.ndarray:
    """One application of the Gauss-Newton map."""
    x = as_vector(x)
    return x - pseudoinverse_apply(problem.J(x), problem.F(x))


def _grad_norm(problem, x) -> float:
    return float(np.linalg.norm(np.asarray(problem.J(x)).T @ problem.F(x)))


def gauss_newton_solve(problem: ProblemInstance, x0, cfg: SolveConfig = SolveConfig()) -> IterationTrace:
    """Run Gauss-Newton from ``x0``.

    Stops on ``||J^T F|| <= grad_tol`` (Converged), a step shorter than
    ``step_tol``, ``max_iters`` steps, a rank-deficient Jacobian, or an iterate
    farther than ``1e6 (1 + ||x0||)`` from ``x0`` (Diverged). Failures are
    reported in ``status`` with the partial trace, never raised.
    """
    x = as_vector(x0).copy()
    x0 = x.copy()
    far = DIVERGENCE_FACTOR * (1.0 + np.linalg.norm(x0))
    track = cfg.record_errors
    trace = IterationTrace(errors=[] if track else None)

    def record(x, step):
        trace.iterates.append(x)
        trace.residual_norms.append(float(np.linalg.norm(problem.F(x))))
        trace.step_norms.append(step)
        if track:
            trace.errors.append(float(np.linalg.norm(x - problem.x_star)))

    record(x, 0.0)
    for _ in range(cfg.max_iters):
        if _grad_norm(problem, x) <= cfg.grad_tol:
            trace.status = CONVERGED
            return trace
        try:
            step = pseudoinverse_apply(problem.J(x), problem.F(x))
        except RankDeficient:
            trace.status = RANK_DEFICIENT
            return trace
        except ValueError:
            trace.status = DIVERGED
            return trace
        x = x - step
        if not np.all(np.isfinite(x)) or np.linalg.norm(x - x0) > far:
            trace.status = DIVERGED
            return trace
        step_norm = float(np.linalg.norm(step))
        try:
            record(x, step_norm)
        except (ValueError, ArithmeticError):
            trace.status = DIVERGED
            return trace
        if step_norm <= cfg.step_tol:
            trace.status = CONVERGED if _grad_norm(problem, x) <= cfg.grad_tol else STALLED
            return trace
    trace.status = CONVERGED if _grad_norm(problem, x) <= cfg.grad_tol else MAX_ITERS
    return trace
