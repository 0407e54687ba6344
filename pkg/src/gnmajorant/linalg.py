"""Dense least-squares machinery and Moore-Penrose inverses of injective matrices.

Matrices and vectors are plain ``numpy`` float arrays. Least-squares solves go
through a Householder QR factorization; operator norms come from power
iteration on the Gram matrix.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import solve_triangular

from .errors import FAIL, HYPOTHESIS_NOT_MET, PASS, CheckResult, DimensionMismatch, RankDeficient

RANK_RTOL = 1e-12
POWER_RTOL = 1e-12
POWER_MAXITER = 10000


def as_matrix(A) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    if A.ndim == 1:
        A = A.reshape(-1, 1)
    if A.ndim != 2:
        raise DimensionMismatch(f"expected a 2-d matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    return A


def as_vector(y) -> np.ndarray:
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if y.ndim != 1:
        raise DimensionMismatch(f"expected a 1-d vector, got shape {y.shape}")
    if not np.all(np.isfinite(y)):
        raise ValueError("vector has non-finite entries")
    return y


def _start_vector(n: int) -> np.ndarray:
    # fixed, generic start so that results are reproducible
    v = np.random.default_rng(12345).standard_normal(n)
    return v / np.linalg.norm(v)


def _power_iteration(apply, n: int) -> float:
    """Largest eigenvalue of the symmetric positive semidefinite map ``apply``."""
    v = _start_vector(n)
    lam = 0.0
    for _ in range(POWER_MAXITER):
        w = apply(v)
        lam = float(v @ w)
        if lam <= 0.0:
            return 0.0
        if np.linalg.norm(w - lam * v) <= POWER_RTOL * lam:
            break
        v = w / np.linalg.norm(w)
    return lam


def operator_norm(A) -> float:
    """Spectral norm ``||A||_2`` (largest singular value)."""
    A = as_matrix(A)
    if not A.any():
        return 0.0
    # scale to keep the Gram matrix away from overflow
    s = float(np.abs(A).max())
    B = A / s
    lam = _power_iteration(lambda v: B.T @ (B @ v), B.shape[1])
    return s * np.sqrt(lam)


def _qr(A: np.ndarray):
    m, n = A.shape
    if m < n:
        raise DimensionMismatch(f"need rows >= cols for an injective matrix, got {A.shape}")
    Q, R = np.linalg.qr(A, mode="reduced")
    return Q, R


def _smallest_singular_from_r(R: np.ndarray, sigma_max: float) -> float:
    n = R.shape[0]
    diag = np.abs(np.diag(R))
    # sigma_min <= min |R_ii|, so a tiny pivot certifies rank deficiency
    if sigma_max == 0.0 or diag.min() <= RANK_RTOL * sigma_max:
        return 0.0

    def apply_inv_gram(v):
        z = solve_triangular(R, v, trans="T")
        return solve_triangular(R, z)

    lam = _power_iteration(apply_inv_gram, n)
    return 1.0 / np.sqrt(lam)


def singular_extremes(A) -> tuple[float, float]:
    """Return ``(sigma_min, sigma_max)`` for a matrix with rows >= cols."""
    A = as_matrix(A)
    smax = operator_norm(A)
    _, R = _qr(A)
    return _smallest_singular_from_r(R, smax), smax


def _check_rank(R: np.ndarray, A: np.ndarray) -> float:
    smax = operator_norm(A)
    smin = _smallest_singular_from_r(R, smax)
    if smin <= RANK_RTOL * smax:
        raise RankDeficient(f"sigma_min={smin:.3e} <= {RANK_RTOL:g} * sigma_max={smax:.3e}")
    return smin


def pseudoinverse_apply(A, y) -> np.ndarray:
    """Least-squares solution ``A^+ y`` of ``A z = y`` for full-column-rank ``A``."""
    A = as_matrix(A)
    y = as_vector(y)
    if y.shape[0] != A.shape[0]:
        raise DimensionMismatch(f"A has {A.shape[0]} rows but y has length {y.shape[0]}")
    Q, R = _qr(A)
    _check_rank(R, A)
    return solve_triangular(R, Q.T @ y)


def pseudoinverse(A) -> np.ndarray:
    """The matrix ``A^+ = (A^T A)^{-1} A^T``, built from the QR factors."""
    A = as_matrix(A)
    Q, R = _qr(A)
    _check_rank(R, A)
    return solve_triangular(R, Q.T)


def pseudoinverse_norm(A) -> float:
    """``||A^+||_2 = 1 / sigma_min(A)``."""
    A = as_matrix(A)
    _, R = _qr(A)
    return 1.0 / _check_rank(R, A)


def perturbation_bound_check(A, B) -> CheckResult:
    """Check ``||B^+|| <= ||A^+|| / (1 - ||A^+|| ||A - B||)`` when ``||A^+|| ||A-B|| < 1``.

    If the hypothesis fails the result carries status ``hypothesis-not-met``;
    that is an outcome, not an error.
    """
    A = as_matrix(A)
    B = as_matrix(B)
    if A.shape != B.shape:
        raise DimensionMismatch(f"shapes differ: {A.shape} vs {B.shape}")
    a_norm = pseudoinverse_norm(A)
    d = operator_norm(A - B)
    q = a_norm * d
    if not q < 1.0:
        return CheckResult(HYPOTHESIS_NOT_MET, detail={"product": q})
    rhs = a_norm / (1.0 - q)
    try:
        lhs = pseudoinverse_norm(B)
    except RankDeficient:
        return CheckResult(FAIL, lhs=float("inf"), rhs=rhs, margin=-float("inf"),
                           detail={"product": q, "reason": "B rank deficient"})
    slack = 1e-10 * (1.0 + rhs)
    status = PASS if lhs <= rhs + slack else FAIL
    return CheckResult(status, lhs=lhs, rhs=rhs, margin=rhs - lhs, detail={"product": q})
