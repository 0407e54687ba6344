import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from gnmajorant.errors import FAIL, HYPOTHESIS_NOT_MET, PASS, DimensionMismatch, RankDeficient
from gnmajorant.linalg import (
    as_matrix,
    as_vector,
    operator_norm,
    perturbation_bound_check,
    pseudoinverse,
    pseudoinverse_apply,
    pseudoinverse_norm,
    singular_extremes,
)


def tall_matrix(rng, m, n, cond=10.0):
    U, _ = np.linalg.qr(rng.standard_normal((m, n)))
    V, _ = np.linalg.qr(rng.standard_normal((n, n)))
    s = np.geomspace(1.0, 1.0 / cond, n)
    return U @ np.diag(s) @ V.T


def test_known_values():
    A = np.array([[-2.0], [1.0]])
    assert pseudoinverse_norm(A) == pytest.approx(math.sqrt(5) / 5, rel=1e-14)
    assert operator_norm(np.diag([3.0, -4.0, 1.0])) == pytest.approx(4.0, rel=1e-12)
    assert operator_norm(np.zeros((3, 2))) == 0.0
    np.testing.assert_allclose(pseudoinverse(np.eye(3)), np.eye(3), atol=1e-15)


def test_small_fixed_cases():
    np.testing.assert_allclose(pseudoinverse_apply(np.array([[2.0, 0], [0, 1], [0, 0]]), [2.0, 3, 7]),
                               [1.0, 3.0], atol=1e-14)
    np.testing.assert_allclose(pseudoinverse_apply(np.array([[1.0], [1.0]]), [1.0, 3.0]), [2.0], atol=1e-14)
    assert pseudoinverse_norm(np.array([[3.0, 0], [0, 4], [0, 0]])) == pytest.approx(1 / 3, rel=1e-12)
    res = perturbation_bound_check(np.eye(2), np.diag([1.0, 0.5]))
    assert res.status == PASS
    assert res.lhs == pytest.approx(2.0) and res.rhs == pytest.approx(2.0)
    A = np.array([[1.0, 2], [3, 4], [5, 6]])
    same = perturbation_bound_check(A, A)
    assert same.lhs == pytest.approx(same.rhs, rel=1e-10)


def test_normal_equations_residual(rng):
    A = rng.standard_normal((8, 4))
    y = rng.standard_normal(8)
    z = pseudoinverse_apply(A, y)
    assert np.linalg.norm(A.T @ (A @ z - y)) <= 1e-10 * np.linalg.norm(A.T, 2) * np.linalg.norm(y)


def test_singular_extremes_against_svd(rng):
    for _ in range(20):
        m, n = rng.integers(1, 7, size=2)
        m = max(m, n)
        A = rng.standard_normal((m, n))
        s = np.linalg.svd(A, compute_uv=False)
        smin, smax = singular_extremes(A)
        assert smax == pytest.approx(s[0], rel=1e-10)
        assert smin == pytest.approx(s[-1], rel=1e-8)


def test_pseudoinverse_apply_is_least_squares(rng):
    A = rng.standard_normal((6, 3))
    y = rng.standard_normal(6)
    np.testing.assert_allclose(pseudoinverse_apply(A, y), np.linalg.lstsq(A, y, rcond=None)[0], atol=1e-12)
    np.testing.assert_allclose(pseudoinverse(A), np.linalg.pinv(A), atol=1e-12)


def test_errors():
    with pytest.raises(RankDeficient):
        pseudoinverse_norm(np.array([[1.0, 2.0], [2.0, 4.0], [0.0, 0.0]]))
    with pytest.raises(DimensionMismatch):
        pseudoinverse(np.ones((2, 3)))
    with pytest.raises(DimensionMismatch):
        pseudoinverse_apply(np.eye(2), np.ones(3))
    with pytest.raises(ValueError):
        as_matrix([[np.nan]])
    with pytest.raises(ValueError):
        as_vector([1.0, np.inf])


def test_perturbation_check_statuses():
    A = np.eye(2)
    assert perturbation_bound_check(A, A + 0.1).status == PASS
    assert perturbation_bound_check(A, 3 * A).status == HYPOTHESIS_NOT_MET
    # outside the hypothesis the check is not claimed either way
    assert perturbation_bound_check(A, np.zeros((2, 2))).status == HYPOTHESIS_NOT_MET
    assert FAIL != PASS


@given(st.integers(1, 5), st.integers(0, 3), st.integers(0, 2**32 - 1))
def test_pseudoinverse_properties(n, extra, seed):
    rng = np.random.default_rng(seed)
    A = tall_matrix(rng, n + extra, n)
    P = pseudoinverse(A)
    np.testing.assert_allclose(P @ A, np.eye(n), atol=1e-10)
    Q = A @ P
    np.testing.assert_allclose(Q @ Q, Q, atol=1e-10)
    np.testing.assert_allclose(Q, Q.T, atol=1e-10)
    assert pseudoinverse_norm(A) == pytest.approx(1.0 / np.linalg.svd(A, compute_uv=False)[-1], rel=1e-8)


@given(arrays(np.float64, (4, 3), elements=st.floats(-10, 10)))
def test_operator_norm_matches_svd(A):
    assert operator_norm(A) == pytest.approx(np.linalg.norm(A, 2), rel=1e-9, abs=1e-12)


@given(st.integers(1, 4), st.floats(0.0, 0.95), st.integers(0, 2**32 - 1))
def test_perturbation_bound_holds(n, scale, seed):
    rng = np.random.default_rng(seed)
    A = tall_matrix(rng, n + 1, n)
    E = rng.standard_normal(A.shape)
    E *= scale / (pseudoinverse_norm(A) * np.linalg.norm(E, 2))
    res = perturbation_bound_check(A, A + E)
    assert res.status in (PASS, HYPOTHESIS_NOT_MET)
    if scale < 0.9:
        assert res.status == PASS
        assert res.lhs <= res.rhs * (1 + 1e-10) + 1e-10
