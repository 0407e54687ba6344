import math

import numpy as np
import pytest

from gnmajorant.errors import InvalidParameter, RankDeficient
from gnmajorant.majorant import compute_radii
from gnmajorant.problems import (
    SMOOTH_K,
    SMOOTH_LIPSCHITZ_SAMPLED,
    ProblemInstance,
    corpus,
    estimate_lipschitz,
    get_problem,
    linear_problem,
    paper_example,
    problem_names,
    smooth_problem,
)
from gnmajorant.solver import gn_step


def fd_jacobian(F, x, h=1e-6):
    x = np.asarray(x, dtype=float)
    cols = []
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        cols.append((F(x + e) - F(x - e)) / (2 * h))
    return np.column_stack(cols)


def test_paper_example_constants():
    p = paper_example(1.0, 0.0)
    assert p.beta == pytest.approx(math.sqrt(5) / 5, abs=1e-12)
    assert compute_radii(p.majorant, p.kappa).r == pytest.approx((3 / math.sqrt(5)) ** 3, abs=1e-10)
    q = paper_example(0.0, 1.0)
    assert q.beta == pytest.approx(p.beta, rel=1e-14)
    assert compute_radii(q.majorant).r == pytest.approx(compute_radii(p.majorant).r, rel=1e-14)


def test_paper_example_3_4_radius():
    # (3/sqrt(125))^3, not (3/5)^3
    p = paper_example(3.0, 4.0)
    assert compute_radii(p.majorant).r == pytest.approx((3 / math.sqrt(125)) ** 3, rel=1e-12)
    assert compute_radii(p.majorant).r == pytest.approx(0.0193196, abs=1e-7)
    assert p.params["printed_radius"] == pytest.approx(0.0193196, abs=1e-7)
    with pytest.raises(InvalidParameter):
        paper_example(0.0, 0.0)


def test_linear_one_step():
    p = linear_problem(np.eye(2), np.zeros(2))
    np.testing.assert_array_equal(gn_step(p, np.array([5.0, -3.0])), np.zeros(2))
    q = get_problem("linear-3x2")
    np.testing.assert_allclose(gn_step(q, np.zeros(2)), [1.0, 1.0], atol=1e-12)
    with pytest.raises(RankDeficient):
        linear_problem(np.ones((3, 2)), np.zeros(2))


def test_linear_random_instances(rng):
    for _ in range(100):
        m, n = 5, 3
        A = rng.standard_normal((m, n))
        xs = rng.standard_normal(n)
        p = linear_problem(A, xs)
        x1 = gn_step(p, rng.standard_normal(n))
        assert np.linalg.norm(p.F(x1)) < 1e-12


def test_invariants_are_enforced():
    with pytest.raises(InvalidParameter):
        ProblemInstance("bad", lambda x: np.array([x[0] - 1.0]), lambda x: np.array([[1.0]]), np.zeros(1))
    with pytest.raises(RankDeficient):
        ProblemInstance("flat", lambda x: np.array([x[0] ** 2]), lambda x: np.array([[2 * x[0]]]), np.zeros(1))


def test_corpus():
    probs = corpus()
    assert len(probs) >= 6
    assert len({p.name for p in probs}) == len(probs)
    for p in probs:
        assert np.linalg.norm(p.F(p.x_star)) < 1e-12
        assert p.m >= p.n
        assert p.majorant is not None
        np.testing.assert_allclose(gn_step(p, p.x_star), p.x_star, atol=1e-15)
    assert set(problem_names()) >= {p.name for p in probs}
    with pytest.raises(InvalidParameter):
        get_problem("nope")


def test_jacobians_match_finite_differences(rng):
    for p in corpus():
        r = min(compute_radii(p.majorant, p.kappa).r, 1.0)
        for _ in range(5):
            d = rng.standard_normal(p.n)
            x = p.x_star + 0.5 * r * d / np.linalg.norm(d)
            np.testing.assert_allclose(p.J(x), fd_jacobian(p.F, x), atol=1e-6, rtol=1e-6, err_msg=p.name)


def test_smooth_constant_has_margin():
    est = estimate_lipschitz(smooth_problem().J, [1.0, 0.0], 1.0)
    assert est == pytest.approx(SMOOTH_LIPSCHITZ_SAMPLED, abs=1e-4)
    assert SMOOTH_K >= 1.25 * SMOOTH_LIPSCHITZ_SAMPLED
