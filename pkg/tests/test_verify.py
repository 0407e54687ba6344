import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gnmajorant.errors import MissingMajorant, OutOfDomain, OutsideCertifiedBall, SharpnessNotMet
from gnmajorant.families import holder_majorant, integrable_L_preset, lipschitz_majorant, smale_majorant
from gnmajorant.majorant import compute_radii
from gnmajorant.problems import ProblemInstance, corpus, get_problem, linear_problem, paper_example
from gnmajorant.solver import CONVERGED, MAX_ITERS, gauss_newton_solve, gn_step
from gnmajorant.verify import (
    cycle_demo,
    linearization_errors,
    majorant_trajectory,
    odd_extension_problem,
    probe_majorant_condition,
    pseudoinverse_ball_bound,
    sphere_directions,
    uniqueness_probe,
    verify_majorant_bound,
    verify_problem,
)


def test_bound_paper_example_from_one():
    p = paper_example(1.0, 0.0)
    rep = verify_majorant_bound(p, np.array([1.0]))
    assert rep.overall
    # independent t_k from the printed Hölder recurrence
    K, q = p.majorant.params["K"], 1 / 3
    t = [1.0]
    for _ in range(4):
        s = t[-1]
        t.append(K * q * s ** (q + 1) / ((q + 1) * (1 - K * s ** q)))
    ts, _ = majorant_trajectory(p.majorant, 1.0, 5)
    np.testing.assert_allclose(ts, t, rtol=1e-12)
    assert all(r["pass"] for r in rep.rate_records)


def test_bound_linear_is_trivial():
    p = get_problem("linear-3x2")
    rep = verify_majorant_bound(p, np.array([2.0, 3.0]))
    assert rep.overall
    assert rep.bound_checks[1]["t"] == 0.0
    assert rep.bound_checks[1]["err"] < 1e-14


def test_bound_outside_ball_raises():
    p = paper_example(1.0, 0.0)
    with pytest.raises(OutsideCertifiedBall):
        verify_majorant_bound(p, np.array([3.0]))
    bare = ProblemInstance("bare", p.F, p.J, p.x_star)
    with pytest.raises(MissingMajorant):
        verify_majorant_bound(bare, np.array([0.1]))


def test_quadratic_constant_lipschitz_toy():
    p = get_problem("lipschitz-toy")
    K = 1.0
    t0 = compute_radii(p.majorant).r / 2
    tr = gauss_newton_solve(p, np.array([t0]))
    e = tr.errors
    bound = K / (2 * (1 - K * t0))
    for a, b in zip(e, e[1:]):
        if b > 1e-13:
            assert b / a ** 2 <= bound + 1e-8


def test_probe():
    p = paper_example(1.0, 0.0)
    good = probe_majorant_condition(p, samples=1000)
    assert good.passed and good.detail["pass_fraction"] == 1.0
    half = p.majorant.params["K"] / 2
    bad = probe_majorant_condition(p, holder_majorant(half, 1 / 3), samples=1000)
    assert bad.detail["pass_fraction"] < 1.0 and bad.margin < 0
    ones = probe_majorant_condition(p, samples=50, taus=[1.0])
    assert ones.passed
    assert ones.margin == pytest.approx(0.0, abs=1e-15)


def test_probe_is_reproducible():
    p = get_problem("smooth-2x3")
    a = probe_majorant_condition(p, samples=200, seed=7)
    b = probe_majorant_condition(p, samples=200, seed=7)
    assert a.margin == b.margin


def test_cycles():
    res = cycle_demo(lipschitz_majorant(1.0))
    np.testing.assert_allclose(res.iterates, [-2 / 3, 2 / 3, -2 / 3, 2 / 3, -2 / 3], atol=1e-12)
    assert res.is_cycle
    assert cycle_demo(holder_majorant(1.0, 0.5)).rho == pytest.approx(0.5625, rel=1e-14)
    assert cycle_demo(smale_majorant(1.0)).is_cycle


def test_cycle_needs_sharpness():
    # kappa-free check: the linear family has no finite rho
    from gnmajorant.families import linear_majorant

    with pytest.raises(SharpnessNotMet):
        cycle_demo(linear_majorant())


def test_gn_step_on_odd_extension():
    m = holder_majorant(2.0, 1.0)
    rho = compute_radii(m).rho
    h = odd_extension_problem(m)
    assert gn_step(h, np.array([-rho]))[0] == pytest.approx(rho, abs=1e-12)
    tr = gauss_newton_solve(h, np.array([-rho / 2]), )
    assert tr.status == CONVERGED and tr.errors[-1] < 1e-10


def test_uniqueness():
    m = lipschitz_majorant(1.0)
    p = ProblemInstance("toy", lambda x: np.array([m.f(x[0]) if x[0] >= 0 else -m.f(-x[0])]),
                        lambda x: np.array([[m.f_prime(abs(x[0]))]]), np.zeros(1), majorant=m)
    res = uniqueness_probe(p)
    assert res.passed and res.detail["sigma"] == 2.0
    q = paper_example(1.0, 0.0)
    u = uniqueness_probe(q, radius=q.params["printed_uniqueness_radius"], samples=10_000)
    assert u.passed
    # the printed ball (5/sqrt 5)^3 equals ((p+1)/K)^(1/p) here
    assert not u.detail["radius_discrepancy"]
    assert u.detail["sigma"] == pytest.approx(5 ** 1.5, rel=1e-12)
    off = uniqueness_probe(q, radius=10.0, samples=100)
    assert off.detail["radius_discrepancy"]
    assert uniqueness_probe(get_problem("linear-identity-2")).passed


def test_linearization_errors():
    p = paper_example(1.0, 0.0)
    z = linearization_errors(p, None, np.zeros(1))
    assert z.E_F_norm == 0.0 and z.e_f_value == 0.0 and z.holds
    assert linearization_errors(p, None, np.array([1.0])).holds
    lin = get_problem("linear-3x2")
    le = linearization_errors(lin, None, np.array([4.0, -2.0]))
    assert le.E_F_norm < 1e-12 and le.holds
    with pytest.raises(OutOfDomain):
        linearization_errors(lin, None, np.array([40.0, 0.0]))


def test_pseudoinverse_ball_bound():
    p = paper_example(1.0, 0.0)
    at_root = pseudoinverse_ball_bound(p, None, np.zeros(1))
    assert at_root.passed and at_root.lhs == pytest.approx(at_root.rhs, rel=1e-12)
    assert pseudoinverse_ball_bound(p, None, np.array([0.5])).passed
    with pytest.raises(OutOfDomain):
        pseudoinverse_ball_bound(p, None, np.array([100.0]))


def test_sphere_directions():
    d = sphere_directions(3, 8, 1)
    np.testing.assert_allclose(np.linalg.norm(d, axis=1), 1.0)
    np.testing.assert_array_equal(sphere_directions(1, 4).ravel(), [-1, 1, -1, 1])


def test_verify_corpus_passes():
    for p in corpus():
        rep = verify_problem(p, samples=300)
        assert rep.overall, (p.name, rep.failures()[:3])
        assert rep.to_dict()["schema"] == 1


def test_verify_flags_wrong_certificate():
    p = paper_example(1.0, 0.0)
    rep = verify_problem(p, holder_majorant(0.1, 1 / 3), samples=300)
    assert not rep.overall
    assert rep.condition_probe.detail["pass_fraction"] < 1.0


def test_integrable_L_certificate_on_toy():
    p = get_problem("lipschitz-toy")
    rep = verify_problem(p, integrable_L_preset("constant", K=1.0), samples=200, directions=2)
    assert rep.overall


@settings(max_examples=25)
@given(st.floats(0.01, 0.99), st.integers(0, 1000))
def test_lockstep_property(frac, seed):
    p = get_problem("smooth-2x3")
    r = compute_radii(p.majorant, p.kappa).r
    d = sphere_directions(2, 1, seed)[0]
    rep = verify_majorant_bound(p, p.x_star + frac * r * d)
    assert all(b["pass"] for b in rep.bound_checks)
    errs = rep.traces[0].errors
    assert all(e < r for e in errs)
    nonzero = [e for e in errs if e > 1e-14]
    assert all(b < a for a, b in zip(nonzero, nonzero[1:]))


def test_cycle_holds_for_ten_steps_when_rho_is_not_dyadic():
    m = lipschitz_majorant(1.0)
    rho = compute_radii(m).rho
    h = odd_extension_problem(m)
    x = np.array([-rho])
    for k in range(1, 11):
        x = gn_step(h, x)
        assert abs(x[0] - (-1) ** (k + 1) * rho) < 1e-9, k
