"""Riemannian baseline on the product of circles plus the shared AO driver.

The magnitude identity |d_k| = |df/dtheta_k| ties the manifold
parametrization to the phase parametrization; it holds because the v-hooks
return the realified gradient (twice the Wirtinger conjugate derivative).
"""

import numpy as np
import pytest

from irsopt import ao, sim
from irsopt.ao import FunctionProblem, u_map
from irsopt.baselines import (
    METHODS,
    manifold_solve,
    retract,
    riemannian_gradient,
    run_ao,
)
from irsopt.secrecy import SecrecyProblem
from irsopt.secrecy import default_options as secrecy_options
from irsopt.wsr import WsrProblem, elementwise_bcd_v, phase_objective
from irsopt.wsr import default_options as wsr_options


def random_unit(rng, m):
    return u_map(rng.uniform(0, 2 * np.pi, m))


def test_radial_gradient_projects_to_zero():
    rng = np.random.default_rng(0)
    v = random_unit(rng, 5)
    np.testing.assert_allclose(riemannian_gradient(v, v), np.zeros(5), atol=1e-14)


def test_tangential_gradient_passes_through():
    rng = np.random.default_rng(1)
    v = random_unit(rng, 5)
    np.testing.assert_allclose(riemannian_gradient(1j * v, v), 1j * v, atol=1e-14)


def test_tangency_invariant():
    rng = np.random.default_rng(2)
    for _ in range(20):
        v = random_unit(rng, 5)
        g = rng.standard_normal(5) + 1j * rng.standard_normal(5)
        d = riemannian_gradient(g, v)
        np.testing.assert_allclose(np.real(d * np.conj(v)), np.zeros(5),
                                   atol=1e-12)


def test_gradient_magnitudes_match_phase_parametrization():
    # |d_k| must equal |df/dtheta_k| for the same objective seen through
    # both parametrizations
    rng = np.random.default_rng(3)
    inst = sim.gen_secrecy_instance(sim.fig_secrecy_wide(), sim.child_rng(5, 0))
    theta = rng.uniform(0, 2 * np.pi, inst.G.shape[0])
    prob = SecrecyProblem(inst)
    q = prob.update_q(theta, None)
    d = riemannian_gradient(prob.phase_grad_v(q, u_map(theta)), u_map(theta))
    np.testing.assert_allclose(np.abs(d), np.abs(prob.gradient_theta(q, theta)),
                               rtol=1e-9)

    winst = sim.gen_wsr_instance(sim.wsr_default(), sim.child_rng(5, 1))
    theta = rng.uniform(0, 2 * np.pi, winst.m)
    wprob = WsrProblem(winst)
    q = wprob.update_q(theta, None)
    d = riemannian_gradient(wprob.phase_grad_v(q, u_map(theta)), u_map(theta))
    np.testing.assert_allclose(np.abs(d), np.abs(wprob.gradient_theta(q, theta)),
                               rtol=1e-9)


def test_retract_zero_step():
    rng = np.random.default_rng(4)
    v = random_unit(rng, 6)
    d = rng.standard_normal(6) + 1j * rng.standard_normal(6)
    np.testing.assert_array_equal(retract(v, d, 0.0), v)


def test_retract_unit_modulus():
    rng = np.random.default_rng(5)
    for _ in range(20):
        v = random_unit(rng, 6)
        d = riemannian_gradient(rng.standard_normal(6)
                                + 1j * rng.standard_normal(6), v)
        out = retract(v, d, float(rng.uniform(0, 3)))
        np.testing.assert_allclose(np.abs(out), np.ones(6), atol=1e-15)


def test_retract_small_step_rotates_phases():
    rng = np.random.default_rng(6)
    v = random_unit(rng, 6)
    step = 1e-4
    out = retract(v, 1j * v, step)
    np.testing.assert_allclose(np.angle(out / v), np.full(6, step), atol=1e-11)


def test_retract_radial_collision_recovers():
    rng = np.random.default_rng(7)
    v = random_unit(rng, 4)
    # v - v = 0 at full step: the step halves until the quotient is safe
    out = retract(v, -v, 1.0)
    np.testing.assert_allclose(np.abs(out), np.ones(4), atol=1e-15)
    np.testing.assert_allclose(out, v, atol=1e-12)


def test_manifold_constant_objective_terminates_immediately():
    rng = np.random.default_rng(8)
    v0 = random_unit(rng, 5)
    # ||v||^2 is constant on the manifold; its gradient is purely radial
    v, values = manifold_solve(lambda v: float(np.vdot(v, v).real),
                               lambda v: 2.0 * v, v0)
    assert len(values) == 1
    np.testing.assert_array_equal(v, v0)


def test_manifold_matches_gd_phase_fixed_point_secrecy():
    # same frozen beamformer, same start: the Riemannian descent and the
    # phase gradient descent must find the same basin (20 elements keeps
    # the landscape simple enough for that)
    import dataclasses

    cfg = dataclasses.replace(sim.fig_secrecy_wide(), m=20)
    inst = sim.gen_secrecy_instance(cfg, sim.child_rng(1, 0))
    m = 20
    rng = np.random.default_rng(1)
    theta0 = rng.uniform(0, 2 * np.pi, m)
    prob = SecrecyProblem(inst)
    q = prob.update_q(theta0, None)

    v_fin, values = manifold_solve(lambda v: prob.phase_objective_v(q, v),
                                   lambda v: prob.phase_grad_v(q, v),
                                   u_map(theta0), xi=1e-12, grad_tol=1e-10,
                                   max_iterations=5000)
    assert all(values[i + 1] <= values[i] + 1e-12 for i in range(len(values) - 1))

    phase_only = FunctionProblem(
        lambda th: prob.evaluate(q, th),
        lambda th: prob.gradient_theta(q, th))
    opts = secrecy_options()
    opts.xi = 1e-12
    opts.max_iterations = 20000
    _, _, trace = ao.solve(phase_only, theta0, opts)
    assert values[-1] == pytest.approx(trace.objective[-1], rel=1e-3)


def test_manifold_not_worse_than_bcd_on_wsr_quadratic():
    inst = sim.gen_wsr_instance(sim.wsr_default(), sim.child_rng(10, 0))
    rng = np.random.default_rng(10)
    theta0 = rng.uniform(0, 2 * np.pi, inst.m)
    prob = WsrProblem(inst)
    quad = prob.update_q(theta0, None).quad

    v_man, _ = manifold_solve(lambda v: phase_objective(quad, v),
                              lambda v: 2.0 * (quad.R @ v - quad.e),
                              u_map(theta0), xi=1e-12, grad_tol=1e-10,
                              max_iterations=5000)
    v_bcd = u_map(theta0)
    f_prev = phase_objective(quad, v_bcd)
    for _ in range(500):
        v_bcd = elementwise_bcd_v(quad, v_bcd)
        f_cur = phase_objective(quad, v_bcd)
        if abs(f_cur - f_prev) <= 1e-12 * max(1.0, abs(f_prev)):
            break
        f_prev = f_cur
    assert phase_objective(quad, v_man) <= phase_objective(quad, v_bcd) + 1e-6


def test_run_ao_rejects_unknown_method():
    inst = sim.gen_secrecy_instance(sim.fig_secrecy_wide(), sim.child_rng(11, 0))
    with pytest.raises(ValueError):
        run_ao(SecrecyProblem(inst), np.zeros(60), secrecy_options(), "newton")


def test_run_ao_aogd_is_the_tailored_solver():
    inst = sim.gen_secrecy_instance(sim.fig_secrecy_wide(), sim.child_rng(12, 0))
    rng = np.random.default_rng(12)
    theta0 = rng.uniform(0, 2 * np.pi, 60)
    opts = secrecy_options()
    opts.max_iterations = 40
    _, _, t1 = run_ao(SecrecyProblem(inst), theta0, opts, "aogd")
    _, _, t2 = ao.solve(SecrecyProblem(inst), theta0, opts, step_rule="tailored")
    assert t1.objective == t2.objective


def test_run_ao_bcd_and_manifold_traces():
    assert METHODS == ("aogd", "ag", "bb", "bcd", "manifold")
    inst = sim.gen_secrecy_instance(sim.fig_secrecy_wide(), sim.child_rng(13, 0))
    rng = np.random.default_rng(13)
    theta0 = rng.uniform(0, 2 * np.pi, 60)
    opts = secrecy_options()
    opts.max_iterations = 25
    for method in ("bcd", "manifold"):
        theta, q, trace = run_ao(SecrecyProblem(inst), theta0, opts, method)
        n = len(trace.objective)
        assert 1 <= n <= 25
        assert len(trace.objective_after_q) == n
        assert len(trace.gamma) == n
        f = trace.objective
        assert all(f[t + 1] <= f[t] + 1e-9 * abs(f[t]) for t in range(n - 1))
        assert theta.shape == (60,)


def test_run_ao_wsr_bcd_trace():
    inst = sim.gen_wsr_instance(sim.wsr_default(), sim.child_rng(14, 0))
    rng = np.random.default_rng(14)
    theta0 = rng.uniform(0, 2 * np.pi, inst.m)
    opts = wsr_options()
    opts.max_iterations = 60
    _, _, trace = run_ao(WsrProblem(inst), theta0, opts, "bcd")
    f = trace.objective
    assert all(f[t + 1] <= f[t] + 1e-10 for t in range(len(f) - 1))
