"""Cross-application baselines.

`manifold_solve` is a Riemannian gradient method on the product of unit
circles with Armijo backtracking along the retraction curve. `run_ao` is the
common driver used by the benchmarks: it runs the same alternating loop with
any of the five phase-update strategies, so method comparisons share one
code path for the non-phase block.
"""

from __future__ import annotations

import time

import numpy as np

from . import ao
from .ao import IterationTrace, theta_of, u_map

METHODS = ("aogd", "ag", "bb", "bcd", "manifold")


def riemannian_gradient(g, v):
    """Tangential component of a Euclidean gradient g at v on the product of
    circles: d_k = g_k - Re{g_k conj(v_k)} v_k."""
    return g - np.real(g * np.conj(v)) * v


def retract(v, d, step):
    """Entry-wise projective retraction (v + step d) / |v + step d|.

    Near-zero magnitudes (radial collisions) halve the step and retry; the
    zero step returns v unchanged.
    """
    if step == 0.0:
        return np.array(v, complex)
    for _ in range(200):
        cand = v + step * d
        mag = np.abs(cand)
        if np.min(mag) >= 1e-14:
            return cand / mag
        step *= 0.5
    return np.array(v, complex)


def manifold_solve(objective, egrad, v0, gamma0=1.0, beta=0.5, c=1e-4,
                   xi=1e-9, grad_tol=1e-8, max_iterations=1000):
    """Minimize a smooth objective over unit-modulus vectors.

    objective(v) -> float and egrad(v) -> Euclidean gradient of it. Armijo
    backtracking on the retraction curve keeps the iteration monotone;
    terminates when the Riemannian gradient norm drops below grad_tol or the
    normalized decrease falls below xi. Returns (v, objective values).
    """
    v = np.array(v0, complex)
    f = float(objective(v))
    values = [f]
    for _ in range(max_iterations):
        rg = riemannian_gradient(np.asarray(egrad(v)), v)
        rnorm = float(np.linalg.norm(rg))
        if rnorm <= grad_tol:
            break
        gamma = gamma0
        accepted = False
        for _ in range(60):
            cand = retract(v, -rg, gamma)
            f_cand = float(objective(cand))
            if f_cand <= f - c * gamma * rnorm**2:
                accepted = True
                break
            gamma *= beta
        if not accepted:
            break
        rel = abs(f_cand - f) / max(abs(f), 1e-12)
        v, f = cand, f_cand
        values.append(f)
        if rel < xi:
            break
    return v, values


def run_ao(problem, theta0, opts, method):
    """Alternating loop with a selectable phase-update strategy.

    'aogd', 'ag' and 'bb' delegate to ao.solve; 'bcd' applies one
    element-wise closed-form pass per outer iteration; 'manifold' solves the
    phase subproblem to convergence per outer iteration. Returns
    (theta, q, trace) in all cases.
    """
    if method in ("aogd", "tailored"):
        return ao.solve(problem, theta0, opts, step_rule="tailored")
    if method in ("ag", "bb"):
        return ao.solve(problem, theta0, opts, step_rule=method)
    if method not in ("bcd", "manifold"):
        raise ValueError(f"unknown method {method!r}")

    theta = np.array(theta0, float)
    q = None
    f_prev = None
    trace = IterationTrace()
    start = time.perf_counter()
    for t in range(opts.max_iterations):
        q = problem.update_q(theta, q)
        f_after_q = float(problem.evaluate(q, theta))
        v = u_map(theta)
        if method == "bcd":
            v = problem.phase_bcd_sweep(q, v)
        else:
            v, _ = manifold_solve(
                lambda x: problem.phase_objective_v(q, x),
                lambda x: problem.phase_grad_v(q, x),
                v,
            )
        theta = theta_of(v)
        f_t = float(problem.evaluate(q, theta))
        gnorm = float(np.linalg.norm(problem.gradient_theta(q, theta)))
        trace.append(f_after_q, f_t, 0.0, 0, gnorm, 0.0,
                     time.perf_counter() - start, False)
        if f_prev is not None and abs(f_t - f_prev) / max(abs(f_prev), 1e-12) < opts.xi:
            break
        f_prev = f_t
    return theta, q, trace
