"""Two-block alternating optimization with gradient-descent phase updates.

The framework minimizes f(Q, Theta) where Theta is a vector of phase angles
entering only through the unit-modulus map `u_map`, and Q is an application
block with its own (conventional) update. A problem object supplies three
capabilities, duck-typed:

    update_q(theta, q_prev) -> q          solve/improve the non-phase block
    evaluate(q, theta)      -> float      objective value, minimization sense
    gradient_theta(q, theta) -> ndarray   gradient of evaluate in theta

Applications that maximize register the negated objective and gradient.

Per iteration the driver updates Q, takes one gradient step on Theta with a
step size chosen by one of three rules, and records a trace row. The
cross-block backtracking rule accepts the largest gamma0 * beta^m whose trial
value does not exceed the previous iteration's end-of-iteration value minus
c * gamma * ||grad||^2; the first iteration takes gamma0 unguarded. The
classical rule compares against the current block value instead, and the
Barzilai-Borwein rule uses the step/gradient history without a guard.

Theta is kept unwrapped: no modular reduction is applied between iterations.
"""

from __future__ import annotations

import dataclasses
import time

import numpy as np

from .numerics import NumericError


def u_map(theta):
    """Unit-modulus vector for phase angles theta: v_k = e^{-j theta_k}.

    The diagonal of the phase-shift matrix is the conjugate, phi_diag(v).
    """
    theta = np.asarray(theta, float)
    return np.cos(theta) - 1j * np.sin(theta)


def phi_diag(v):
    """Diagonal entries e^{+j theta_k} of the phase-shift matrix."""
    return np.conj(v)


def theta_of(v):
    """Phase angles in [0, 2*pi) recovering v = u_map(theta)."""
    return np.mod(-np.angle(v), 2.0 * np.pi)


@dataclasses.dataclass
class SolverOptions:
    """Step-rule and termination constants for `solve`.

    xi is the outer relative-decrease tolerance; xi1 is the inner-loop
    tolerance consumed by the weighted-sum-rate block; xi2 mirrors the outer
    tolerance conventionally used for that application.
    """

    gamma0: float = 1.0
    beta: float = 0.5
    c: float = 1e-4
    xi: float = 1e-6
    xi1: float = 1e-5
    xi2: float = 1e-3
    max_iterations: int = 2000
    max_backtracks: int = 60
    rng_seed: int = 0

    def __post_init__(self):
        if not (self.gamma0 > 0):
            raise ValueError("gamma0 must be positive")
        if not (0.0 < self.beta < 1.0):
            raise ValueError("beta must lie in (0, 1)")
        if not (0.0 < self.c < 1.0):
            raise ValueError("c must lie in (0, 1)")
        if min(self.xi, self.xi1, self.xi2) <= 0:
            raise ValueError("tolerances must be positive")
        if self.max_iterations < 1 or self.max_backtracks < 0:
            raise ValueError("iteration limits out of range")


@dataclasses.dataclass
class IterationTrace:
    """Per-iteration record of a solve run.

    objective[t] is the end-of-iteration value f(U(Theta^{t+1}), Q^t); the
    value right after the Q update is kept separately in objective_after_q.
    Wall times are cumulative seconds since the run started.
    """

    objective_after_q: list = dataclasses.field(default_factory=list)
    objective: list = dataclasses.field(default_factory=list)
    gamma: list = dataclasses.field(default_factory=list)
    backtracks: list = dataclasses.field(default_factory=list)
    grad_norm: list = dataclasses.field(default_factory=list)
    grad_max: list = dataclasses.field(default_factory=list)
    elapsed: list = dataclasses.field(default_factory=list)
    stalled: list = dataclasses.field(default_factory=list)

    def append(self, f_q, f_t, gamma, m, gnorm, gmax, elapsed, stalled):
        self.objective_after_q.append(f_q)
        self.objective.append(f_t)
        self.gamma.append(gamma)
        self.backtracks.append(m)
        self.grad_norm.append(gnorm)
        self.grad_max.append(gmax)
        self.elapsed.append(elapsed)
        self.stalled.append(stalled)

    def __len__(self):
        return len(self.objective)


class FunctionProblem:
    """Adapter for phase-only objectives (no Q block): pass the callable
    objective f(theta) and its gradient."""

    def __init__(self, fn, grad):
        self.fn = fn
        self.grad = grad

    def update_q(self, theta, q_prev):
        return None

    def evaluate(self, q, theta):
        return float(self.fn(theta))

    def gradient_theta(self, q, theta):
        return np.asarray(self.grad(theta), float)


def _backtrack(problem, theta, q, grad, f_ref, opts):
    """Largest gamma0 * beta^m with trial value <= f_ref - c*gamma*||g||^2.

    Returns (gamma, theta_next, m, stalled). On exhaustion the step is zero
    and stalled is True; monotonicity is preserved by not moving.
    """
    gnorm2 = float(np.dot(grad, grad))
    if gnorm2 == 0.0:
        return opts.gamma0, np.array(theta, float), 0, False
    gamma = opts.gamma0
    for m in range(opts.max_backtracks + 1):
        cand = theta - gamma * grad
        if problem.evaluate(q, cand) <= f_ref - opts.c * gamma * gnorm2:
            return gamma, cand, m, False
        gamma *= opts.beta
    return 0.0, np.array(theta, float), opts.max_backtracks + 1, True


def tailored_backtrack(problem, theta, q, grad, f_prev_iteration, opts):
    """Cross-block rule: the reference value is the previous iteration's
    end-of-iteration objective, not the current block value."""
    return _backtrack(problem, theta, q, grad, f_prev_iteration, opts)


def ag_backtrack(problem, theta, q, grad, opts):
    """Classical sufficient-decrease rule against the current block value."""
    return _backtrack(problem, theta, q, grad, problem.evaluate(q, theta), opts)


def bb_step(theta_t, theta_prev, grad_t, grad_prev, gamma_min, gamma_max):
    """First Barzilai-Borwein step (s.s)/(s.y), clipped to
    [gamma_min, gamma_max]; falls back to gamma_min when the curvature
    estimate s.y is not positive."""
    s = np.asarray(theta_t, float) - np.asarray(theta_prev, float)
    y = np.asarray(grad_t, float) - np.asarray(grad_prev, float)
    sy = float(np.dot(s, y))
    if sy <= 0.0:
        return gamma_min
    return float(np.clip(np.dot(s, s) / sy, gamma_min, gamma_max))


def _first_step(problem, q, theta, grad, opts):
    """Unguarded first step of size gamma0, halved only while the trial
    objective is non-finite."""
    gamma = opts.gamma0
    for _ in range(200):
        cand = theta - gamma * grad
        if np.isfinite(problem.evaluate(q, cand)):
            return gamma, cand
        gamma *= 0.5
    return 0.0, np.array(theta, float)


def _check_finite(value, what, t):
    if not np.all(np.isfinite(value)):
        raise NumericError(f"non-finite {what} at iteration {t}")


def solve(problem, theta0, opts=None, step_rule="tailored"):
    """Run the alternating loop until the relative objective decrease drops
    below opts.xi or opts.max_iterations is reached.

    step_rule is one of 'tailored', 'ag', 'bb'. Returns
    (theta, q, trace); trace.objective[t] holds the end-of-iteration values
    whose normalized increments drive termination.
    """
    if opts is None:
        opts = SolverOptions()
    if step_rule not in ("tailored", "ag", "bb"):
        raise ValueError(f"unknown step rule {step_rule!r}")
    theta = np.array(theta0, float)
    q = None
    f_prev = None
    theta_prev = None
    grad_prev = None
    trace = IterationTrace()
    start = time.perf_counter()

    for t in range(opts.max_iterations):
        q = problem.update_q(theta, q)
        f_after_q = float(problem.evaluate(q, theta))
        _check_finite(f_after_q, "objective", t)
        grad = np.asarray(problem.gradient_theta(q, theta), float)
        _check_finite(grad, "gradient", t)

        stalled = False
        m = 0
        if step_rule == "bb" and t > 0:
            gamma = bb_step(theta, theta_prev, grad, grad_prev,
                            1e-8 * opts.gamma0, 1e4 * opts.gamma0)
            theta_next = theta - gamma * grad
        elif step_rule == "ag":
            gamma, theta_next, m, stalled = _backtrack(
                problem, theta, q, grad, f_after_q, opts)
        elif t == 0:
            # the guard needs a previous iteration; take gamma0 directly
            gamma, theta_next = _first_step(problem, q, theta, grad, opts)
        else:
            gamma, theta_next, m, stalled = tailored_backtrack(
                problem, theta, q, grad, f_prev, opts)

        f_t = float(problem.evaluate(q, theta_next))
        _check_finite(f_t, "objective", t)
        gnorm = float(np.linalg.norm(grad))
        trace.append(f_after_q, f_t, gamma, m, gnorm,
                     float(np.max(np.abs(grad))) if grad.size else 0.0,
                     time.perf_counter() - start, stalled)

        converged = (
            t >= 1
            and abs(f_t - f_prev) / max(abs(f_prev), 1e-12) < opts.xi
        )
        theta_prev, grad_prev = theta, grad
        theta = theta_next
        f_prev = f_t
        if converged:
            break

    return theta, q, trace


def stationarity_residual(problem, q, theta):
    """Max-norm of the phase gradient at (q, theta)."""
    grad = np.asarray(problem.gradient_theta(q, theta), float)
    return float(np.max(np.abs(grad))) if grad.size else 0.0
