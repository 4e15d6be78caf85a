"""Weighted-sum-rate maximization for an IRS-assisted multiuser downlink.

An N_t-antenna access point serves K single-antenna users through direct
links h_d and a cascaded reflecting path diag(h_r^H) G. The beamformer block
is solved by a fractional-programming inner loop with closed-form auxiliary
updates and a projected gradient step on W; the phase block reduces to a
quadratic form

    f4(v) = v^H R v - 2 Re{v^H e}

built from the auxiliaries frozen at the current point. The surrogate equals
the weighted sum rate after the auxiliary updates, so the gradient of f4 is
the exact phase gradient of -WSR at the current iterate. The framework
minimizes, so the adapter registers -WSR.
"""

from __future__ import annotations

import dataclasses

import numpy as np

from .ao import u_map
from .numerics import NumericError, power_iteration


@dataclasses.dataclass
class WsrInstance:
    """Channel draw for one downlink scenario.

    h_d: (K, N_t) direct channels; h_r: (K, M) surface-to-user channels;
    G: (M, N_t) access-point-to-surface channel; omega: (K,) rate weights;
    sigma2 and power are linear (watts). The cascade diag(h_r_k^H) G is
    cached per user as cascade[k], shape (M, N_t).
    """

    h_d: np.ndarray
    h_r: np.ndarray
    G: np.ndarray
    omega: np.ndarray
    sigma2: float
    power: float

    def __post_init__(self):
        self.h_d = np.asarray(self.h_d, complex)
        self.h_r = np.asarray(self.h_r, complex)
        self.G = np.asarray(self.G, complex)
        self.omega = np.asarray(self.omega, float)
        k, n_t = self.h_d.shape
        m = self.G.shape[0]
        if self.h_r.shape != (k, m) or self.G.shape != (m, n_t):
            raise ValueError("channel dimensions disagree")
        if self.omega.shape != (k,) or np.any(self.omega < 0):
            raise ValueError("weights must be non-negative, one per user")
        if not (self.sigma2 > 0):
            raise ValueError("noise variance must be positive")
        if not (np.isfinite(self.power) and self.power > 0):
            raise ValueError("power budget must be positive")
        self.cascade = np.conj(self.h_r)[:, :, None] * self.G[None, :, :]

    @property
    def k_users(self):
        return self.h_d.shape[0]

    @property
    def n_t(self):
        return self.h_d.shape[1]

    @property
    def m(self):
        return self.G.shape[0]


@dataclasses.dataclass
class FpState:
    """Fractional-programming block state: auxiliaries p, q and beamformer
    matrix W with columns w_k, shape (N_t, K)."""

    p: np.ndarray
    q: np.ndarray
    W: np.ndarray


@dataclasses.dataclass
class WsrQuadratics:
    """Phase-subproblem quadratic: minimize v^H R v - 2 Re{v^H e}."""

    R: np.ndarray
    e: np.ndarray

    @property
    def m(self):
        return self.e.shape[0]


def effective_rows(instance, v):
    """Effective channel rows h_k^H = h_dk^H + v^H diag(h_rk^H) G, (K, N_t)."""
    return np.conj(instance.h_d) + np.einsum(
        "m,kmn->kn", np.conj(v), instance.cascade)


def _link_matrix(instance, w_mat, v):
    """T[k, i] = h_k^H w_i and the per-user received powers S_k."""
    rows = effective_rows(instance, v)
    t = rows @ w_mat
    s = np.sum(np.abs(t) ** 2, axis=1) + instance.sigma2
    return rows, t, s


def all_sinr(instance, w_mat, v):
    """Per-user SINR vector for beamformer columns w_k."""
    _, t, s = _link_matrix(instance, w_mat, v)
    sig = np.abs(np.diag(t)) ** 2
    return sig / (s - sig)


def sinr(instance, w_mat, v, k):
    """SINR of user k (0-based)."""
    return float(all_sinr(instance, w_mat, v)[k])


def wsr_objective(instance, w_mat, v):
    """Weighted sum rate sum_k omega_k log(1 + SINR_k), natural log."""
    return float(np.dot(instance.omega, np.log1p(all_sinr(instance, w_mat, v))))


def update_p(instance, w_mat, v):
    """Closed-form rate auxiliaries: p_k = SINR_k."""
    return all_sinr(instance, w_mat, v)


def update_q(instance, p, w_mat, v):
    """Closed-form ratio auxiliaries
    q_k = sqrt(omega_k (1 + p_k)) h_k^H w_k / (sum_i |h_k^H w_i|^2 + sigma^2)."""
    _, t, s = _link_matrix(instance, w_mat, v)
    return np.sqrt(instance.omega * (1.0 + p)) * np.diag(t) / s


def fp_surrogate(instance, p, q, w_mat, v):
    """Value of the fractional-programming surrogate at (p, q, W, v).

    Equals the weighted sum rate when p and q are at their closed-form
    updates for (W, v).
    """
    _, t, s = _link_matrix(instance, w_mat, v)
    omega = instance.omega
    coupling = 2.0 * np.sqrt(omega * (1.0 + p)) * np.real(np.conj(q) * np.diag(t))
    return float(np.sum(
        omega * np.log1p(p) - omega * p + coupling - np.abs(q) ** 2 * s))


def update_w_prox(instance, p, q, v, w_prev):
    """Projected gradient ascent step on the beamformer block.

    The surrogate is concave quadratic in W with curvature matrix
    D = sum_k |q_k|^2 h_k h_k^H; the step is 1/L with L a 1.01-padded
    power-iteration estimate of ||D||_2 (floor 1e-12), followed by scaling
    all columns into the power ball.
    """
    rows, _, _ = _link_matrix(instance, w_prev, v)
    wq = np.abs(q) ** 2
    d_mat = np.einsum("kn,k,km->nm", np.conj(rows), wq, rows)
    lin = np.conj(rows).T * (np.sqrt(instance.omega * (1.0 + p)) * q)
    grad = lin - d_mat @ w_prev
    if np.linalg.norm(grad) == 0.0:
        w_new = np.array(w_prev, complex)
    else:
        lam, _ = power_iteration(d_mat, tol=1e-8, max_iter=2000)
        step = 1.0 / max(1.01 * lam, 1e-12)
        w_new = w_prev + step * grad
    total = float(np.sum(np.abs(w_new) ** 2))
    if total > instance.power:
        w_new = w_new * np.sqrt(instance.power / total)
    return w_new


def _matched_filter(instance, v):
    """Full-power matched-filter start, used when no beamformer is given."""
    rows = effective_rows(instance, v)
    k = instance.k_users
    w = np.zeros((instance.n_t, k), complex)
    for j in range(k):
        h = np.conj(rows[j])
        norm = np.linalg.norm(h)
        if norm > 0:
            w[:, j] = h / norm
        else:
            w[0, j] = 1.0
    return w * np.sqrt(instance.power / k)


def fp_inner_loop(instance, v, state0=None, xi1=1e-5, max_inner=500):
    """Cycle p -> q -> W until the normalized surrogate increment drops
    below xi1 or max_inner cycles have run.

    A missing or zero-power starting beamformer is replaced by a full-power
    matched filter (the all-zero W is a fixed point of the updates).
    Returns (FpState, surrogate trajectory); the trajectory is
    non-decreasing.
    """
    if state0 is not None and float(np.sum(np.abs(state0.W) ** 2)) > 0.0:
        w_mat = np.array(state0.W, complex)
        f_prev = fp_surrogate(instance, state0.p, state0.q, w_mat, v)
        traj = [f_prev]
    else:
        w_mat = _matched_filter(instance, v)
        f_prev = None
        traj = []
    p = q = None
    for _ in range(max_inner):
        p = update_p(instance, w_mat, v)
        q = update_q(instance, p, w_mat, v)
        w_mat = update_w_prox(instance, p, q, v, w_mat)
        f_cur = fp_surrogate(instance, p, q, w_mat, v)
        if not np.isfinite(f_cur):
            raise NumericError("non-finite surrogate in the beamformer loop")
        traj.append(f_cur)
        if f_prev is not None and abs(f_cur - f_prev) / max(abs(f_prev), 1e-12) < xi1:
            f_prev = f_cur
            break
        f_prev = f_cur
    return FpState(p, q, w_mat), traj


def build_phase_quadratics(instance, p, q, w_mat):
    """Quadratic (R, e) of the phase subproblem at frozen (p, q, W)."""
    k = instance.k_users
    # a[i, k] = diag(h_rk^H) G w_i, b[i, k] = h_dk^H w_i
    a = np.einsum("kmn,ni->ikm", instance.cascade, w_mat)
    b = np.einsum("kn,ni->ik", np.conj(instance.h_d), w_mat)
    wq = np.abs(q) ** 2
    r_mat = np.einsum("ikm,k,ikl->ml", a, wq, np.conj(a))
    diag = a[np.arange(k), np.arange(k), :]
    e_vec = (np.sqrt(instance.omega * (1.0 + p)) * np.conj(q)) @ diag
    e_vec -= np.einsum("ik,k,ikm->m", np.conj(b), wq, a)
    return WsrQuadratics(r_mat, e_vec)


def phase_objective(quad, v):
    """Value of v^H R v - 2 Re{v^H e}."""
    return float(np.real(np.vdot(v, quad.R @ v)) - 2.0 * np.real(np.vdot(v, quad.e)))


def phase_gradient_theta(quad, theta):
    """Analytic gradient of the phase quadratic in the angles."""
    v = u_map(theta)
    w = quad.R @ v - quad.e
    return 2.0 * np.real(np.conj(w) * (-1j * v))


def elementwise_bcd_v(quad, v):
    """One pass of per-element closed-form minimization of the quadratic:
    v_m = c_m / |c_m| with c_m = e_m - sum_{n != m} R_mn v_n; elements with
    c_m = 0 keep their value."""
    v = np.array(v, complex)
    rv = quad.R @ v
    for m in range(quad.m):
        c = quad.e[m] - (rv[m] - quad.R[m, m] * v[m])
        mag = abs(c)
        if mag > 0.0:
            new = c / mag
            rv += quad.R[:, m] * (new - v[m])
            v[m] = new
    return v


class _State:
    """Beamformer block value plus the frozen phase quadratics."""

    __slots__ = ("fp", "quad")

    def __init__(self, fp, quad):
        self.fp = fp
        self.quad = quad


class WsrProblem:
    """Two-block adapter: minimize -WSR over (W, theta).

    The beamformer block warm-starts from the previous state unless
    warm_start is False.
    """

    def __init__(self, instance, xi1=1e-5, max_inner=500, warm_start=True):
        self.instance = instance
        self.xi1 = xi1
        self.max_inner = max_inner
        self.warm_start = warm_start

    def update_q(self, theta, q_prev):
        v = u_map(theta)
        state0 = q_prev.fp if (q_prev is not None and self.warm_start) else None
        fp, _ = fp_inner_loop(self.instance, v, state0, self.xi1, self.max_inner)
        quad = build_phase_quadratics(self.instance, fp.p, fp.q, fp.W)
        return _State(fp, quad)

    def evaluate(self, q, theta):
        return -wsr_objective(self.instance, q.fp.W, u_map(theta))

    def gradient_theta(self, q, theta):
        # gradient of -WSR equals the gradient of the frozen phase quadratic
        # at the point where the auxiliaries were updated
        return phase_gradient_theta(q.quad, theta)

    # hooks for the element-wise and manifold baselines -------------------
    def phase_bcd_sweep(self, q, v):
        return elementwise_bcd_v(q.quad, v)

    def phase_objective_v(self, q, v):
        return phase_objective(q.quad, v)

    def phase_grad_v(self, q, v):
        return 2.0 * (q.quad.R @ v - q.quad.e)


def default_options():
    """Solver constants used by the weighted-sum-rate experiments."""
    from .ao import SolverOptions

    return SolverOptions(gamma0=30.0, beta=0.5, c=1e-4, xi=1e-3,
                         xi1=1e-5, xi2=1e-3, max_iterations=500)
