"""Secrecy-rate maximization for an IRS-assisted wiretap channel.

A multi-antenna transmitter sends through an M-element reflecting surface to
a legitimate user while an eavesdropper listens. For a fixed beamformer w the
objective is the SNR-ratio

    f(v) = (v^H Y_l v) / (v^H Y_e v),
    Y_i  = (1/M) I + z_i z_i^H,   z_i = (1/sigma_i) conj(h_i) * (G w),

with v the conjugated unit-modulus vector of u_map. The quadratics are kept
in the rank-one factored form (z_l, z_e); all evaluations and gradients are
O(M). The framework minimizes, so the problem adapter registers -f.
"""

from __future__ import annotations

import dataclasses
import math

import numpy as np

from .ao import u_map
from .numerics import rank_one_generalized_eig


@dataclasses.dataclass
class SecrecyInstance:
    """Channel draw for one secrecy scenario.

    G: (M, N_t) transmitter-to-surface channel; h_l, h_e: (M,) surface-to-user
    and surface-to-eavesdropper channels; noise variances and transmit power
    are linear (watts).
    """

    G: np.ndarray
    h_l: np.ndarray
    h_e: np.ndarray
    sigma2_l: float
    sigma2_e: float
    power: float

    def __post_init__(self):
        self.G = np.asarray(self.G, complex)
        self.h_l = np.asarray(self.h_l, complex)
        self.h_e = np.asarray(self.h_e, complex)
        m, n_t = self.G.shape
        if self.h_l.shape != (m,) or self.h_e.shape != (m,):
            raise ValueError("channel dimensions disagree")
        if not (self.sigma2_l > 0 and self.sigma2_e > 0):
            raise ValueError("noise variances must be positive")
        if not (np.isfinite(self.power) and self.power >= 0):
            raise ValueError("power must be finite and non-negative")

    @property
    def m(self):
        return self.G.shape[0]

    @property
    def n_t(self):
        return self.G.shape[1]


@dataclasses.dataclass
class SecrecyQuadratics:
    """Rank-one factors of the ratio quadratics for a fixed beamformer:
    Y_i = (1/M) I + z_i z_i^H."""

    z_l: np.ndarray
    z_e: np.ndarray

    @property
    def m(self):
        return self.z_l.shape[0]

    def dense(self, side):
        """Materialize Y_l ('l') or Y_e ('e') as a dense Hermitian matrix."""
        z = self.z_l if side == "l" else self.z_e
        return np.eye(self.m) / self.m + np.outer(z, np.conj(z))


def optimal_beamformer(instance, v):
    """Globally optimal transmit beamformer for fixed surface phases.

    With g_i = G^H (v * h_i) the ratio objective over unit-power directions
    is the generalized Rayleigh quotient of the rank-one pair
    (I + (P/sigma_l^2) g_l g_l^H, I + (P/sigma_e^2) g_e g_e^H); the result is
    scaled to ||w||^2 = P. P = 0 returns the zero vector.
    """
    if instance.power == 0.0:
        return np.zeros(instance.n_t, complex)
    gh = instance.G.conj().T
    g_l = gh @ (v * instance.h_l)
    g_e = gh @ (v * instance.h_e)
    u = rank_one_generalized_eig(
        instance.power / instance.sigma2_l, g_l,
        instance.power / instance.sigma2_e, g_e,
    )
    return np.sqrt(instance.power) * u


def build_quadratics(instance, w):
    """Rank-one ratio quadratics for a fixed beamformer w."""
    gw = instance.G @ w
    z_l = np.conj(instance.h_l) * gw / np.sqrt(instance.sigma2_l)
    z_e = np.conj(instance.h_e) * gw / np.sqrt(instance.sigma2_e)
    return SecrecyQuadratics(z_l, z_e)


def ratio_objective(quad, v):
    """Value of (v^H Y_l v) / (v^H Y_e v); the identity parts contribute
    ||v||^2 / M = 1 on the unit-modulus set."""
    base = float(np.real(np.vdot(v, v))) / quad.m
    num = base + abs(np.vdot(quad.z_l, v)) ** 2
    den = base + abs(np.vdot(quad.z_e, v)) ** 2
    return num / den


def gradient_theta(quad, theta):
    """Analytic gradient of the ratio objective in the phase angles."""
    v = u_map(theta)
    ylv = v / quad.m + quad.z_l * np.vdot(quad.z_l, v)
    yev = v / quad.m + quad.z_e * np.vdot(quad.z_e, v)
    num = float(np.real(np.vdot(v, ylv)))
    den = float(np.real(np.vdot(v, yev)))
    jv = 1j * v
    term1 = 2.0 * np.real(np.conj(ylv) * (-jv)) / den
    term2 = 2.0 * num * np.real(np.conj(yev) * jv) / den**2
    return term1 + term2


def secrecy_rate(ratio):
    """Secrecy rate in bits: max(log2(ratio), 0)."""
    if ratio <= 0:
        return 0.0
    return max(float(np.log2(ratio)), 0.0)


def _circle_maximize(a_num, b_num, c_num, a_den, b_den, c_den, phi_now):
    """Maximize (a_N + b_N cos(phi) + c_N sin(phi)) / (a_D + ...) over phi.

    Stationary points solve A sin(phi) + B cos(phi) + C = 0; the current
    angle stays a candidate so a sweep step never decreases the ratio.
    """
    big_a = a_num * b_den - a_den * b_num
    big_b = a_den * c_num - a_num * c_den
    big_c = c_num * b_den - b_num * c_den
    r = math.hypot(big_a, big_b)
    scale = abs(a_num) + abs(a_den) + abs(b_num) + abs(b_den) + abs(c_num) + abs(c_den)
    candidates = [phi_now]
    if r > 1e-15 * max(scale, 1e-300) ** 2:
        s = min(max(-big_c / r, -1.0), 1.0)
        psi = math.atan2(big_b, big_a)
        base = math.asin(s)
        candidates.extend([base - psi, math.pi - base - psi])
    else:
        # stationarity nearly flat; probe three spread points
        candidates.extend([phi_now + 2.0 * math.pi / 3.0, phi_now - 2.0 * math.pi / 3.0])

    def value(phi):
        num = a_num + b_num * math.cos(phi) + c_num * math.sin(phi)
        den = a_den + b_den * math.cos(phi) + c_den * math.sin(phi)
        return num / den

    best = max(candidates, key=value)
    return best if value(best) > value(phi_now) else phi_now


def elementwise_bcd_sweep(quad, v):
    """One pass of per-element coordinate maximization of the ratio.

    Every element update solves its one-dimensional subproblem in closed
    form, so the objective is non-decreasing after each sub-step.
    """
    m = quad.m
    # hot loop: plain-complex scalars avoid per-element array dispatch
    vl = [complex(x) for x in np.asarray(v)]
    zlc = [complex(x).conjugate() for x in quad.z_l]
    zec = [complex(x).conjugate() for x in quad.z_e]
    il = complex(np.vdot(quad.z_l, v))
    ie = complex(np.vdot(quad.z_e, v))
    for k in range(m):
        zl = zlc[k]
        ze = zec[k]
        vk = vl[k]
        il_rest = il - zl * vk
        ie_rest = ie - ze * vk
        # num(phi) = 1 + |il_rest + conj(zl) e^{j phi}|^2, likewise den
        beta_n = il_rest.conjugate() * zl
        beta_d = ie_rest.conjugate() * ze
        a_num = 1.0 + abs(il_rest) ** 2 + abs(zl) ** 2
        a_den = 1.0 + abs(ie_rest) ** 2 + abs(ze) ** 2
        phi = _circle_maximize(
            a_num, 2.0 * beta_n.real, -2.0 * beta_n.imag,
            a_den, 2.0 * beta_d.real, -2.0 * beta_d.imag,
            math.atan2(vk.imag, vk.real),
        )
        vk = complex(math.cos(phi), math.sin(phi))
        vl[k] = vk
        il = il_rest + zl * vk
        ie = ie_rest + ze * vk
    return np.array(vl)


class _State:
    """Beamformer block value: the vector and its cached quadratics."""

    __slots__ = ("w", "quad")

    def __init__(self, w, quad):
        self.w = w
        self.quad = quad


class SecrecyProblem:
    """Two-block adapter: minimize -ratio over (w, theta)."""

    def __init__(self, instance):
        self.instance = instance

    def update_q(self, theta, q_prev):
        w = optimal_beamformer(self.instance, u_map(theta))
        return _State(w, build_quadratics(self.instance, w))

    def evaluate(self, q, theta):
        return -ratio_objective(q.quad, u_map(theta))

    def gradient_theta(self, q, theta):
        return -gradient_theta(q.quad, theta)

    # hooks for the element-wise and manifold baselines -------------------
    def phase_bcd_sweep(self, q, v):
        return elementwise_bcd_sweep(q.quad, v)

    def phase_objective_v(self, q, v):
        return -ratio_objective(q.quad, v)

    def phase_grad_v(self, q, v):
        """Euclidean (Wirtinger) gradient in v of the minimized objective."""
        quad = q.quad
        ylv = v / quad.m + quad.z_l * np.vdot(quad.z_l, v)
        yev = v / quad.m + quad.z_e * np.vdot(quad.z_e, v)
        num = float(np.real(np.vdot(v, ylv)))
        den = float(np.real(np.vdot(v, yev)))
        return -2.0 * (ylv * den - num * yev) / den**2


def default_options():
    """Solver constants used by the secrecy experiments."""
    from .ao import SolverOptions

    return SolverOptions(gamma0=1.0, beta=0.5, c=5e-5, xi=1e-6,
                         max_iterations=2000)
