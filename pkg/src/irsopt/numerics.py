"""Small dense complex-linear-algebra helpers used by the solvers.

Everything here works on plain numpy arrays. Matrices are expected to be
Hermitian (PSD where stated); no general eigensolver is provided.
"""

from __future__ import annotations

import numpy as np


class NumericError(RuntimeError):
    """Numeric failure carrying enough context to diagnose the run."""


def quadratic_form(a, v):
    """Real value of v^H A v for Hermitian A.

    Raises ValueError on dimension mismatch. The imaginary residue of the
    product is discarded; for Hermitian A it is rounding noise only.
    """
    a = np.asarray(a)
    v = np.asarray(v)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] != v.shape[0]:
        raise ValueError(f"shape mismatch: A {a.shape}, v {v.shape}")
    return float(np.real(np.vdot(v, a @ v)))


def _seed_vector(n, seed):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return x / np.linalg.norm(x)


def power_iteration(a, tol=1e-10, max_iter=500, seed=0):
    """Dominant eigenpair of a Hermitian PSD matrix by power iteration.

    Returns (eigenvalue, unit eigenvector) once ||A u - lam u|| <= tol * lam.
    Restarts once from a fresh seeded vector if the first attempt stagnates;
    raises NumericError with the last residual if both attempts fail.
    """
    a = np.asarray(a)
    n = a.shape[0]
    residual = np.inf
    for attempt in range(2):
        x = _seed_vector(n, seed + attempt)
        for _ in range(max_iter):
            y = a @ x
            lam = float(np.real(np.vdot(x, y)))
            residual = float(np.linalg.norm(y - lam * x))
            if residual <= tol * lam:
                return lam, x
            ny = np.linalg.norm(y)
            if ny == 0.0:
                # x is an exact null vector; for PSD A that is the A = 0 case
                return 0.0, x
            x = y / ny
    raise NumericError(
        f"power iteration did not converge in {max_iter} iterations "
        f"(last residual {residual:.3e})"
    )


def rank_one_generalized_eig(a, g, b, h):
    """Unit maximizer u of (u^H A u) / (u^H B u) for the rank-one pair
    A = I + a g g^H, B = I + b h h^H with a, b >= 0.

    B^{-1/2} has a closed form, so the problem reduces to the dominant
    eigenvector of the Hermitian matrix B^{-1/2} A B^{-1/2}.
    """
    g = np.asarray(g)
    h = np.asarray(h)
    n = g.shape[0]
    ng2 = float(np.real(np.vdot(g, g)))
    nh2 = float(np.real(np.vdot(h, h)))
    if a * ng2 == 0.0 and b * nh2 == 0.0:
        # quotient is identically 1; any unit vector maximizes
        u = np.zeros(n, complex)
        u[0] = 1.0
        return u

    eye = np.eye(n, dtype=complex)
    if b * nh2 > 0.0:
        # B^{-1/2} = I + c h h^H with c = ((1 + b |h|^2)^{-1/2} - 1) / |h|^2
        c = (1.0 / np.sqrt(1.0 + b * nh2) - 1.0) / nh2
        b_inv_half = eye + c * np.outer(h, np.conj(h))
    else:
        b_inv_half = eye

    if a * ng2 > 0.0:
        gt = b_inv_half @ g
        mat = b_inv_half @ b_inv_half + a * np.outer(gt, np.conj(gt))
    else:
        mat = b_inv_half @ b_inv_half

    _, y = power_iteration(mat, tol=1e-12, max_iter=5000)
    u = b_inv_half @ y
    return u / np.linalg.norm(u)
