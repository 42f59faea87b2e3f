"""Constraint projections for perturbation parameters.

Both projections are bitwise idempotent: inputs already feasible (within a
small tolerance absorbed by the state invariants) are returned unchanged.
"""

from __future__ import annotations

import numpy as np

_FEAS_TOL = 1e-12


def project_l2_ball(v: np.ndarray, epsilon: float, *, axis=None) -> np.ndarray:
    """Project onto the l2 ball of radius ``epsilon``.

    With ``axis=None`` the whole array counts as one vector (Frobenius norm);
    an integer axis projects each slice along the remaining axes, e.g.
    ``axis=0`` on a (k, d) stack projects each row independently.
    """
    if epsilon < 0:
        raise ValueError(f"epsilon {epsilon} must be nonnegative")
    v = np.asarray(v, dtype=np.float64)
    if axis is None:
        norm = float(np.linalg.norm(v))
        if norm <= epsilon * (1.0 + _FEAS_TOL):
            return v
        return v * (epsilon / norm)
    if axis != 0:
        raise ValueError("only axis=0 (leading stack axis) is supported")
    flat = v.reshape(v.shape[0], -1)
    norms = np.linalg.norm(flat, axis=1)
    outside = norms > epsilon * (1.0 + _FEAS_TOL)
    if not np.any(outside):
        return v
    scale = np.ones_like(norms)
    scale[outside] = epsilon / norms[outside]
    return v * scale.reshape((-1,) + (1,) * (v.ndim - 1))


def project_simplex(alpha: np.ndarray) -> np.ndarray:
    """Euclidean projection onto the probability simplex.

    Sort-based algorithm: find the largest index rho with
    u_rho + (1 - cumsum(u)_rho)/rho > 0 for the descending sort u, then
    shift and clip.  Already-feasible input is returned unchanged.
    """
    a = np.asarray(alpha, dtype=np.float64)
    if a.ndim != 1 or a.size == 0:
        raise ValueError(f"expected a nonempty 1-D array, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("simplex projection of non-finite input")
    if a.size == 1:
        return np.ones(1)  # the 1-simplex is the single point {1}
    if np.all(a >= 0.0) and abs(a.sum() - 1.0) <= 1e-9:
        return a
    u = np.sort(a)[::-1]
    cumsum = np.cumsum(u)
    rho = np.nonzero(u + (1.0 - cumsum) / np.arange(1, a.size + 1) > 0)[0][-1]
    lam = (1.0 - cumsum[rho]) / (rho + 1.0)
    return np.maximum(a + lam, 0.0)
