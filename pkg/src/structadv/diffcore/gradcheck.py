"""Central finite-difference gradient oracle."""

from __future__ import annotations

import math

import numpy as np

from .core import NonFiniteError, Tensor


def finite_diff_grad(fn, at: Tensor, step: float = 1e-5) -> Tensor:
    """Central-difference gradient of a scalar-valued ``fn`` at ``at``.

    ``fn`` takes a Tensor and returns a float; it must be deterministic.
    Stays independent of the tape machinery so it can cross-check it.
    """
    if step <= 0:
        raise ValueError(f"step must be positive, got {step}")
    base = at.data
    grad = np.empty(base.shape, dtype=np.float64)
    flat = grad.reshape(-1)
    for i in range(base.size):
        plus = base.copy().reshape(-1)
        minus = base.copy().reshape(-1)
        plus[i] += step
        minus[i] -= step
        fp = float(fn(Tensor(plus.reshape(base.shape))))
        fm = float(fn(Tensor(minus.reshape(base.shape))))
        if not (math.isfinite(fp) and math.isfinite(fm)):
            raise NonFiniteError(f"fn returned non-finite value at probe {i}")
        flat[i] = (fp - fm) / (2.0 * step)
    return Tensor(grad)


def relative_gradient_error(
    analytic: np.ndarray, numeric: np.ndarray, *, abs_floor: float = 1e-7
) -> float:
    """Worst-case per-component relative error with an absolute floor."""
    a = np.asarray(analytic, dtype=np.float64)
    b = np.asarray(numeric, dtype=np.float64)
    denom = np.maximum(np.maximum(np.abs(a), np.abs(b)), abs_floor)
    return float(np.max(np.abs(a - b) / denom))
