"""Closed-form bound quantities for the 2-feature task.

All formulas take the domain-wise perturbation scalar ``delta`` and the
label sign ``y`` through the product delta*y; epsilon := delta*y / (2 beta).
The margin value M is the max of w_hat . x over the dataset for the
unit-norm max-margin classifier w_hat.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..data import DomainDataset


def compute_M(dataset) -> float:
    """Margin value of the unit-norm hard-margin classifier, exactly.

    Expects the 2-feature geometry: x = (x_inv, x_sp) with x_inv = c*y for a
    constant c > 0.  When x_sp * y takes both signs the optimum is (1, 0) and
    M = c; when it is single-signed the spurious coordinate helps and the
    closed form follows from the two active constraints.
    """
    if isinstance(dataset, DomainDataset):
        xs, ys = dataset.pooled()
    else:
        xs, ys = dataset
        xs, ys = np.asarray(xs, dtype=np.float64), np.asarray(ys)
    if xs.ndim != 2 or xs.shape[1] != 2:
        raise ValueError(f"expected (n, 2) inputs, got {xs.shape}")
    if len(np.unique(ys)) < 2:
        raise ValueError("degenerate dataset (single class)")
    c_vals = xs[:, 0] * ys
    c = float(c_vals[0])
    if c <= 0 or not np.allclose(c_vals, c, rtol=0, atol=1e-9):
        raise ValueError("inputs are not of the form x_inv = c*y with c > 0")
    s = xs[:, 1] * ys  # signed spurious margins
    s_min, s_max = float(s.min()), float(s.max())
    if s_min <= 0.0 <= s_max:
        return c
    # single-signed: w_hat tilts toward the spurious coordinate
    u = 1.0 if s_min > 0 else -1.0
    m_abs = min(abs(s_min), abs(s_max))
    s_abs_max = max(abs(s_min), abs(s_max))
    norm = math.hypot(c, m_abs)
    return (c * c + m_abs * s_abs_max) / norm


def w0_upper_bound(p: float, beta: float, delta: float, y: int) -> float:
    """The fixed point of the spurious-weight update,
    (1 / 2 beta) * ln[(p / (1-p)) * ((beta + delta y) / (beta - delta y))].

    This is the level the spurious weight can never cross when training
    starts at the origin; its sign follows the sign of the bracket's log.
    """
    _check_pdy(p, beta, delta, y)
    dy = delta * y
    return math.log((p / (1.0 - p)) * ((beta + dy) / (beta - dy))) / (2.0 * beta)


def _check_pdy(p, beta, delta, y):
    if not 0.0 < p < 1.0:
        raise ValueError(f"p={p} outside (0, 1)")
    if y not in (1, -1):
        raise ValueError(f"y must be +1 or -1, got {y}")
    dy = delta * y
    if beta - dy <= 0 or beta + dy <= 0:
        raise ValueError(f"need beta > |delta|, got beta={beta}, delta={delta}")


def constants_c1_c2(M: float, beta: float, delta: float, y: int) -> tuple[float, float]:
    """c1 = 2(2M(1+delta)-1)/(beta+delta y)^2 and the companion c2 with the
    split exponents 3/2 - eps and 1/2 + eps; positive iff 2M(1+delta) > 1."""
    _check_pdy(0.5, beta, delta, y)
    dy = delta * y
    eps = dy / (2.0 * beta)
    top = 2.0 * (2.0 * M * (1.0 + delta) - 1.0)
    c1 = top / (beta + dy) ** 2
    c2 = top / ((beta + dy) ** (1.5 - eps) * (beta - dy) ** (0.5 + eps))
    return c1, c2


def mat_lower_bound(p: float, t: float, M: float, beta: float, delta: float, y: int) -> float:
    """Convergence-rate lower bound (bracket inside the asymptotic order,
    constant factor 1) for training with a domain-wise perturbation:

        (1/(beta+delta y)) * ln[(c1+p) / (c2 + p^(1/2-eps) (1-p)^(1/2+eps))]
        / (M * ln(t+1)).
    """
    _check_pdy(p, beta, delta, y)
    if t < 1:
        raise ValueError(f"t={t} must be >= 1")
    dy = delta * y
    eps = dy / (2.0 * beta)
    c1, c2 = constants_c1_c2(M, beta, delta, y)
    num_top = c1 + p
    num_bot = c2 + p ** (0.5 - eps) * (1.0 - p) ** (0.5 + eps)
    if num_top <= 0:
        raise ValueError(f"log argument: c1 + p = {num_top} <= 0")
    if num_bot <= 0:
        raise ValueError(f"log argument: c2 + p^(1/2-eps)(1-p)^(1/2+eps) = {num_bot} <= 0")
    return math.log(num_top / num_bot) / ((beta + dy) * M * math.log(t + 1.0))


def erm_lower_bound(p: float, t: float, M: float, beta: float) -> float:
    """Unperturbed-training counterpart with c = 2(2M-1)/beta^2:
    ln[(c+p)/(c+sqrt(p(1-p)))] / (M ln t); grows monotonically in p."""
    if not 0.0 < p < 1.0:
        raise ValueError(f"p={p} outside (0, 1)")
    if t < 2:
        raise ValueError(f"t={t} must be >= 2")
    if 2.0 * M <= 1.0:
        raise ValueError(f"need 2M > 1, got M={M}")
    c = 2.0 * (2.0 * M - 1.0) / beta**2
    top = c + p
    bot = c + math.sqrt(p * (1.0 - p))
    if top <= 0 or bot <= 0:
        raise ValueError(f"log argument non-positive: {top}/{bot}")
    return math.log(top / bot) / (M * math.log(t))


def monotonicity_lhs(M: float, beta: float, delta: float, y: int) -> float:
    """2 eps c1 + c2 + 3/4 + (3/2) eps; the bound's derivative in p can go
    negative on (0.5, 1) when this is negative."""
    dy = delta * y
    eps = dy / (2.0 * beta)
    c1, c2 = constants_c1_c2(M, beta, delta, y)
    return 2.0 * eps * c1 + c2 + 0.75 + 1.5 * eps


@dataclass(frozen=True)
class BoundValues:
    """All bound quantities for one (p, beta, delta, y, M) configuration."""

    p: float
    beta: float
    delta: float
    y: int
    M: float
    epsilon_thm: float
    c1: float
    c2: float
    w0: float
    monotonicity_lhs: float

    def mat_lower(self, p: float, t: float) -> float:
        return mat_lower_bound(p, t, self.M, self.beta, self.delta, self.y)

    def erm_lower(self, p: float, t: float) -> float:
        return erm_lower_bound(p, t, self.M, self.beta)


def make_bounds(p: float, beta: float, delta: float, y: int, M: float) -> BoundValues:
    c1, c2 = constants_c1_c2(M, beta, delta, y)
    return BoundValues(
        p=p,
        beta=beta,
        delta=delta,
        y=y,
        M=M,
        epsilon_thm=delta * y / (2.0 * beta),
        c1=c1,
        c2=c2,
        w0=w0_upper_bound(p, beta, delta, y),
        monotonicity_lhs=monotonicity_lhs(M, beta, delta, y),
    )
