"""Gradient descent on the 2-feature task's expected exponential loss.

The classifier is h(x) = w_inv * x_inv + w_sp * x_sp with both weights
starting at the origin.  A fixed domain-wise perturbation scalar ``delta``
is added to both input components, so for a sample with label y the loss
contribution is exp(-(w_inv x_inv + w_sp x_sp + (w_inv + w_sp) delta) y).
With x_inv = y and x_sp = +/- beta weighted p / (1-p), the population loss
for one label sign collapses to

    L(w_inv, w_sp) = exp(-w_inv (1 + delta y))
                     * (p exp(-(beta + delta y) w_sp)
                        + (1 - p) exp((beta - delta y) w_sp)).

Plain full-batch GD on that expression; delta = 0 recovers unperturbed
dynamics.  Discrete steps approximate the continuous-time flow, so recorded
entries carry both the step index and the continuous time step * lr.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class TheoryConfig:
    p: float  # spurious-correlation strength
    beta: float = 1.0  # spurious feature magnitude
    delta: float = 0.0  # fixed domain-wise perturbation scalar
    y: int = 1  # label sign the loss is evaluated at (+1 or -1)
    lr: float | None = None  # defaults to 1e-3 / beta^2
    steps: int = 1_000_000
    n: int | None = None  # finite-sample mode: realized correlation floor(p n)/n
    record_every: int = 100
    inv_scale: float = 1.0  # |x_inv|; scaling it scales the margin value M

    def __post_init__(self):
        if not 0.5 <= self.p < 1.0:
            raise ValueError(f"p={self.p} outside [0.5, 1)")
        if self.beta <= abs(self.delta):
            raise ValueError(f"need beta > |delta|, got beta={self.beta}, delta={self.delta}")
        if self.y not in (1, -1):
            raise ValueError(f"y must be +1 or -1, got {self.y}")
        if self.steps < 1 or self.record_every < 1:
            raise ValueError("steps and record_every must be positive")
        if self.inv_scale <= 0:
            raise ValueError("inv_scale must be positive")
        if self.lr is not None:
            if not 0.0 < self.lr <= 0.1 / self.beta**2:
                raise ValueError(
                    f"lr={self.lr} outside (0, {0.1 / self.beta ** 2}] (stability bound)"
                )

    @property
    def effective_lr(self) -> float:
        return self.lr if self.lr is not None else 1e-3 / self.beta**2

    @property
    def effective_p(self) -> float:
        """Realized correlation: exact-count finite-sample mode floors p*n."""
        if self.n is None:
            return self.p
        return math.floor(self.p * self.n) / self.n


@dataclass(frozen=True)
class TheoryTrace:
    """Recorded (t, w_inv, w_sp, ratio, loss); ratio skips t = 0 by design."""

    steps: np.ndarray  # iteration indices, int
    times: np.ndarray  # continuous time, steps * lr
    w_inv: np.ndarray
    w_sp: np.ndarray
    ratio: np.ndarray  # w_sp * beta / |w_inv * x_inv|
    loss: np.ndarray
    config: TheoryConfig

    def __len__(self) -> int:
        return len(self.steps)

    def at_step(self, step: int) -> int:
        """Index of the first recorded entry at or after ``step``."""
        i = int(np.searchsorted(self.steps, step))
        if i >= len(self.steps):
            raise IndexError(f"step {step} beyond recorded trace")
        return i


class SimulationOverflowError(FloatingPointError):
    """exp overflow during simulation; carries the failing step index."""

    def __init__(self, step: int):
        super().__init__(f"exp overflow at step {step}")
        self.step = step


def simulate_gd(config: TheoryConfig) -> TheoryTrace:
    """Full-batch GD trace from the origin; records every ``record_every``
    steps (and the final step)."""
    p = config.effective_p
    beta = config.beta
    dy = config.delta * config.y
    a = config.inv_scale  # x_inv = a * y, so x_inv * y = a
    lr = config.effective_lr
    q = 1.0 - p
    bp = beta + dy
    bm = beta - dy
    cc = a + dy  # coefficient of w_inv in the exponent

    exp = math.exp
    w_c = 0.0
    w_s = 0.0
    rec_steps, rec_wc, rec_ws, rec_loss = [], [], [], []
    for t in range(1, config.steps + 1):
        try:
            pref = exp(-w_c * cc)
            lo = p * exp(-bp * w_s)
            hi = q * exp(bm * w_s)
        except OverflowError as exc:
            raise SimulationOverflowError(t) from exc
        loss = pref * (lo + hi)
        if not math.isfinite(loss):
            raise SimulationOverflowError(t)
        w_s += lr * pref * (bp * lo - bm * hi)
        w_c += lr * cc * loss
        if t % config.record_every == 0 or t == config.steps:
            rec_steps.append(t)
            rec_wc.append(w_c)
            rec_ws.append(w_s)
            rec_loss.append(loss)

    steps = np.array(rec_steps, dtype=np.int64)
    w_inv = np.array(rec_wc)
    w_sp = np.array(rec_ws)
    denom = np.abs(w_inv * a)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(denom > 0, w_sp * beta / denom, 0.0)
    return TheoryTrace(
        steps=steps,
        times=steps * lr,
        w_inv=w_inv,
        w_sp=w_sp,
        ratio=ratio,
        loss=np.array(rec_loss),
        config=config,
    )
