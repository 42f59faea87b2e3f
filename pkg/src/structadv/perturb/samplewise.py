"""Sample-wise attacks: one-step sign ascent and its multi-step variant."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..diffcore import GradientTape, NonFiniteError, Tensor, backward, forward_loss
from .projections import project_l2_ball


@dataclass(frozen=True)
class SampleWiseAttack:
    """Per-sample perturbation budget and inner-ascent schedule."""

    epsilon: float
    gamma: float
    steps: int = 1  # 1 = one-step sign ascent
    norm: str = "l2"  # "l2" | "linf"

    def __post_init__(self):
        if self.epsilon < 0:
            raise ValueError(f"epsilon {self.epsilon} must be nonnegative")
        if self.gamma < 0:
            raise ValueError(f"gamma {self.gamma} must be nonnegative")
        if self.steps < 1:
            raise ValueError(f"steps {self.steps} must be >= 1")
        if self.norm not in ("l2", "linf"):
            raise ValueError(f"norm must be 'l2' or 'linf', got {self.norm!r}")


def fgsm_step(x: np.ndarray, grad_x: np.ndarray, epsilon: float) -> np.ndarray:
    """x + epsilon * sign(grad_x), with sign(0) = 0."""
    x = np.asarray(x, dtype=np.float64)
    g = np.asarray(grad_x, dtype=np.float64)
    if x.shape != g.shape:
        raise ValueError(f"shape mismatch: x {x.shape} vs grad {g.shape}")
    return x + epsilon * np.sign(g)


def pgd_attack(model, x: np.ndarray, y: np.ndarray, attack: SampleWiseAttack, loss) -> np.ndarray:
    """Iterated sign ascent with per-sample projection of the cumulative
    perturbation onto the epsilon ball after each step."""
    if attack.epsilon == 0.0:
        return x
    x = np.asarray(x, dtype=np.float64)
    adv = x
    for _ in range(attack.steps):
        tape = GradientTape()
        xt = Tensor(adv)
        tape.watch(xt)
        out = model.forward(tape, xt)
        scalar = forward_loss(tape, out, y, loss)
        if not np.isfinite(scalar.item()):
            raise NonFiniteError("non-finite loss during attack iteration")
        g = backward(tape, scalar)[xt].data
        stepped = adv + attack.gamma * np.sign(g)
        pert = stepped - x
        if attack.norm == "linf":
            pert = np.clip(pert, -attack.epsilon, attack.epsilon)
        else:
            flat = pert.reshape(len(pert), -1)
            flat = project_l2_ball(flat, attack.epsilon, axis=0)
            pert = flat.reshape(pert.shape)
        adv = x + pert
    return adv
