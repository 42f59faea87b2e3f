"""Hyperparameter container shared by all five training procedures."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

from ..diffcore import Loss

ALGORITHMS = ("erm", "at", "uat", "mat", "ldat")


@dataclass(frozen=True)
class TrainConfig:
    algorithm: str = "erm"
    lr: float = 0.1  # model learning rate r
    batch_size: int = 64  # b
    steps: int = 2000  # T outer iterations (one batch per domain each)
    epsilon: float = 0.0  # perturbation radius
    gamma: float = 0.0  # perturbation step size (AT/UAT/MAT)
    eta: float = 0.0  # MAT weight learning rate
    rho: float = 0.0  # LDAT factor learning rate
    k: int = 1  # MAT perturbation count
    l: int = 1  # LDAT factor width
    weight_decay: float = 0.0
    dropout: float = 0.0
    seed: int = 0
    loss: Loss = Loss.SOFTMAX_CROSS_ENTROPY
    attack_steps: int = 1  # sample-wise AT: 1 = one-step sign ascent
    attack_norm: str = "l2"
    eval_every: int = 50  # accuracy recording cadence, in outer steps
    init_scheme: str = "uniform-kaiming"
    divergence_limit: float = 1e6

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"algorithm {self.algorithm!r} not in {ALGORITHMS}")
        if self.lr < 0 or self.batch_size < 1 or self.steps < 1:
            raise ValueError("lr must be >= 0, batch_size and steps >= 1")
        if self.epsilon < 0:
            raise ValueError(f"epsilon {self.epsilon} must be nonnegative")
        if self.k < 1:
            raise ValueError(f"k = {self.k} must be >= 1")
        if self.l < 1:
            raise ValueError(f"l = {self.l} must be >= 1")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError(f"dropout {self.dropout} outside [0, 1)")
        if self.eval_every < 1:
            raise ValueError("eval_every must be >= 1")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["loss"] = self.loss.value
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "TrainConfig":
        d = dict(d)
        if isinstance(d.get("loss"), str):
            d["loss"] = Loss(d["loss"])
        return cls(**d)
