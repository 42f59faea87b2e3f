from .config import TrainConfig
from .loops import (
    DivergenceError,
    Splits,
    TrainReport,
    evaluate,
    train_at,
    train_erm,
    train_ldat,
    train_mat,
    train_uat,
    trainer_for,
)

__all__ = [
    "DivergenceError",
    "Splits",
    "TrainConfig",
    "TrainReport",
    "evaluate",
    "train_at",
    "train_erm",
    "train_ldat",
    "train_mat",
    "train_uat",
    "trainer_for",
]
