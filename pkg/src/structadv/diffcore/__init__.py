from .core import (
    GradientTape,
    NonFiniteError,
    ShapeMismatchError,
    Tensor,
    backward,
)
from .gradcheck import finite_diff_grad
from .losses import Loss, forward_loss

__all__ = [
    "GradientTape",
    "Loss",
    "NonFiniteError",
    "ShapeMismatchError",
    "Tensor",
    "backward",
    "finite_diff_grad",
    "forward_loss",
]
