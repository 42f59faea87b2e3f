from .checkpoint import load_checkpoint, save_checkpoint
from .families import LinearClassifier, Mlp, SmallCnn, model_from_family

__all__ = [
    "LinearClassifier",
    "Mlp",
    "SmallCnn",
    "load_checkpoint",
    "model_from_family",
    "save_checkpoint",
]
