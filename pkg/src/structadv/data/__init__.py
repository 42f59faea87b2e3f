from .batching import domain_batches
from .cache import load_dataset_cache, save_dataset_cache
from .generators import (
    ColoredMnistSpec,
    ShiftedTaskSpec,
    SpuriousTaskSpec,
    generate_colored_mnist,
    generate_shifted_2d,
    generate_spurious_2d,
    synthetic_digit_base,
)
from .idx import IdxFormatError, load_mnist_idx, read_idx, write_idx
from .types import Domain, DomainDataset, LabeledSample, split_train_val

__all__ = [
    "ColoredMnistSpec",
    "Domain",
    "DomainDataset",
    "IdxFormatError",
    "LabeledSample",
    "ShiftedTaskSpec",
    "SpuriousTaskSpec",
    "domain_batches",
    "generate_colored_mnist",
    "generate_shifted_2d",
    "generate_spurious_2d",
    "load_dataset_cache",
    "load_mnist_idx",
    "read_idx",
    "save_dataset_cache",
    "split_train_val",
    "synthetic_digit_base",
    "write_idx",
]
