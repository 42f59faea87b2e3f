"""MNIST IDX binary format: big-endian magic, dims, raw bytes."""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .types import LabeledSample

_IMAGE_MAGIC = 2051
_LABEL_MAGIC = 2049


class IdxFormatError(ValueError):
    """Malformed IDX file (bad magic, truncation, or count mismatch)."""


def read_idx(path) -> np.ndarray:
    """Read one IDX file into an array (uint8 payload)."""
    raw = Path(path).read_bytes()
    if len(raw) < 4:
        raise IdxFormatError(f"{path}: truncated header")
    (magic,) = struct.unpack(">i", raw[:4])
    if magic == _IMAGE_MAGIC:
        ndim = 3
    elif magic == _LABEL_MAGIC:
        ndim = 1
    else:
        raise IdxFormatError(f"{path}: bad magic 0x{magic & 0xFFFFFFFF:08x}")
    header = 4 + 4 * ndim
    if len(raw) < header:
        raise IdxFormatError(f"{path}: truncated dimension header")
    dims = struct.unpack(f">{ndim}i", raw[4:header])
    count = int(np.prod(dims, dtype=np.int64))
    if len(raw) - header < count:
        raise IdxFormatError(f"{path}: truncated payload ({len(raw) - header} of {count} bytes)")
    return np.frombuffer(raw, dtype=np.uint8, offset=header, count=count).reshape(dims)


def write_idx(path, array: np.ndarray) -> None:
    """Write a uint8 array as IDX: 1-D arrays as labels, 3-D as images."""
    arr = np.ascontiguousarray(array, dtype=np.uint8)
    if arr.ndim == 1:
        magic = _LABEL_MAGIC
    elif arr.ndim == 3:
        magic = _IMAGE_MAGIC
    else:
        raise IdxFormatError(f"cannot write array of ndim {arr.ndim} as IDX")
    with open(path, "wb") as fh:
        fh.write(struct.pack(">i", magic))
        fh.write(struct.pack(f">{arr.ndim}i", *arr.shape))
        fh.write(arr.tobytes())


def load_mnist_idx(images_path, labels_path) -> list[LabeledSample]:
    """Paired image/label IDX files as samples with pixels scaled to [0, 1]."""
    images = read_idx(images_path)
    labels = read_idx(labels_path)
    if images.ndim != 3:
        raise IdxFormatError(f"{images_path}: expected an image file")
    if labels.ndim != 1:
        raise IdxFormatError(f"{labels_path}: expected a label file")
    if len(images) != len(labels):
        raise IdxFormatError(
            f"count mismatch: {len(images)} images vs {len(labels)} labels"
        )
    scaled = images.astype(np.float64) / 255.0
    return [LabeledSample(x, int(y)) for x, y in zip(scaled, labels)]
