"""Checkpoint format for models, optionally with a perturbation state.

Layout: magic ``SACK`` + u32 version + u32 header length + JSON header
(family tag, constructor kwargs, parameter names/shapes, training step,
state section metadata) + flat float64 parameter arrays in header order,
little-endian, then state arrays in header order.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from ..diffcore import Tensor
from .families import model_from_family

_MAGIC = b"SACK"
_VERSION = 1


def save_checkpoint(path, model, step: int = 0, *, model_kwargs: dict | None = None,
                    state_arrays: dict[str, np.ndarray] | None = None,
                    state_kind: str | None = None) -> None:
    params = model.parameters()
    state_arrays = state_arrays or {}
    header = {
        "version": _VERSION,
        "family": model.family,
        "model_kwargs": model_kwargs or {},
        "step": int(step),
        "params": [{"name": k, "shape": list(v.shape)} for k, v in params.items()],
        "state_kind": state_kind,
        "state": [{"name": k, "shape": list(np.asarray(v).shape)} for k, v in state_arrays.items()],
    }
    blob = json.dumps(header).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<II", _VERSION, len(blob)))
        fh.write(blob)
        for v in params.values():
            fh.write(np.ascontiguousarray(v.data, dtype="<f8").tobytes())
        for v in state_arrays.values():
            fh.write(np.ascontiguousarray(v, dtype="<f8").tobytes())


def load_checkpoint(path):
    """Returns (model, step, state_kind, state_arrays)."""
    raw = Path(path).read_bytes()
    if raw[:4] != _MAGIC:
        raise ValueError(f"{path}: not a checkpoint file")
    version, hlen = struct.unpack("<II", raw[4:12])
    if version != _VERSION:
        raise ValueError(f"{path}: unsupported checkpoint version {version}")
    header = json.loads(raw[12 : 12 + hlen].decode("utf-8"))
    kwargs = dict(header["model_kwargs"])
    for key in ("sizes", "input_hw", "conv_channels"):
        if key in kwargs:
            kwargs[key] = tuple(kwargs[key])
    model = model_from_family(header["family"], **kwargs)
    offset = 12 + hlen

    def take(shape):
        nonlocal offset
        count = int(np.prod(shape, dtype=np.int64)) if shape else 1
        arr = np.frombuffer(raw, dtype="<f8", count=count, offset=offset)
        offset += count * 8
        return arr.reshape(shape).copy()

    params = {p["name"]: Tensor(take(tuple(p["shape"]))) for p in header["params"]}
    model.set_parameters(params)
    state_arrays = {s["name"]: take(tuple(s["shape"])) for s in header["state"]}
    return model, header["step"], header.get("state_kind"), state_arrays
