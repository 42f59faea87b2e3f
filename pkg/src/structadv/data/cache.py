"""Binary cache for generated datasets.

Layout: magic ``SADC`` + u32 version + u32 header length + JSON header
(domain names, shapes, dtypes, seed, generator spec) + raw arrays in header
order (xs then ys per domain), C-order, little-endian.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .types import Domain, DomainDataset

_MAGIC = b"SADC"
_VERSION = 1


def save_dataset_cache(path, ds: DomainDataset, *, seed: int = 0, spec: dict | None = None) -> None:
    header = {
        "version": _VERSION,
        "seed": seed,
        "spec": spec or {},
        "domains": [
            {
                "name": d.name,
                "correlation": d.correlation,
                "x_shape": list(d.xs.shape),
                "n": len(d),
            }
            for d in ds.domains
        ],
    }
    blob = json.dumps(header).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<II", _VERSION, len(blob)))
        fh.write(blob)
        for d in ds.domains:
            fh.write(np.ascontiguousarray(d.xs, dtype="<f8").tobytes())
            fh.write(np.ascontiguousarray(d.ys, dtype="<i8").tobytes())


def load_dataset_cache(path) -> tuple[DomainDataset, dict]:
    raw = Path(path).read_bytes()
    if raw[:4] != _MAGIC:
        raise ValueError(f"{path}: not a dataset cache file")
    version, hlen = struct.unpack("<II", raw[4:12])
    if version != _VERSION:
        raise ValueError(f"{path}: unsupported cache version {version}")
    header = json.loads(raw[12 : 12 + hlen].decode("utf-8"))
    offset = 12 + hlen
    domains = []
    for meta in header["domains"]:
        shape = tuple(meta["x_shape"])
        nbytes = int(np.prod(shape, dtype=np.int64)) * 8
        xs = np.frombuffer(raw, dtype="<f8", count=int(np.prod(shape, dtype=np.int64)), offset=offset).reshape(shape)
        offset += nbytes
        ys = np.frombuffer(raw, dtype="<i8", count=meta["n"], offset=offset)
        offset += meta["n"] * 8
        domains.append(Domain(meta["name"], xs.copy(), ys.copy(), meta["correlation"]))
    return DomainDataset(tuple(domains)), header
