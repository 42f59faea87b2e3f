"""Random hyperparameter search over per-field distributions.

A search space maps TrainConfig field names to one of:

- ``("fixed", v)``
- ``("uniform", lo, hi)``        uniform on [lo, hi)
- ``("loguniform", lo, hi)``     10 ** Uniform(lo, hi); lo/hi are exponents
- ``("choice", [a, b, ...])``    uniform over the list

Draws are deterministic per (space, seed); integer-typed config fields get
rounded values.
"""

from __future__ import annotations

from dataclasses import dataclass, fields

import numpy as np

from ..train import TrainConfig

_INT_FIELDS = {
    f.name for f in fields(TrainConfig) if f.type in ("int", int)
}


def _validate_dist(name: str, dist) -> tuple:
    dist = tuple(dist)
    kind = dist[0]
    if kind == "fixed":
        if len(dist) != 2:
            raise ValueError(f"{name}: fixed takes one value")
    elif kind in ("uniform", "loguniform"):
        if len(dist) != 3 or not dist[1] < dist[2]:
            raise ValueError(f"{name}: {kind} needs lo < hi, got {dist[1:]}")
    elif kind == "choice":
        if len(dist) != 2 or not list(dist[1]):
            raise ValueError(f"{name}: choice needs a nonempty list")
        dist = (kind, tuple(dist[1]))
    else:
        raise ValueError(f"{name}: unknown distribution kind {kind!r}")
    return dist


@dataclass(frozen=True)
class SearchSpace:
    """Per-hyperparameter distributions keyed by TrainConfig field name."""

    params: dict

    def __post_init__(self):
        known = {f.name for f in fields(TrainConfig)}
        cleaned = {}
        for name, dist in self.params.items():
            if name not in known:
                raise ValueError(f"unknown TrainConfig field {name!r}")
            cleaned[name] = _validate_dist(name, dist)
        object.__setattr__(self, "params", cleaned)

    @classmethod
    def from_json(cls, obj: dict) -> "SearchSpace":
        return cls({name: tuple(dist) for name, dist in obj.items()})


def sample_trial(space: SearchSpace, seed: int) -> TrainConfig:
    """One deterministic draw from the space, merged into TrainConfig."""
    rng = np.random.default_rng(seed)
    values = {}
    for name in sorted(space.params):  # sorted: draw order independent of dict order
        kind, *args = space.params[name]
        if kind == "fixed":
            v = args[0]
        elif kind == "uniform":
            v = rng.uniform(args[0], args[1])
        elif kind == "loguniform":
            v = 10.0 ** rng.uniform(args[0], args[1])
        else:
            v = args[0][rng.integers(len(args[0]))]
        if name in _INT_FIELDS:
            v = int(round(float(v)))
        values[name] = v
    return TrainConfig.from_dict(values)
