"""Labeled samples grouped by training domain."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class LabeledSample:
    """One input with its label; images are HxWxC in [0, 1]."""

    x: np.ndarray
    y: int


@dataclass(frozen=True)
class Domain:
    """All samples of one training domain, stacked for vectorized access."""

    name: str
    xs: np.ndarray  # (n, *sample_shape)
    ys: np.ndarray  # (n,), int
    correlation: float | None = None  # spurious-correlation strength, if meaningful

    def __post_init__(self):
        if len(self.xs) == 0:
            raise ValueError(f"domain '{self.name}' is empty")
        if len(self.xs) != len(self.ys):
            raise ValueError(f"domain '{self.name}': {len(self.xs)} inputs, {len(self.ys)} labels")

    def __len__(self) -> int:
        return len(self.ys)

    @property
    def sample_shape(self) -> tuple[int, ...]:
        return self.xs.shape[1:]

    def samples(self) -> list[LabeledSample]:
        return [LabeledSample(x, int(y)) for x, y in zip(self.xs, self.ys)]


@dataclass(frozen=True)
class DomainDataset:
    """Ordered list of domains with consistent sample shapes."""

    domains: tuple[Domain, ...]

    def __post_init__(self):
        if not self.domains:
            raise ValueError("dataset needs at least one domain")
        shapes = {d.sample_shape for d in self.domains}
        if len(shapes) != 1:
            raise ValueError(f"inconsistent sample shapes across domains: {shapes}")
        object.__setattr__(self, "domains", tuple(self.domains))

    def __len__(self) -> int:
        return len(self.domains)

    def __getitem__(self, e: int) -> Domain:
        return self.domains[e]

    @property
    def sample_shape(self) -> tuple[int, ...]:
        return self.domains[0].sample_shape

    def pooled(self) -> tuple[np.ndarray, np.ndarray]:
        xs = np.concatenate([d.xs for d in self.domains])
        ys = np.concatenate([d.ys for d in self.domains])
        return xs, ys


def split_train_val(
    ds: DomainDataset, val_fraction: float = 0.2, seed: int = 0
) -> tuple[DomainDataset, DomainDataset]:
    """Per-domain holdout split for training-domain validation.

    Takes ``val_fraction`` of each domain (at least 1 sample), chosen by a
    seeded shuffle, and returns (train, val) datasets with matching domains.
    """
    if not 0.0 < val_fraction < 1.0:
        raise ValueError(f"val_fraction {val_fraction} outside (0, 1)")
    rng = np.random.default_rng(seed)
    train_doms, val_doms = [], []
    for d in ds.domains:
        n = len(d)
        n_val = max(1, int(round(val_fraction * n)))
        if n_val >= n:
            raise ValueError(f"domain '{d.name}' too small to split ({n} samples)")
        perm = rng.permutation(n)
        val_idx, train_idx = perm[:n_val], perm[n_val:]
        train_doms.append(Domain(d.name, d.xs[train_idx], d.ys[train_idx], d.correlation))
        val_doms.append(Domain(d.name, d.xs[val_idx], d.ys[val_idx], d.correlation))
    return DomainDataset(tuple(train_doms)), DomainDataset(tuple(val_doms))
