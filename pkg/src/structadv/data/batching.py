"""Domain-grouped batching: one batch per domain per outer step."""

from __future__ import annotations

from collections.abc import Iterator

import numpy as np

from .types import DomainDataset


def domain_batches(
    ds: DomainDataset, batch: int, seed: int = 0
) -> Iterator[list[tuple[int, np.ndarray, np.ndarray]]]:
    """Infinite iterator of rounds; each round holds one batch per domain.

    Domains are visited in order e = 1..m within a round.  Within a domain,
    an epoch is a seeded shuffle cut into consecutive batches with the final
    short batch retained; a fresh shuffle starts when the epoch runs out.
    Deterministic per (dataset, batch, seed).
    """
    if batch < 1:
        raise ValueError(f"batch size {batch} must be >= 1")
    rngs = [np.random.default_rng([seed, e]) for e in range(len(ds))]
    queues: list[list[np.ndarray]] = [[] for _ in range(len(ds))]

    def refill(e: int) -> None:
        order = rngs[e].permutation(len(ds[e]))
        queues[e] = [order[i : i + batch] for i in range(0, len(order), batch)]

    while True:
        round_batches = []
        for e in range(len(ds)):
            if not queues[e]:
                refill(e)
            idx = queues[e].pop(0)
            round_batches.append((e, ds[e].xs[idx], ds[e].ys[idx]))
        yield round_batches
