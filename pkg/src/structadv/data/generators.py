"""Synthetic dataset generators.

Three tasks:

- a 2-feature task with an invariant feature equal to the label and a
  spurious feature correlated with it at strength ``p``;
- a multi-domain variant of the same task whose test domain reverses the
  correlation (used for perturbation-scale sweeps);
- a colored-digit task: two-channel images where the digit is painted into
  the channel that agrees with the (possibly noise-flipped) binary label
  with a per-environment correlation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .types import Domain, DomainDataset, LabeledSample


@dataclass(frozen=True)
class SpuriousTaskSpec:
    """2-feature task: x = (x_inv, x_sp) with x_inv = y, x_sp = +/- beta."""

    p: float  # correlation strength in [0.5, 1)
    beta: float  # spurious feature magnitude
    n: int  # samples in the domain
    seed: int = 0
    bernoulli: bool = False  # draw majority membership instead of exact counts

    def __post_init__(self):
        if not 0.5 <= self.p < 1.0:
            raise ValueError(f"p={self.p} outside [0.5, 1)")
        if self.beta <= 0:
            raise ValueError(f"beta={self.beta} must be positive")
        if self.n < 2:
            raise ValueError(f"n={self.n}; need at least 2 samples")


def generate_spurious_2d(spec: SpuriousTaskSpec) -> DomainDataset:
    """One domain of n samples from the four quadrants {-1,+1} x {-beta,+beta}.

    By default exactly floor(p*n) samples have x_sp agreeing with the label
    (x_sp * y > 0), so the realized correlation is floor(p*n)/n with no
    sampling noise; ``bernoulli=True`` draws membership instead.
    """
    rng = np.random.default_rng(spec.seed)
    n = spec.n
    ys = np.empty(n, dtype=np.int64)
    ys[: n // 2] = 1
    ys[n // 2 :] = -1
    rng.shuffle(ys)
    if spec.bernoulli:
        majority = rng.random(n) < spec.p
    else:
        majority = np.zeros(n, dtype=bool)
        majority[: int(np.floor(spec.p * n))] = True
        rng.shuffle(majority)
    x_inv = ys.astype(np.float64)
    x_sp = np.where(majority, ys, -ys) * spec.beta
    xs = np.stack([x_inv, x_sp], axis=1)
    dom = Domain("spurious-2d", xs, ys, correlation=spec.p)
    return DomainDataset((dom,))


@dataclass(frozen=True)
class ShiftedTaskSpec:
    """Multi-domain 2-feature task whose test domain reverses the correlation."""

    train_correlations: tuple[float, ...] = (0.9, 0.8)
    test_correlation: float = 0.1
    beta: float = 1.0
    n: int = 500
    noise_std: float = 0.1  # jitter on both features
    seed: int = 0

    def __post_init__(self):
        for c in (*self.train_correlations, self.test_correlation):
            if not 0.0 <= c <= 1.0:
                raise ValueError(f"correlation {c} outside [0, 1]")
        if self.beta <= 0 or self.n < 2:
            raise ValueError("beta must be positive and n >= 2")


def generate_shifted_2d(spec: ShiftedTaskSpec) -> tuple[DomainDataset, DomainDataset]:
    """(train, test) datasets; correlations are realized by Bernoulli draws."""
    rng = np.random.default_rng(spec.seed)

    def one(name, corr):
        n = spec.n
        ys = np.where(rng.random(n) < 0.5, 1, -1).astype(np.int64)
        agree = rng.random(n) < corr
        x_inv = ys + rng.normal(0.0, spec.noise_std, n)
        x_sp = np.where(agree, ys, -ys) * spec.beta + rng.normal(0.0, spec.noise_std, n)
        return Domain(name, np.stack([x_inv, x_sp], 1), ys, correlation=corr)

    train = DomainDataset(
        tuple(one(f"train-{i}", c) for i, c in enumerate(spec.train_correlations))
    )
    test = DomainDataset((one("test", spec.test_correlation),))
    return train, test


@dataclass(frozen=True)
class ColoredMnistSpec:
    """Two-channel colored-digit environments.

    ``correlations`` lists P(colored channel == label) per environment;
    the binary label is (digit < 5), flipped with ``label_noise``.
    """

    correlations: tuple[float, ...] = (0.9, 0.8, 0.1)
    label_noise: float = 0.25
    samples_per_env: int = 2000
    seed: int = 0
    downsample: bool = True  # 28x28 -> 14x14 by stride-2 subsampling

    def __post_init__(self):
        for c in self.correlations:
            if not 0.0 <= c <= 1.0:
                raise ValueError(f"correlation {c} outside [0, 1]")
        if not 0.0 <= self.label_noise <= 0.5:
            raise ValueError(f"label_noise {self.label_noise} outside [0, 0.5]")
        if self.samples_per_env < 1:
            raise ValueError("samples_per_env must be positive")


def generate_colored_mnist(
    spec: ColoredMnistSpec, base: list[LabeledSample]
) -> DomainDataset:
    """One output domain per correlation entry, built from grayscale digits.

    Per sample: binary label = (digit < 5), flipped with the noise rate; the
    digit is painted into color channel ``label`` with the environment's
    correlation probability, else into the other channel.  Base samples are
    consumed in disjoint chunks after a seeded shuffle.
    """
    if not base:
        raise ValueError("base digit list is empty")
    total = spec.samples_per_env * len(spec.correlations)
    if total > len(base):
        raise ValueError(f"requested {total} samples but base has only {len(base)}")
    rng = np.random.default_rng(spec.seed)
    order = rng.permutation(len(base))
    domains = []
    for i, corr in enumerate(spec.correlations):
        idx = order[i * spec.samples_per_env : (i + 1) * spec.samples_per_env]
        gray = np.stack([base[j].x for j in idx]).astype(np.float64)
        digits = np.array([base[j].y for j in idx])
        if spec.downsample:
            gray = gray[:, ::2, ::2]
        n, h, w = gray.shape
        y0 = (digits < 5).astype(np.int64)
        flip = rng.random(n) < spec.label_noise
        ys = np.where(flip, 1 - y0, y0)
        agree = rng.random(n) < corr
        color = np.where(agree, ys, 1 - ys)
        imgs = np.zeros((n, h, w, 2), dtype=np.float64)
        imgs[color == 0, :, :, 0] = gray[color == 0]
        imgs[color == 1, :, :, 1] = gray[color == 1]
        domains.append(Domain(f"env-{i}-corr-{corr:g}", imgs, ys, correlation=corr))
    return DomainDataset(tuple(domains))


_TEMPLATE_SEED = 0x5EED  # class shapes are a fixed property of the generator


def synthetic_digit_base(
    n: int, seed: int = 0, *, image_size: int = 28, noise_std: float = 0.35
) -> list[LabeledSample]:
    """Digit-like grayscale base when no real MNIST files are available.

    Ten fixed blob-shaped class templates (shared across seeds, like real
    digit shapes are); samples vary by class draw, intensity, and pixel
    noise from ``seed``.  Pixels lie in [0, 1].
    """
    if n < 1:
        raise ValueError("n must be positive")
    trng = np.random.default_rng(_TEMPLATE_SEED)
    templates = []
    for _ in range(10):
        t = trng.random((image_size, image_size))
        for _ in range(3):  # box blur -> blobby strokes
            t = (
                t
                + np.roll(t, 1, 0)
                + np.roll(t, -1, 0)
                + np.roll(t, 1, 1)
                + np.roll(t, -1, 1)
            ) / 5.0
        t = (t - t.min()) / (t.max() - t.min())
        templates.append(np.where(t > 0.55, t, 0.0))
    templates = np.stack(templates)

    rng = np.random.default_rng(seed)
    digits = rng.integers(0, 10, size=n)
    intensity = rng.uniform(0.7, 1.0, size=n)[:, None, None]
    xs = templates[digits] * intensity + rng.normal(0.0, noise_std, (n, image_size, image_size))
    xs = np.clip(xs, 0.0, 1.0)
    return [LabeledSample(x, int(d)) for x, d in zip(xs, digits)]
