"""Loss functions, fused forward+backward on the tape."""

from __future__ import annotations

import enum

import numpy as np

from .core import GradientTape, NonFiniteError, ShapeMismatchError, Tensor


class Loss(enum.Enum):
    SOFTMAX_CROSS_ENTROPY = "softmax-cross-entropy"
    EXPONENTIAL = "exponential"
    BINARY_LOGISTIC = "binary-logistic"


def forward_loss(
    tape: GradientTape, output: Tensor, labels: np.ndarray, loss: Loss
) -> Tensor:
    """Mean loss over the batch as a scalar tensor on ``tape``.

    ``labels`` is an integer class vector for softmax cross-entropy, and a
    vector in {-1, +1} for the exponential and binary-logistic losses, which
    both require a scalar-output model (1-D ``output``).
    """
    labels = np.asarray(labels)
    if loss is Loss.SOFTMAX_CROSS_ENTROPY:
        return _softmax_cross_entropy(tape, output, labels)
    if loss is Loss.EXPONENTIAL:
        return _margin_loss(tape, output, labels, exponential=True)
    if loss is Loss.BINARY_LOGISTIC:
        return _margin_loss(tape, output, labels, exponential=False)
    raise ValueError(f"unknown loss {loss!r}")


def _softmax_cross_entropy(tape, logits, labels):
    if logits.data.ndim != 2:
        raise ShapeMismatchError(f"softmax CE needs (batch, classes) logits, got {logits.shape}")
    n, k = logits.shape
    if labels.shape != (n,):
        raise ShapeMismatchError(f"labels shape {labels.shape} does not match batch {n}")
    labels = labels.astype(np.int64)
    if labels.min() < 0 or labels.max() >= k:
        raise ValueError(f"labels outside [0, {k})")
    shifted = logits.data - logits.data.max(axis=1, keepdims=True)
    expz = np.exp(shifted)
    zsum = expz.sum(axis=1)
    logp = shifted[np.arange(n), labels] - np.log(zsum)
    value = -logp.mean()
    probs = expz / zsum[:, None]

    def pull(g):
        d = probs.copy()
        d[np.arange(n), labels] -= 1.0
        return (float(g) / n) * d

    return tape._emit(np.asarray(value), [(logits, pull)], "softmax_cross_entropy")


def _margin_loss(tape, output, labels, *, exponential: bool):
    name = "exponential" if exponential else "binary-logistic"
    if output.data.ndim != 1:
        raise ShapeMismatchError(f"{name} loss needs scalar-output model, got {output.shape}")
    n = output.shape[0]
    if labels.shape != (n,):
        raise ShapeMismatchError(f"labels shape {labels.shape} does not match batch {n}")
    y = labels.astype(np.float64)
    if not np.all(np.abs(y) == 1.0):
        raise ValueError(f"{name} loss needs labels in {{-1, +1}}")
    margin = -y * output.data
    if exponential:
        with np.errstate(over="raise"):
            try:
                em = np.exp(margin)
            except FloatingPointError as exc:
                raise NonFiniteError("exponential loss overflow") from exc
        value = em.mean()
        coeff = -y * em / n
    else:
        value = np.logaddexp(0.0, margin).mean()
        sig = 1.0 / (1.0 + np.exp(-np.clip(margin, -700, 700)))
        coeff = -y * sig / n

    def pull(g):
        return float(g) * coeff

    return tape._emit(np.asarray(value), [(output, pull)], name)
