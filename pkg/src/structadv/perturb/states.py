"""Domain-wise perturbation states and their one-step inner ascent.

Three parameterizations, all sharing one perturbation (or one mixture) per
training domain:

- ``UniversalState``: a single additive perturbation per domain;
- ``MatState``: k perturbations per domain combined by simplex-constrained
  weights;
- ``LdatState``: one perturbation per domain factored as a per-channel
  product A @ B, capping its rank at the factor width l.

Inner steps take one gradient-ascent step on the adversarial loss (batch
mean) and re-project: each MAT delta onto the l2 ball and the weights onto
the simplex; the LDAT product back into the ball by rescaling both factors.
States are immutable; steps return updated copies.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Union

import numpy as np

from ..diffcore import GradientTape, NonFiniteError, Tensor, backward, forward_loss
from .projections import project_l2_ball, project_simplex
from .samplewise import SampleWiseAttack

_NORM_TOL = 1e-9


def _as_matrix_shape(sample_shape: tuple[int, ...]) -> tuple[int, int, int]:
    """(rows, cols, channels) view of a sample shape; vectors become (d, 1, 1)."""
    if len(sample_shape) == 1:
        return sample_shape[0], 1, 1
    if len(sample_shape) == 2:
        return sample_shape[0], sample_shape[1], 1
    if len(sample_shape) == 3:
        return sample_shape
    raise ValueError(f"unsupported sample shape {sample_shape}")


@dataclass(frozen=True)
class UniversalState:
    """One shared perturbation per domain, l2-bounded."""

    deltas: np.ndarray  # (m, *sample_shape)
    epsilon: float
    gamma: float

    @classmethod
    def init(cls, m: int, sample_shape: tuple[int, ...], *, epsilon: float,
             gamma: float, rng: np.random.Generator) -> "UniversalState":
        # Draw and project through the same (k, d) stacked path as a k=1
        # MatState so the two stay bit-identical under one seed stream.
        d = int(np.prod(sample_shape))
        deltas = np.zeros((m, *sample_shape))
        if epsilon > 0:
            for e in range(m):
                draw = rng.normal(0.0, epsilon / np.sqrt(d), size=(1, d))
                draw = project_l2_ball(draw, epsilon, axis=0)
                deltas[e] = draw[0].reshape(sample_shape)
        return cls(deltas, epsilon, gamma)

    def validate(self) -> None:
        for e in range(len(self.deltas)):
            n = float(np.linalg.norm(self.deltas[e]))
            if n > self.epsilon + _NORM_TOL:
                raise ValueError(f"domain {e}: ||delta|| = {n} > {self.epsilon}")

    def combined(self, e: int) -> np.ndarray:
        return self.deltas[e]

    def to_arrays(self) -> dict[str, np.ndarray]:
        return {"deltas": self.deltas}


@dataclass(frozen=True)
class MatState:
    """k perturbations per domain with simplex-constrained mixture weights."""

    deltas: np.ndarray  # (m, k, *sample_shape)
    alphas: np.ndarray  # (m, k)
    epsilon: float
    eta: float  # weight learning rate
    gamma: float  # perturbation learning rate

    @classmethod
    def init(cls, m: int, sample_shape: tuple[int, ...], *, k: int, epsilon: float,
             eta: float, gamma: float, rng: np.random.Generator) -> "MatState":
        if k < 1:
            raise ValueError(f"k = {k} must be >= 1")
        d = int(np.prod(sample_shape))
        deltas = np.zeros((m, k, *sample_shape))
        if epsilon > 0:
            for e in range(m):
                draw = rng.normal(0.0, epsilon / np.sqrt(d), size=(k, d))
                draw = project_l2_ball(draw, epsilon, axis=0)
                deltas[e] = draw.reshape((k, *sample_shape))
        alphas = np.full((m, k), 1.0 / k)
        return cls(deltas, alphas, epsilon, eta, gamma)

    @property
    def k(self) -> int:
        return self.deltas.shape[1]

    def validate(self) -> None:
        m, k = self.alphas.shape
        for e in range(m):
            a = self.alphas[e]
            if abs(a.sum() - 1.0) > 1e-9 or np.any(a < -1e-12):
                raise ValueError(f"domain {e}: weights off the simplex (sum {a.sum()})")
            norms = np.linalg.norm(self.deltas[e].reshape(k, -1), axis=1)
            if np.any(norms > self.epsilon + _NORM_TOL):
                raise ValueError(f"domain {e}: ||delta_i|| up to {norms.max()} > {self.epsilon}")

    def to_arrays(self) -> dict[str, np.ndarray]:
        return {"deltas": self.deltas, "alphas": self.alphas}


@dataclass(frozen=True)
class LdatState:
    """One perturbation per domain factored per channel as A @ B (rank <= l)."""

    a_factors: np.ndarray  # (m, rows, l, C)
    b_factors: np.ndarray  # (m, l, cols, C)
    epsilon: float
    rho: float  # factor learning rate
    sample_shape: tuple[int, ...]

    @classmethod
    def init(cls, m: int, sample_shape: tuple[int, ...], *, l: int, epsilon: float,
             rho: float, rng: np.random.Generator, boundary_init: bool = True) -> "LdatState":
        if l < 1:
            raise ValueError(f"l = {l} must be >= 1")
        rows, cols, chans = _as_matrix_shape(tuple(sample_shape))
        a = np.zeros((m, rows, l, chans))
        b = np.zeros((m, l, cols, chans))
        if epsilon > 0:
            for e in range(m):
                if boundary_init:
                    scale = 1.0
                else:
                    scale = np.sqrt(epsilon) / np.sqrt(rows * l)
                a[e] = rng.normal(0.0, scale, size=(rows, l, chans))
                b[e] = rng.normal(0.0, scale, size=(l, cols, chans))
                prod = np.einsum("ilc,ljc->ijc", a[e], b[e])
                norm = float(np.linalg.norm(prod))
                if norm > epsilon:
                    s = np.sqrt(epsilon / norm)
                    a[e] *= s
                    b[e] *= s
        return cls(a, b, epsilon, rho, tuple(sample_shape))

    @property
    def l(self) -> int:
        return self.a_factors.shape[2]

    def product(self, e: int) -> np.ndarray:
        return np.einsum("ilc,ljc->ijc", self.a_factors[e], self.b_factors[e])

    def validate(self) -> None:
        for e in range(len(self.a_factors)):
            n = float(np.linalg.norm(self.product(e)))
            if n > self.epsilon + _NORM_TOL:
                raise ValueError(f"domain {e}: ||A@B|| = {n} > {self.epsilon}")

    def to_arrays(self) -> dict[str, np.ndarray]:
        return {"a_factors": self.a_factors, "b_factors": self.b_factors}


PerturbationState = Union[SampleWiseAttack, UniversalState, MatState, LdatState]


def mat_combined(state: MatState, e: int) -> np.ndarray:
    """Mixture perturbation for domain e; inside the ball by convexity."""
    if not 0 <= e < state.deltas.shape[0]:
        raise IndexError(f"domain index {e} out of range")
    k = state.k
    flat = state.deltas[e].reshape(k, -1)
    return (state.alphas[e] @ flat).reshape(state.deltas.shape[2:])


def ldat_combined(state: LdatState, e: int) -> np.ndarray:
    """Factored perturbation for domain e, in the sample's own shape."""
    if not 0 <= e < state.a_factors.shape[0]:
        raise IndexError(f"domain index {e} out of range")
    return state.product(e).reshape(state.sample_shape)


def _batch_mean_adversarial_grads(model, x, y, loss, watched: dict[str, Tensor],
                                  build_combined):
    """Forward on x + combined(watched), backward, return gradient arrays."""
    tape = GradientTape()
    for t in watched.values():
        tape.watch(t)
    combined = build_combined(tape)
    xadv = tape.add_rows(Tensor(np.asarray(x, dtype=np.float64)), combined)
    out = model.forward(tape, xadv)
    scalar = forward_loss(tape, out, y, loss)
    grads = backward(tape, scalar)
    result = {name: grads[t].data for name, t in watched.items()}
    for name, g in result.items():
        if not np.all(np.isfinite(g)):
            raise NonFiniteError(f"non-finite gradient for '{name}' in inner step")
    return result


def mat_inner_step(state: MatState, model, batch, e: int, loss) -> MatState:
    """One ascent step on every delta_i (rate gamma) and the weights (rate
    eta) for domain e, then re-projection; model parameters untouched."""
    x, y = batch
    k = state.k
    sample_shape = state.deltas.shape[2:]
    d = int(np.prod(sample_shape))
    deltas_t = Tensor(state.deltas[e].reshape(k, d))
    alphas_t = Tensor(state.alphas[e])

    def build(tape):
        a_row = tape.reshape(alphas_t, (1, k))
        return tape.reshape(tape.matmul(a_row, deltas_t), sample_shape)

    g = _batch_mean_adversarial_grads(
        model, np.asarray(x).reshape(len(x), *sample_shape), y, loss,
        {"deltas": deltas_t, "alphas": alphas_t}, build,
    )
    new_deltas = state.deltas.copy()
    new_alphas = state.alphas.copy()
    stepped = state.deltas[e].reshape(k, d) + state.gamma * g["deltas"]
    new_deltas[e] = project_l2_ball(stepped, state.epsilon, axis=0).reshape((k, *sample_shape))
    new_alphas[e] = project_simplex(state.alphas[e] + state.eta * g["alphas"])
    out = replace(state, deltas=new_deltas, alphas=new_alphas)
    if __debug__:
        out.validate()
    return out


def ldat_inner_step(state: LdatState, model, batch, e: int, loss) -> LdatState:
    """One ascent step on A and B (rate rho) for domain e, then the product
    is rescaled into the epsilon ball, preserving factorization and rank."""
    x, y = batch
    a_t = Tensor(state.a_factors[e])
    b_t = Tensor(state.b_factors[e])

    def build(tape):
        return tape.reshape(tape.channel_matmul(a_t, b_t), state.sample_shape)

    g = _batch_mean_adversarial_grads(model, x, y, loss, {"a": a_t, "b": b_t}, build)
    new_a = state.a_factors.copy()
    new_b = state.b_factors.copy()
    new_a[e] = state.a_factors[e] + state.rho * g["a"]
    new_b[e] = state.b_factors[e] + state.rho * g["b"]
    norm = float(np.linalg.norm(np.einsum("ilc,ljc->ijc", new_a[e], new_b[e])))
    if norm > state.epsilon * (1.0 + 1e-12):
        s = np.sqrt(state.epsilon / norm)
        new_a[e] *= s
        new_b[e] *= s
    out = replace(state, a_factors=new_a, b_factors=new_b)
    if __debug__:
        out.validate()
    return out


def uat_inner_step(state: UniversalState, model, batch, e: int, loss) -> UniversalState:
    """One ascent step on the domain's single perturbation, then projection."""
    x, y = batch
    sample_shape = state.deltas.shape[1:]
    d = int(np.prod(sample_shape))
    delta_t = Tensor(state.deltas[e].reshape(1, d))

    def build(tape):
        return tape.reshape(delta_t, sample_shape)

    g = _batch_mean_adversarial_grads(model, x, y, loss, {"delta": delta_t}, build)
    new_deltas = state.deltas.copy()
    stepped = state.deltas[e].reshape(1, d) + state.gamma * g["delta"]
    new_deltas[e] = project_l2_ball(stepped, state.epsilon, axis=0)[0].reshape(sample_shape)
    out = replace(state, deltas=new_deltas)
    if __debug__:
        out.validate()
    return out
