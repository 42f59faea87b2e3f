"""The five training procedures as deterministic loops over domain batches.

Shared skeleton per outer step, for each domain in order: build the
adversarial batch (algorithm-specific), take one inner ascent step on the
perturbation state where the algorithm has one, recompute the adversarial
batch, then one SGD step on the model with decoupled weight decay.

Reduction contracts kept exact: with epsilon = 0 every algorithm consumes
the same seed streams and trains on bit-identical batches, so trajectories
match ERM; MAT with k = 1 matches universal AT under aligned seeds.
"""

from __future__ import annotations

import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from ..data import DomainDataset, domain_batches
from ..diffcore import GradientTape, NonFiniteError, Tensor, backward, forward_loss
from ..models.checkpoint import save_checkpoint
from ..perturb import (
    LdatState,
    MatState,
    SampleWiseAttack,
    UniversalState,
    ldat_combined,
    ldat_inner_step,
    mat_combined,
    mat_inner_step,
    pgd_attack,
    uat_inner_step,
)
from .config import TrainConfig

_TRAIN_EVAL_CAP = 2000  # train-split accuracy is computed on a fixed-size head


class DivergenceError(RuntimeError):
    """Training loss exploded or went non-finite."""


@dataclass(frozen=True)
class Splits:
    """Training domains plus the evaluation splits recorded during a run."""

    train: DomainDataset
    val: DomainDataset | None = None  # per-domain holdout of the training domains
    test: DomainDataset | None = None
    ood_val: DomainDataset | None = None  # held-out environment, neither train nor test
    test_val: DomainDataset | None = None  # validation draw from the test distribution


@dataclass
class TrainReport:
    algorithm: str
    config: dict
    loss_trace: list[float] = field(default_factory=list)  # one entry per model update
    eval_steps: list[int] = field(default_factory=list)
    accuracies: dict[str, list[float]] = field(default_factory=dict)
    wall_clock_s: float = 0.0
    final_step: int = 0
    checkpoint_path: str | None = None

    def to_json(self) -> dict:
        return {
            "algorithm": self.algorithm,
            "config": self.config,
            "loss_trace": self.loss_trace,
            "eval_steps": self.eval_steps,
            "accuracies": self.accuracies,
            "wall_clock_s": self.wall_clock_s,
            "final_step": self.final_step,
            "checkpoint_path": self.checkpoint_path,
        }

    @classmethod
    def from_json(cls, d: dict) -> "TrainReport":
        return cls(**d)


def evaluate(model, samples) -> float:
    """Fraction of correct predictions: argmax for logit outputs,
    sign for scalar-output models with labels in {-1, +1}."""
    xs, ys = _as_arrays(samples)
    if len(ys) == 0:
        raise ValueError("evaluate needs at least one sample")
    out = model.predict(xs)
    if out.ndim == 2:
        pred = out.argmax(axis=1)
        return float(np.mean(pred == ys))
    return float(np.mean(np.sign(out) == ys))


def _as_arrays(samples) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(samples, DomainDataset):
        return samples.pooled()
    if hasattr(samples, "xs"):
        return samples.xs, samples.ys
    xs, ys = samples
    return np.asarray(xs), np.asarray(ys)


def _seed_int(seq: np.random.SeedSequence) -> int:
    return int(seq.generate_state(1)[0])


def _init_state(config: TrainConfig, m: int, sample_shape, rng):
    if config.algorithm == "uat":
        return UniversalState.init(m, sample_shape, epsilon=config.epsilon,
                                   gamma=config.gamma, rng=rng)
    if config.algorithm == "mat":
        return MatState.init(m, sample_shape, k=config.k, epsilon=config.epsilon,
                             eta=config.eta, gamma=config.gamma, rng=rng)
    if config.algorithm == "ldat":
        rows = sample_shape[0]
        if config.l > rows:
            warnings.warn(
                f"LDAT factor width l={config.l} exceeds the {rows} rows of the "
                "perturbation matrix; the rank cap is vacuous (over-rank run)",
                stacklevel=3,
            )
        return LdatState.init(m, sample_shape, l=config.l, epsilon=config.epsilon,
                              rho=config.rho, rng=rng)
    return None


def _inner(config: TrainConfig, state, model, batch, e):
    if config.algorithm == "uat":
        state = uat_inner_step(state, model, batch, e, config.loss)
        return state, state.combined(e)
    if config.algorithm == "mat":
        state = mat_inner_step(state, model, batch, e, config.loss)
        return state, mat_combined(state, e)
    state = ldat_inner_step(state, model, batch, e, config.loss)
    return state, ldat_combined(state, e)


def _train(config: TrainConfig, data: Splits, model, *,
           save_checkpoint_to=None) -> TrainReport:
    t0 = time.perf_counter()
    root = np.random.SeedSequence(config.seed)
    s_model, s_batch, s_perturb, s_dropout = root.spawn(4)
    model.init_params(config.init_scheme, seed=_seed_int(s_model))
    perturb_rng = np.random.default_rng(s_perturb)
    dropout_rng = np.random.default_rng(s_dropout)

    m = len(data.train)
    sample_shape = data.train.sample_shape
    state = _init_state(config, m, sample_shape, perturb_rng)
    attack = None
    if config.algorithm == "at":
        attack = SampleWiseAttack(config.epsilon, config.gamma,
                                  steps=config.attack_steps, norm=config.attack_norm)

    batches = domain_batches(data.train, config.batch_size, seed=_seed_int(s_batch))
    report = TrainReport(algorithm=config.algorithm, config=config.to_dict())
    eval_sets = _eval_sets(data)
    for name in eval_sets:
        report.accuracies[name] = []

    for t in range(config.steps):
        for e, xb, yb in next(batches):
            try:
                if config.algorithm == "erm":
                    x_used = xb
                elif config.algorithm == "at":
                    x_used = pgd_attack(model, xb, yb, attack, config.loss)
                else:
                    state, combined = _inner(config, state, model, (xb, yb), e)
                    x_used = xb + combined
                loss_value = _model_step(config, model, x_used, yb, dropout_rng)
            except NonFiniteError as exc:
                raise DivergenceError(
                    f"{config.algorithm}: non-finite value at step {t}, domain {e}: {exc}"
                ) from exc
            if loss_value > config.divergence_limit:
                raise DivergenceError(
                    f"{config.algorithm}: loss {loss_value:.3e} exceeded "
                    f"{config.divergence_limit:.1e} at step {t}, domain {e}"
                )
            report.loss_trace.append(loss_value)
        if (t + 1) % config.eval_every == 0 or t + 1 == config.steps:
            if report.eval_steps and report.eval_steps[-1] == t + 1:
                continue
            report.eval_steps.append(t + 1)
            for name, split in eval_sets.items():
                report.accuracies[name].append(evaluate(model, split))

    report.final_step = config.steps
    report.wall_clock_s = time.perf_counter() - t0
    if save_checkpoint_to is not None:
        arrays = state.to_arrays() if state is not None else {}
        save_checkpoint(save_checkpoint_to, model, step=config.steps,
                        state_arrays=arrays, state_kind=config.algorithm)
        report.checkpoint_path = str(save_checkpoint_to)
    return report


def _eval_sets(data: Splits) -> dict:
    sets = {}
    xs, ys = data.train.pooled()
    sets["train"] = (xs[:_TRAIN_EVAL_CAP], ys[:_TRAIN_EVAL_CAP])
    if data.val is not None:
        sets["val"] = data.val
    if data.ood_val is not None:
        sets["ood_val"] = data.ood_val
    if data.test_val is not None:
        sets["test_val"] = data.test_val
    if data.test is not None:
        sets["test"] = data.test
    return sets


def _model_step(config: TrainConfig, model, x: np.ndarray, y: np.ndarray,
                dropout_rng) -> float:
    tape = GradientTape()
    model.watch(tape)
    use_dropout = config.dropout > 0.0
    out = model.forward(tape, Tensor(x), train=use_dropout,
                        rng=dropout_rng if use_dropout else None)
    scalar = forward_loss(tape, out, y, config.loss)
    grads = backward(tape, scalar)
    decay = 1.0 - config.lr * config.weight_decay
    fresh = {}
    for name, p in model.parameters().items():
        fresh[name] = Tensor(p.data * decay - config.lr * grads[p].data)
    model.set_parameters(fresh)
    return scalar.item()


def _make_trainer(algorithm: str):
    def run(config: TrainConfig, data: Splits, model, **kwargs) -> TrainReport:
        if config.algorithm != algorithm:
            raise ValueError(
                f"config.algorithm is {config.algorithm!r}, expected {algorithm!r}"
            )
        return _train(config, data, model, **kwargs)

    run.__name__ = f"train_{algorithm}"
    return run


train_erm = _make_trainer("erm")
train_at = _make_trainer("at")
train_uat = _make_trainer("uat")
train_mat = _make_trainer("mat")
train_ldat = _make_trainer("ldat")

_TRAINERS = {
    "erm": train_erm,
    "at": train_at,
    "uat": train_uat,
    "mat": train_mat,
    "ldat": train_ldat,
}


def trainer_for(algorithm: str):
    if algorithm not in _TRAINERS:
        raise ValueError(f"unknown algorithm {algorithm!r}")
    return _TRAINERS[algorithm]
