"""Experiment runner: algorithms x trials x seeds, selection, aggregation.

An experiment spec is a plain JSON-able dict (see README for the schema):
dataset recipe, model recipe, per-algorithm search spaces, trial/seed
counts, and the model-selection strategy.  Every random draw derives from
one root seed through named SeedSequence spawn keys, so runs are
reproducible number-for-number and per-trial seeds are isolated.
"""

from __future__ import annotations

import dataclasses
import json
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..data import (
    ColoredMnistSpec,
    ShiftedTaskSpec,
    SpuriousTaskSpec,
    generate_colored_mnist,
    generate_shifted_2d,
    generate_spurious_2d,
    load_mnist_idx,
    split_train_val,
    synthetic_digit_base,
)
from ..data.types import DomainDataset
from ..models import model_from_family
from ..train import Splits, TrainConfig, trainer_for
from .search import SearchSpace, sample_trial
from .selection import SelectionStrategy, selection_from_report

_SPAWN_DATA = 0xD0
_SPAWN_TRIAL = 0x71
_SPAWN_RUN = 0x55


@dataclass
class ExperimentResult:
    name: str
    rows: list[dict] = field(default_factory=list)  # one per (algo, trial, seed)
    aggregates: list[dict] = field(default_factory=list)  # one per algorithm
    failures: list[dict] = field(default_factory=list)
    spec: dict = field(default_factory=dict)
    root_seed: int = 0

    def aggregate_for(self, algorithm: str) -> dict:
        for agg in self.aggregates:
            if agg["algorithm"] == algorithm:
                return agg
        raise KeyError(f"no aggregate for {algorithm!r}")


def _derive_seed(root: int, *key: int) -> int:
    return int(np.random.SeedSequence(entropy=root, spawn_key=key).generate_state(1)[0])


def build_splits(dataset_spec: dict, seed: int) -> Splits:
    """Materialize the experiment's Splits from a dataset recipe."""
    kind = dataset_spec["kind"]
    if kind == "colored-mnist":
        return _colored_mnist_splits(dataset_spec, seed)
    if kind == "shifted-2d":
        return _shifted_2d_splits(dataset_spec, seed)
    if kind == "spurious-2d":
        ds = generate_spurious_2d(SpuriousTaskSpec(
            p=dataset_spec["p"], beta=dataset_spec.get("beta", 1.0),
            n=dataset_spec["n"], seed=seed,
            bernoulli=dataset_spec.get("bernoulli", False)))
        return Splits(train=ds)
    raise ValueError(f"unknown dataset kind {kind!r}")


def _colored_mnist_splits(spec: dict, seed: int) -> Splits:
    train_corrs = list(spec.get("train_correlations", [0.9, 0.8]))
    test_corr = float(spec.get("test_correlation", 0.1))
    ood_corr = spec.get("ood_correlation")  # optional held-out environment
    n = int(spec.get("samples_per_env", 2000))
    noise = float(spec.get("label_noise", 0.25))
    # environment order: train envs, test-val draw, test draw, optional ood
    corrs = [*train_corrs, test_corr, test_corr]
    if ood_corr is not None:
        corrs.append(float(ood_corr))
    if "idx_images" in spec:
        base = load_mnist_idx(spec["idx_images"], spec["idx_labels"])
    else:
        base = synthetic_digit_base(n * len(corrs), seed=_derive_seed(seed, 1))
    cm = ColoredMnistSpec(
        correlations=tuple(corrs), label_noise=noise, samples_per_env=n,
        seed=_derive_seed(seed, 2), downsample=bool(spec.get("downsample", True)))
    ds = generate_colored_mnist(cm, base)
    m = len(train_corrs)
    train = DomainDataset(ds.domains[:m])
    train, val = split_train_val(train, spec.get("val_fraction", 0.2),
                                 seed=_derive_seed(seed, 3))
    test_val = DomainDataset((ds.domains[m],))
    test = DomainDataset((ds.domains[m + 1],))
    ood = DomainDataset((ds.domains[m + 2],)) if ood_corr is not None else None
    return Splits(train=train, val=val, test=test, ood_val=ood, test_val=test_val)


def _shifted_2d_splits(spec: dict, seed: int) -> Splits:
    task = ShiftedTaskSpec(
        train_correlations=tuple(spec.get("train_correlations", (0.9, 0.8))),
        test_correlation=float(spec.get("test_correlation", 0.1)),
        beta=float(spec.get("beta", 1.0)),
        n=int(spec.get("n", 500)),
        noise_std=float(spec.get("noise_std", 0.1)),
        seed=_derive_seed(seed, 1),
    )
    train, test = generate_shifted_2d(task)
    train, val = split_train_val(train, spec.get("val_fraction", 0.2),
                                 seed=_derive_seed(seed, 2))
    # separate test-distribution draw for selection
    task_val = dataclasses.replace(task, seed=_derive_seed(seed, 3))
    _, test_val = generate_shifted_2d(task_val)
    return Splits(train=train, val=val, test=test, test_val=test_val)


def build_model(model_spec: dict):
    kwargs = {k: v for k, v in model_spec.items() if k != "family"}
    for key in ("sizes", "input_hw", "conv_channels"):
        if key in kwargs:
            kwargs[key] = tuple(kwargs[key])
    return model_from_family(model_spec["family"], **kwargs)


def run_one(spec: dict, name: str, trial: int, seed_idx: int, root_seed: int) -> dict:
    """Train one (config-name, trial, seed) cell and select its checkpoint.

    A key of the ``algorithms`` dict is normally an algorithm tag; a key
    that is not one must pin the actual algorithm inside its search space
    (e.g. two differently named MAT configurations).
    """
    space = SearchSpace.from_json(spec["algorithms"][name])
    trial_seed = _derive_seed(root_seed, _SPAWN_TRIAL, _algo_id(spec, name), trial)
    config = sample_trial(space, trial_seed)
    run_seed = _derive_seed(root_seed, _SPAWN_RUN, _algo_id(spec, name), trial, seed_idx)
    if "algorithm" not in space.params:
        config = dataclasses.replace(config, algorithm=name)
    config = dataclasses.replace(config, seed=run_seed)
    data_seed = _derive_seed(root_seed, _SPAWN_DATA, seed_idx)
    data = build_splits(spec["dataset"], data_seed)
    model = build_model(spec["model"])
    report = trainer_for(config.algorithm)(config, data, model)
    strategy = SelectionStrategy(spec.get("selection", "training-domain"))
    chosen = selection_from_report(
        report, strategy, allow_test_domain=bool(spec.get("allow_test_domain", False)))
    return {
        "algorithm": name,
        "dataset": spec["dataset"]["kind"],
        "trial": trial,
        "seed": seed_idx,
        "selected_step": chosen.step,
        "val_acc": chosen.val_acc,
        "test_acc": chosen.test_acc,
    }


def _algo_id(spec: dict, algorithm: str) -> int:
    return sorted(spec["algorithms"]).index(algorithm)


def _run_cell(args):
    spec, algorithm, trial, seed_idx, root_seed = args
    try:
        return run_one(spec, algorithm, trial, seed_idx, root_seed), None
    except Exception as exc:  # recorded, never silently dropped
        failure = {"algorithm": algorithm, "trial": trial, "seed": seed_idx,
                   "error": f"{type(exc).__name__}: {exc}"}
        return None, failure


def run_experiment(spec, *, root_seed: int | None = None, jobs: int = 1,
                   algorithms: list[str] | None = None) -> ExperimentResult:
    """Train/select/evaluate every (algorithm, trial, seed) cell.

    Per seed, each algorithm keeps its best trial by the selection
    strategy's validation accuracy; aggregates report mean and standard
    error of the selected test accuracies across seeds.  Failed cells are
    recorded in ``failures`` and excluded from aggregation with a warning.
    """
    if isinstance(spec, (str, Path)):
        spec = json.loads(Path(spec).read_text())
    root_seed = int(spec.get("root_seed", 0)) if root_seed is None else int(root_seed)
    algos = algorithms or sorted(spec["algorithms"])
    for a in algos:
        if a not in spec["algorithms"]:
            raise ValueError(f"algorithm {a!r} not in experiment spec")
    n_trials = int(spec.get("trials", 1))
    n_seeds = int(spec.get("seeds", 3))
    cells = [(spec, a, t, s, root_seed)
             for a in algos for t in range(n_trials) for s in range(n_seeds)]

    result = ExperimentResult(name=spec.get("name", "experiment"), spec=spec,
                              root_seed=root_seed)
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_run_cell, cells))
    else:
        outcomes = [_run_cell(c) for c in cells]
    for row, failure in outcomes:
        if failure is not None:
            warnings.warn(f"trial failed and is excluded: {failure}", stacklevel=2)
            result.failures.append(failure)
        else:
            result.rows.append(row)
    result.rows.sort(key=lambda r: (r["algorithm"], r["trial"], r["seed"]))

    for a in algos:
        rows = [r for r in result.rows if r["algorithm"] == a]
        per_seed_best = {}
        for r in rows:
            cur = per_seed_best.get(r["seed"])
            if cur is None or r["val_acc"] > cur["val_acc"]:
                per_seed_best[r["seed"]] = r
        accs = [per_seed_best[s]["test_acc"] for s in sorted(per_seed_best)]
        agg = {"algorithm": a, "dataset": spec["dataset"]["kind"],
               "n_seeds": len(accs)}
        if accs:
            agg["mean"] = float(np.mean(accs))
            agg["stderr"] = (float(np.std(accs, ddof=1) / np.sqrt(len(accs)))
                             if len(accs) >= 2 else float("nan"))
        result.aggregates.append(agg)
    return result
