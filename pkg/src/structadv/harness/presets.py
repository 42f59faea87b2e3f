"""Built-in experiment specs and the theory-grid preset.

Desk-scale presets define their own step budgets; hyperparameters are
pinned to values tuned once for this scale rather than searched, so the
quick presets stay inside small runtime envelopes.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from ..data import SpuriousTaskSpec, generate_spurious_2d
from ..theory import (
    check_bounds,
    compute_M,
    export_trace_csv,
    make_bounds,
    simulate_gd,
    TheoryConfig,
)

EPS_SWEEP = (0.1, 0.5, 1.0, 2.0, 4.0)

THEORY_GRID_P = tuple(round(p, 2) for p in np.arange(0.55, 0.951, 0.05))
THEORY_GRID_DELTA = (-0.2, -0.1, 0.0, 0.1, 0.2)


def cmnist_quick_spec(*, seeds: int = 5, steps: int = 2000,
                      samples_per_env: int = 2000) -> dict:
    """Colored-digit preset: MLP, test-domain selection, pinned configs."""
    fixed_common = {
        "lr": ("fixed", 0.1),
        "batch_size": ("fixed", 64),
        "steps": ("fixed", steps),
        "loss": ("fixed", "softmax-cross-entropy"),
        "eval_every": ("fixed", 50),
    }
    return {
        "version": 1,
        "name": "cmnist-quick",
        "dataset": {
            "kind": "colored-mnist",
            "train_correlations": [0.9, 0.8],
            "test_correlation": 0.1,
            "label_noise": 0.25,
            "samples_per_env": samples_per_env,
            "val_fraction": 0.2,
        },
        "model": {"family": "mlp", "sizes": [392, 256, 2]},
        "selection": "test-domain",
        "allow_test_domain": True,
        "trials": 1,
        "seeds": seeds,
        "algorithms": {
            "erm": dict(fixed_common),
            "at": {**fixed_common, "epsilon": ("fixed", 0.1), "gamma": ("fixed", 0.1)},
            "mat": {**fixed_common, "epsilon": ("fixed", 5.0), "gamma": ("fixed", 3.0),
                    "eta": ("fixed", 0.01), "k": ("fixed", 15)},
            "ldat": {**fixed_common, "epsilon": ("fixed", 5.0), "rho": ("fixed", 0.3),
                     "l": ("fixed", 14)},
        },
    }


def cmnist_rank_sweep_spec(*, seeds: int = 5, steps: int = 2000,
                           samples_per_env: int = 2000) -> dict:
    """Same preset with in-range vs over-rank perturbation counts/widths."""
    spec = cmnist_quick_spec(seeds=seeds, steps=steps, samples_per_env=samples_per_env)
    spec["name"] = "cmnist-rank-sweep"
    mat = dict(spec["algorithms"]["mat"])
    ldat = dict(spec["algorithms"]["ldat"])
    spec["algorithms"] = {
        "mat-k15": {**mat, "algorithm": ("fixed", "mat")},
        "mat-k1000": {**mat, "algorithm": ("fixed", "mat"), "k": ("fixed", 1000)},
        "ldat-l14": {**ldat, "algorithm": ("fixed", "ldat")},
        "ldat-l1000": {**ldat, "algorithm": ("fixed", "ldat"), "l": ("fixed", 1000)},
    }
    return spec


def scale_sweep_spec(*, seeds: int = 3, steps: int = 400) -> dict:
    """Sample-wise vs universal perturbations across radii on the 2-feature
    correlation-shift task."""
    common = {
        "lr": ("fixed", 0.1),
        "batch_size": ("fixed", 64),
        "steps": ("fixed", steps),
        "loss": ("fixed", "binary-logistic"),
        "eval_every": ("fixed", 20),
    }
    algorithms = {"erm": dict(common)}
    for eps in EPS_SWEEP:
        algorithms[f"at-eps{eps:g}"] = {
            **common, "algorithm": ("fixed", "at"),
            "epsilon": ("fixed", eps), "gamma": ("fixed", eps),
        }
        algorithms[f"uat-eps{eps:g}"] = {
            **common, "algorithm": ("fixed", "uat"),
            "epsilon": ("fixed", eps), "gamma": ("fixed", 1.0),
        }
    return {
        "version": 1,
        "name": "scale-sweep",
        "dataset": {
            "kind": "shifted-2d",
            "train_correlations": [0.9, 0.8],
            "test_correlation": 0.1,
            "beta": 1.0,
            "n": 600,
            "noise_std": 0.1,
            "val_fraction": 0.2,
        },
        "model": {"family": "linear", "in_dim": 2, "bias": True},
        "selection": "test-domain",
        "allow_test_domain": True,
        "trials": 1,
        "seeds": seeds,
        "algorithms": algorithms,
    }


PRESETS = {
    "cmnist-quick": cmnist_quick_spec,
    "scale-sweep": scale_sweep_spec,
}


def run_theory_preset(out_dir, *, steps: int = 300_000, n_margin: int = 400,
                      export_traces: int = 4) -> dict:
    """Sweep the theory grid, check every trace against its bounds, and
    write a summary plus a few trace CSVs.

    Returns the summary dict (also written to theory_summary.json).
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    ds = generate_spurious_2d(SpuriousTaskSpec(p=0.9, beta=1.0, n=n_margin, seed=0))
    M = compute_M(ds)
    entries = []
    exported = 0
    for p in THEORY_GRID_P:
        for delta in THEORY_GRID_DELTA:
            for y in (1, -1):
                config = TheoryConfig(p=p, beta=1.0, delta=delta, y=y, steps=steps)
                trace = simulate_gd(config)
                bounds = make_bounds(p, 1.0, delta, y, M)
                report = check_bounds(trace, bounds, config)
                entries.append({
                    "p": p, "delta": delta, "y": y,
                    "w0": bounds.w0,
                    "monotonicity_lhs": bounds.monotonicity_lhs,
                    "w0_violations": len(report.w0_violations),
                    "bracket_violations": len(report.bracket_violations),
                    "pre_asymptotic": len(report.pre_asymptotic),
                    "ratio_end": report.ratio_end,
                    "ratio_decay_factor": report.ratio_decay_factor,
                })
                if exported < export_traces and y == 1 and delta in (0.0, -0.2):
                    export_trace_csv(trace, bounds,
                                     out / f"trace_p{p:g}_d{delta:g}.csv")
                    exported += 1
    summary = {
        "grid_points": len(entries),
        "margin_value_M": M,
        "total_w0_violations": sum(e["w0_violations"] for e in entries),
        "total_bracket_violations": sum(e["bracket_violations"] for e in entries),
        "entries": entries,
    }
    (out / "theory_summary.json").write_text(json.dumps(summary, indent=2))
    return summary
