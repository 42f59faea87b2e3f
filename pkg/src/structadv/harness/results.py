"""Result persistence: versioned CSV and JSON, timestamps kept separate."""

from __future__ import annotations

import csv
import json
import time
from pathlib import Path

from .experiment import ExperimentResult

SCHEMA = "structadv-results-v1"
_COLUMNS = ["algorithm", "dataset", "trial", "seed", "selected_step", "val_acc", "test_acc"]
_AGG_COLUMNS = ["algorithm", "dataset", "n_seeds", "mean", "stderr"]


def emit_results(result: ExperimentResult, out_dir, formats=("csv", "json")) -> list[Path]:
    """Write results.csv / aggregate.csv / results.json plus metadata.json.

    Output bytes are a pure function of the result contents; wall-clock
    information lives only in metadata.json.
    """
    if not result.rows:
        raise ValueError("no successful rows to emit")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    if "csv" in formats:
        path = out / "results.csv"
        with open(path, "w", newline="") as fh:
            fh.write(f"# schema: {SCHEMA}\n")
            writer = csv.DictWriter(fh, fieldnames=_COLUMNS)
            writer.writeheader()
            writer.writerows({k: row[k] for k in _COLUMNS} for row in result.rows)
        written.append(path)
        agg_path = out / "aggregate.csv"
        with open(agg_path, "w", newline="") as fh:
            fh.write(f"# schema: {SCHEMA}\n")
            writer = csv.DictWriter(fh, fieldnames=_AGG_COLUMNS)
            writer.writeheader()
            writer.writerows({k: agg.get(k, "") for k in _AGG_COLUMNS}
                             for agg in result.aggregates)
        written.append(agg_path)
    if "json" in formats:
        path = out / "results.json"
        payload = {
            "schema": SCHEMA,
            "name": result.name,
            "root_seed": result.root_seed,
            "rows": result.rows,
            "aggregates": result.aggregates,
            "failures": result.failures,
        }
        path.write_text(json.dumps(payload, indent=2, sort_keys=True))
        written.append(path)
    meta = out / "metadata.json"
    meta.write_text(json.dumps({
        "written_at": time.strftime("%Y-%m-%dT%H:%M:%S"),
        "n_rows": len(result.rows),
        "n_failures": len(result.failures),
        "failures": result.failures,
    }, indent=2))
    return written


def load_results_csv(path) -> list[dict]:
    """Reparse results.csv into row dicts (round-trips emit_results)."""
    rows = []
    with open(path, newline="") as fh:
        first = fh.readline().strip()
        if not first.startswith("# schema:"):
            raise ValueError(f"{path}: missing schema header")
        if first.split(":", 1)[1].strip() != SCHEMA:
            raise ValueError(f"{path}: unsupported schema {first!r}")
        for row in csv.DictReader(fh):
            rows.append({
                "algorithm": row["algorithm"],
                "dataset": row["dataset"],
                "trial": int(row["trial"]),
                "seed": int(row["seed"]),
                "selected_step": int(row["selected_step"]),
                "val_acc": float(row["val_acc"]),
                "test_acc": float(row["test_acc"]),
            })
    return rows
