"""Command-line entry point.

    structadv --preset cmnist-quick --out results/
    structadv --spec my_experiment.json --seed 7 --out results/ --jobs 4
    structadv --preset toy-theory --out theory/

Exit code 0 only when every requested trial completed.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .experiment import run_experiment
from .presets import PRESETS, run_theory_preset
from .results import emit_results


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="structadv",
        description="Structured adversarial training experiments",
    )
    parser.add_argument("--spec", type=Path, help="experiment spec file (JSON)")
    parser.add_argument("--preset", choices=[*PRESETS, "toy-theory"],
                        help="built-in experiment preset")
    parser.add_argument("--seed", type=int, default=None, help="root seed")
    parser.add_argument("--out", type=Path, default=Path("results"),
                        help="output directory")
    parser.add_argument("--algo", action="append", default=None,
                        help="restrict to this algorithm/config name (repeatable)")
    parser.add_argument("--jobs", type=int, default=1,
                        help="parallel trial processes")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if (args.spec is None) == (args.preset is None):
        print("exactly one of --spec or --preset is required", file=sys.stderr)
        return 2

    if args.preset == "toy-theory":
        summary = run_theory_preset(args.out)
        bad = summary["total_w0_violations"] + summary["total_bracket_violations"]
        print(f"theory grid: {summary['grid_points']} points, "
              f"{bad} bound violations -> {args.out}")
        return 0 if bad == 0 else 1

    if args.preset is not None:
        spec = PRESETS[args.preset]()
    else:
        spec = json.loads(args.spec.read_text())
    result = run_experiment(spec, root_seed=args.seed, jobs=args.jobs,
                            algorithms=args.algo)
    emit_results(result, args.out)
    for agg in result.aggregates:
        if "mean" in agg:
            print(f"{agg['algorithm']:>12}: {agg['mean']:.3f} "
                  f"+/- {agg['stderr']:.3f} over {agg['n_seeds']} seeds")
        else:
            print(f"{agg['algorithm']:>12}: no successful runs")
    if result.failures:
        print(f"{len(result.failures)} failed trial(s); see metadata.json",
              file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
