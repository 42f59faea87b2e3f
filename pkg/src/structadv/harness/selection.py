"""Model-selection strategies over per-checkpoint validation metrics."""

from __future__ import annotations

import enum
from dataclasses import dataclass

from ..train import TrainReport


class SelectionStrategy(enum.Enum):
    TRAINING_DOMAIN = "training-domain"
    OOD_VALIDATION = "ood-validation"
    TEST_DOMAIN = "test-domain"  # leaks test labels by design; needs explicit opt-in


_SPLIT_FOR = {
    SelectionStrategy.TRAINING_DOMAIN: "val",
    SelectionStrategy.OOD_VALIDATION: "ood_val",
    SelectionStrategy.TEST_DOMAIN: "test_val",
}


@dataclass(frozen=True)
class Selected:
    index: int  # checkpoint index into the metric list
    step: int
    val_acc: float  # the strategy's validation accuracy at the chosen checkpoint
    test_acc: float | None


def select_model(metrics: list[dict], strategy: SelectionStrategy, *,
                 allow_test_domain: bool = False) -> Selected:
    """Argmax of the strategy's validation accuracy; ties break earliest.

    ``metrics`` is one dict per checkpoint with a ``step`` and per-split
    accuracies.  Raises if the strategy's split is missing or, for
    test-domain selection, if the caller has not opted in.
    """
    if not metrics:
        raise ValueError("select_model needs at least one checkpoint")
    if strategy is SelectionStrategy.TEST_DOMAIN and not allow_test_domain:
        raise ValueError("test-domain selection requires explicit opt-in")
    split = _SPLIT_FOR[strategy]
    best = None
    for i, entry in enumerate(metrics):
        if split not in entry:
            raise ValueError(f"checkpoint {i} is missing split {split!r} "
                             f"required by {strategy.value} selection")
        if best is None or entry[split] > metrics[best][split]:
            best = i
    chosen = metrics[best]
    return Selected(index=best, step=int(chosen["step"]),
                    val_acc=float(chosen[split]),
                    test_acc=float(chosen["test"]) if "test" in chosen else None)


def report_metrics(report: TrainReport) -> list[dict]:
    """Per-checkpoint metric dicts out of a training report."""
    out = []
    for i, step in enumerate(report.eval_steps):
        entry = {"step": step}
        for split, series in report.accuracies.items():
            entry[split] = series[i]
        out.append(entry)
    return out


def selection_from_report(report: TrainReport, strategy: SelectionStrategy, *,
                          allow_test_domain: bool = False) -> Selected:
    return select_model(report_metrics(report), strategy,
                        allow_test_domain=allow_test_domain)
