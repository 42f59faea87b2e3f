from .experiment import ExperimentResult, run_experiment
from .results import emit_results, load_results_csv
from .search import SearchSpace, sample_trial
from .selection import SelectionStrategy, select_model, selection_from_report

__all__ = [
    "ExperimentResult",
    "SearchSpace",
    "SelectionStrategy",
    "emit_results",
    "load_results_csv",
    "run_experiment",
    "sample_trial",
    "select_model",
    "selection_from_report",
]
