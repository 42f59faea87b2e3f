from .bounds import (
    BoundValues,
    compute_M,
    erm_lower_bound,
    make_bounds,
    mat_lower_bound,
    w0_upper_bound,
)
from .checks import BoundReport, check_bounds, export_trace_csv
from .simulate import TheoryConfig, TheoryTrace, simulate_gd

__all__ = [
    "BoundReport",
    "BoundValues",
    "TheoryConfig",
    "TheoryTrace",
    "check_bounds",
    "compute_M",
    "erm_lower_bound",
    "export_trace_csv",
    "make_bounds",
    "mat_lower_bound",
    "simulate_gd",
    "w0_upper_bound",
]
