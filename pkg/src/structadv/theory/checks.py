"""Trace-vs-bound comparisons and CSV export.

The spurious-weight ceiling check is sign-aware: starting from the origin,
the weight approaches the fixed point w0 from the initialization side and
must never cross it.  For w0 > 0 that means w_sp < w0 at every step; for
w0 < 0 (adversarially signed delta*y at weak correlation) the fixed point
lies below the origin and the non-crossing bound is w_sp > w0; at the
knife edge w0 = 0 the weight must stay at 0 up to drift tolerance.

The invariant-weight bracket |w_inv * x_inv| in
[0.5 ln(1+t), 2M(1+delta) ln(1+t)] is asymptotic, so entries before the
burn-in time (where 0.5 ln(1+t) clears 2) are reported separately as
pre-asymptotic rather than as violations.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .bounds import BoundValues
from .simulate import TheoryTrace

_W0_MARGIN = 1e-9
_KNIFE_EDGE = 1e-12


def default_burn_in() -> float:
    """Continuous time where the lower bracket 0.5 ln(1+t) exceeds 2."""
    return float(np.expm1(4.0))


@dataclass
class BoundReport:
    w0_violations: list[int] = field(default_factory=list)  # recorded indices
    bracket_violations: list[int] = field(default_factory=list)
    pre_asymptotic: list[int] = field(default_factory=list)
    ratio_nonneg: bool = True
    ratio_end: float = float("nan")
    ratio_early: float = float("nan")  # at T/100
    ratio_decay_factor: float = float("nan")
    ratio_decay_ok: bool = False
    burn_in: float = 0.0
    earliest_violation: int | None = None  # step index, either check

    @property
    def w0_ok(self) -> bool:
        return not self.w0_violations

    @property
    def bracket_ok(self) -> bool:
        return not self.bracket_violations


def check_bounds(trace: TheoryTrace, bounds: BoundValues, config=None, *,
                 burn_in: float | None = None) -> BoundReport:
    """Compare a simulation trace against its bound values.

    Violations are report entries, never exceptions.  The ratio-decay entry
    compares the final recorded ratio against one tenth of the ratio at a
    hundredth of the run.
    """
    config = config or trace.config
    if burn_in is None:
        burn_in = default_burn_in()
    report = BoundReport(burn_in=burn_in)

    w0 = bounds.w0
    w_sp = trace.w_sp
    if w0 > _KNIFE_EDGE:
        bad = np.nonzero(w_sp >= w0 - _W0_MARGIN)[0]
    elif w0 < -_KNIFE_EDGE:
        bad = np.nonzero(w_sp <= w0 + _W0_MARGIN)[0]
    else:
        bad = np.nonzero(np.abs(w_sp) > _W0_MARGIN)[0]
    report.w0_violations = [int(i) for i in bad]

    inv_scale = config.inv_scale
    margin = np.abs(trace.w_inv) * inv_scale
    log_t = np.log1p(trace.times)
    lower = 0.5 * log_t
    upper = 2.0 * bounds.M * (1.0 + config.delta) * log_t
    past = trace.times > burn_in
    outside = (margin < lower) | (margin > upper)
    report.bracket_violations = [int(i) for i in np.nonzero(outside & past)[0]]
    report.pre_asymptotic = [int(i) for i in np.nonzero(outside & ~past)[0]]

    dy = config.delta * config.y
    if config.beta * (2.0 * config.effective_p - 1.0) + dy >= 0:
        report.ratio_nonneg = bool(np.all(trace.ratio >= -1e-12))

    i_end = len(trace) - 1
    i_early = trace.at_step(max(1, int(trace.steps[i_end]) // 100))
    report.ratio_end = float(trace.ratio[i_end])
    report.ratio_early = float(trace.ratio[i_early])
    if report.ratio_early != 0.0:
        report.ratio_decay_factor = report.ratio_end / report.ratio_early
        report.ratio_decay_ok = abs(report.ratio_end) < 0.1 * abs(report.ratio_early)

    flagged = sorted(report.w0_violations + report.bracket_violations)
    if flagged:
        report.earliest_violation = int(trace.steps[flagged[0]])
    return report


def export_trace_csv(trace: TheoryTrace, bounds: BoundValues, path) -> None:
    """Columns: t, w_inv, w_sp, ratio, w0, mat_lower, erm_lower.

    ``t`` is continuous time; bound columns are evaluated at that t and are
    empty where a bound's domain (t >= 1 resp. t >= 2) is not met.
    """
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "w_inv", "w_sp", "ratio", "w0", "mat_lower", "erm_lower"])
        for i in range(len(trace)):
            t = float(trace.times[i])
            mat = bounds.mat_lower(bounds.p, t) if t >= 1.0 else ""
            erm = bounds.erm_lower(bounds.p, t) if t >= 2.0 else ""
            writer.writerow([
                t,
                float(trace.w_inv[i]),
                float(trace.w_sp[i]),
                float(trace.ratio[i]),
                bounds.w0,
                mat,
                erm,
            ])
