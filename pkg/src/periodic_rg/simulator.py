"""Closed-loop simulation of a governed periodic plant with constraint auditing."""

import csv
import io
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from . import governor as gov
from .errors import InfeasibleGovernorState
from . import svgplot

NONE = "none"
VIOLATION_TOL = 1e-9
DEFAULT_HORIZON = 60
_LEVEL_COUNTS = {"constant": 1, "step": 2, "pulse": 3}


@dataclass(frozen=True)
class ReferenceSignal:
    """Piecewise-constant reference: ``levels[i]`` holds from ``switch_times[i-1]``."""

    kind: str
    levels: Sequence[float]
    switch_times: Sequence[int] = ()

    def __post_init__(self):
        levels = tuple(float(v) for v in self.levels)
        times = tuple(int(t) for t in self.switch_times)
        if self.kind not in (*_LEVEL_COUNTS, "piecewise"):
            raise ValueError(f"unknown reference kind {self.kind!r}")
        want = _LEVEL_COUNTS.get(self.kind)
        if want is not None and len(levels) != want:
            raise ValueError(f"{self.kind} reference needs {want} levels, got {len(levels)}")
        if len(times) != len(levels) - 1:
            raise ValueError("need exactly one switch time between consecutive levels")
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError("switch times must be strictly increasing")
        object.__setattr__(self, "levels", levels)
        object.__setattr__(self, "switch_times", times)

    @classmethod
    def constant(cls, level):
        return cls("constant", [level])

    @classmethod
    def step(cls, before, after, at):
        return cls("step", [before, after], [at])

    @classmethod
    def pulse(cls, base=0.0, high=0.15, settle=0.05, rise_at=10, fall_at=26):
        return cls("pulse", [base, high, settle], [rise_at, fall_at])

    def __call__(self, t):
        i = int(np.searchsorted(self.switch_times, t, side="right"))
        return self.levels[i]

    def to_dict(self):
        return {"kind": self.kind, "levels": list(self.levels), "switch_times": list(self.switch_times)}


@dataclass(frozen=True)
class StepRecord:
    t: int
    slot: int
    r: float
    kappa: float
    v: float
    x: np.ndarray
    y: np.ndarray
    min_slack: float
    violated: bool
    # smallest slack of the admissible-set rows at (x(t), governor state); nan when ungoverned
    mas_slack: float = float("nan")


@dataclass
class SimulationTrace:
    governor_kind: str
    s_mats: tuple
    records: List[StepRecord] = field(default_factory=list)

    @property
    def any_violation(self):
        return any(rec.violated for rec in self.records)

    @property
    def tracking_errors(self):
        return np.array([abs(rec.v - rec.r) for rec in self.records])

    @property
    def max_tracking_error(self):
        err = self.tracking_errors
        return float(err.max()) if err.size else 0.0

    @property
    def sum_tracking_error(self):
        return float(self.tracking_errors.sum())

    def column(self, name):
        return np.array([getattr(rec, name) for rec in self.records])


class SimulationAborted(InfeasibleGovernorState):
    def __init__(self, trace, cause):
        self.trace = trace
        self.cause = cause
        super().__init__(f"governor fault at t={len(trace.records)}: {cause}")


def _slack(S, y):
    return float(np.min(1.0 - S @ y))


def simulate(plant, governor_kind, storage, ref, horizon=DEFAULT_HORIZON, x0=None, v_init=0.0):
    """Run the plant for ``horizon`` steps under reference ``ref``.

    ``governor_kind`` is ``"none"`` (apply r directly), ``"f1"`` or ``"f2"``.
    The state is measured exactly and v(t) acts on y(t) without delay.

    Raises
    ------
    InfeasibleGovernorState
        If no feasible initial governor state exists.
    SimulationAborted
        If a governor step faults; the partial trace is attached.
    """
    N = plant.period
    x = np.zeros(plant.n) if x0 is None else np.array(x0, dtype=float)
    trace = SimulationTrace(governor_kind, plant.s_mats)
    state = None
    if governor_kind != NONE:
        state = gov.initialize(storage, 0, x, v_init, governor_kind)
    for t in range(horizon):
        k = t % N
        r = ref(t)
        if state is None:
            kappa, v, mas_slack = 1.0, r, float("nan")
        else:
            try:
                st = gov.step(governor_kind, state, storage, k, x, r)
            except InfeasibleGovernorState as exc:
                raise SimulationAborted(trace, exc) from exc
            kappa, v = st.kappa, st.v_applied
            _, b = storage.residual(k, np.concatenate([x, gov.state_vector(state)]))
            mas_slack = float(b.min())
        x_next, y = plant.step(t, x, v)
        slack = _slack(plant.s_mats[k], y)
        trace.records.append(StepRecord(t, k, r, kappa, v, x.copy(), y, slack, slack < -VIOLATION_TOL, mas_slack))
        x = x_next
    return trace


@dataclass
class AuditReport:
    violations: list
    min_slack: float
    max_tracking_error: float
    sum_tracking_error: float

    @property
    def ok(self):
        return not self.violations

    def text(self):
        lines = [f"steps with violations: {len(self.violations)}",
                 f"min constraint slack: {self.min_slack:.6g}",
                 f"max |v - r|: {self.max_tracking_error:.6g}",
                 f"sum |v - r|: {self.sum_tracking_error:.6g}"]
        for t, slot, row, excess in self.violations:
            lines.append(f"  t={t} slot={slot} row={row} S y - 1 = {excess:.6g}")
        return "\n".join(lines) + "\n"


def audit(trace, tol=VIOLATION_TOL):
    """Re-check S_slot y <= 1 from the recorded outputs, ignoring recorded slacks."""
    violations = []
    min_slack = np.inf
    for rec in trace.records:
        Sy = trace.s_mats[rec.slot] @ rec.y
        min_slack = min(min_slack, float(np.min(1.0 - Sy)))
        for row, val in enumerate(Sy):
            if val > 1.0 + tol:
                violations.append((rec.t, rec.slot, row, float(val - 1.0)))
    return AuditReport(violations, float(min_slack), trace.max_tracking_error, trace.sum_tracking_error)


def trace_csv(trace):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    n = trace.records[0].x.size if trace.records else 0
    p = trace.records[0].y.size if trace.records else 0
    w.writerow(["t", "slot", "r", "kappa", "v"] + [f"x_{i + 1}" for i in range(n)]
               + [f"y_{i + 1}" for i in range(p)] + ["min_slack", "violated"])
    for rec in trace.records:
        w.writerow([rec.t, rec.slot, repr(float(rec.r)), repr(float(rec.kappa)), repr(float(rec.v))]
                   + [repr(float(v)) for v in rec.x] + [repr(float(v)) for v in rec.y]
                   + [repr(float(rec.min_slack)), int(rec.violated)])
    return buf.getvalue()


def output_bounds(S):
    """Scalar-output bounds (lower, upper) implied by S y <= 1; +-inf if open."""
    col = np.asarray(S)[:, 0]
    up = [1.0 / s for s in col if s > 0]
    lo = [1.0 / s for s in col if s < 0]
    return (max(lo) if lo else -np.inf, min(up) if up else np.inf)


def trace_svg(governed, ungoverned=None, title=None):
    """Output vs constraints on top, reference and governed reference below."""
    t = governed.column("t")
    panels = []
    series = []
    if governed.records and governed.records[0].y.size == 1:
        bounds = np.array([output_bounds(governed.s_mats[rec.slot]) for rec in governed.records])
        bounds[~np.isfinite(bounds)] = np.nan
        series += [(t, bounds[:, 0], "black", True), (t, bounds[:, 1], "black", True)]
    if ungoverned is not None:
        series.append((t, np.array([rec.y[0] for rec in ungoverned.records]), "red", False))
    series.append((t, np.array([rec.y[0] for rec in governed.records]), "blue", False))
    panels.append({"label": "constrained output y", "series": series})
    panels.append({"label": "reference r (dashed) and governed v",
                   "series": [(t, governed.column("r"), "black", True), (t, governed.column("v"), "blue", False)]})
    return svgplot.time_series(panels, title)
