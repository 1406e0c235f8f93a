import csv
import io
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from periodic_rg.errors import InfeasibleGovernorState
from periodic_rg.simulator import (ReferenceSignal, SimulationAborted, audit, output_bounds, simulate,
                                   trace_csv, trace_svg)


def test_reference_signals():
    r = ReferenceSignal.pulse()
    assert [r(t) for t in (0, 9, 10, 25, 26, 59)] == [0.0, 0.0, 0.15, 0.15, 0.05, 0.05]
    assert ReferenceSignal.constant(0.3)(1000) == 0.3
    s = ReferenceSignal.step(0.0, 1.0, 5)
    assert s(4) == 0.0 and s(5) == 1.0
    pw = ReferenceSignal("piecewise", [1, 2, 3, 4], [1, 2, 3])
    assert [pw(t) for t in range(5)] == [1, 2, 3, 4, 4]
    assert ReferenceSignal(**r.to_dict()) == r


@pytest.mark.parametrize("args", [
    ("ramp", [1.0], []),
    ("pulse", [1.0, 2.0], [3]),
    ("piecewise", [1.0, 2.0], []),
    ("piecewise", [1.0, 2.0, 3.0], [5, 5]),
])
def test_reference_validation(args):
    with pytest.raises(ValueError):
        ReferenceSignal(*args)


def test_output_bounds():
    assert output_bounds(np.array([[1.0], [-1.0]])) == (-1.0, 1.0)
    assert output_bounds(np.array([[2.0]])) == (-np.inf, 0.5)


def test_ungoverned_pulse_violates(plant):
    trace = simulate(plant, "none", None, ReferenceSignal.pulse())
    rep = audit(trace)
    assert trace.any_violation and not rep.ok
    assert len(trace.records) == 60
    assert trace.sum_tracking_error == 0.0


@pytest.mark.parametrize("kind", ["f1", "f2"])
def test_governed_pulse_is_safe(plant, f1_storage, f2_storage, kind):
    storage = (f1_storage if kind == "f1" else f2_storage)["partial"]
    trace = simulate(plant, kind, storage, ReferenceSignal.pulse())
    rep = audit(trace)
    assert rep.ok and not trace.any_violation
    kappas = trace.column("kappa")
    assert np.any((kappas > 0) & (kappas < 1))
    assert np.all(trace.column("mas_slack") >= -1e-9)


def test_f2_tracks_at_least_as_closely(plant, f1_storage, f2_storage):
    ref = ReferenceSignal.pulse()
    t1 = simulate(plant, "f1", f1_storage["partial"], ref)
    t2 = simulate(plant, "f2", f2_storage["partial"], ref)
    assert t2.sum_tracking_error <= t1.sum_tracking_error


def test_storage_modes_give_same_trace(plant, f2_storage):
    ref = ReferenceSignal.pulse()
    a = simulate(plant, "f2", f2_storage["complete"], ref)
    b = simulate(plant, "f2", f2_storage["partial"], ref)
    assert np.allclose(a.column("v"), b.column("v"), atol=1e-10)


def test_audit_recomputes_from_outputs(plant):
    trace = simulate(plant, "none", None, ReferenceSignal.constant(0.01), horizon=12)
    assert audit(trace).ok
    # corrupt one output; the audit must notice even though the record says otherwise
    rec = trace.records[4]
    trace.records[4] = type(rec)(**{**rec.__dict__, "y": np.array([5.0])})
    rep = audit(trace)
    assert [v[0] for v in rep.violations] == [4]
    assert "t=4" in rep.text()


def test_infeasible_start_raises(plant, f1_storage):
    with pytest.raises(InfeasibleGovernorState):
        simulate(plant, "f1", f1_storage["partial"], ReferenceSignal.constant(0.0), x0=[40.0, -40.0])


def test_fault_mid_run_keeps_partial_trace(plant, f1_storage):
    # a start that passes the slot-0 check is fine; corrupt the storage residual to force a fault later
    class Broken:
        def __init__(self, inner):
            self.inner, self.calls, self.d, self.period = inner, 0, inner.d, inner.period

        def contains(self, *a, **k):
            return self.inner.contains(*a, **k)

        def residual(self, slot, x_aug, counter=None):
            self.calls += 1
            Hv, b = self.inner.residual(slot, x_aug)
            return Hv, (b - 1.0 if self.calls > 10 else b)

    with pytest.raises(SimulationAborted) as exc:
        simulate(plant, "f1", Broken(f1_storage["partial"]), ReferenceSignal.constant(0.0))
    assert len(exc.value.trace.records) > 0


def test_trace_csv(plant, f1_storage):
    trace = simulate(plant, "f1", f1_storage["partial"], ReferenceSignal.pulse(), horizon=15)
    rows = list(csv.DictReader(io.StringIO(trace_csv(trace))))
    assert len(rows) == 15
    assert set(rows[0]) == {"t", "slot", "r", "kappa", "v", "x_1", "x_2", "y_1", "min_slack", "violated"}
    assert float(rows[12]["r"]) == 0.15
    assert [int(r["slot"]) for r in rows[:4]] == [0, 1, 2, 0]
    assert float(rows[3]["v"]) == trace.records[3].v


def test_trace_svg_is_xml(plant, f1_storage):
    gov = simulate(plant, "f1", f1_storage["partial"], ReferenceSignal.pulse())
    raw = simulate(plant, "none", None, ReferenceSignal.pulse())
    root = ET.fromstring(trace_svg(gov, raw, title="pulse"))
    assert root.tag.endswith("svg")
    assert len(root.findall(".//{http://www.w3.org/2000/svg}polyline")) >= 4
