import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from periodic_rg import catalog
from periodic_rg.errors import NotFinitelyDetermined, PolytopeError, ValidationError
from periodic_rg.mas import build_storage, compute_omega0
from periodic_rg.model import augment_fixed_input, augment_periodic_input
from periodic_rg.tradeoff import (affine_fit, complete_floats, extra_ops_per_slot, formula_f1, formula_f2,
                                  measure, partial_floats, sweep, sweep_csv)


def test_formula_values_for_example():
    assert formula_f1(3, 2, 22) == (480, 94)
    assert formula_f2(3, 2, 24) == (880, 294)


def test_float_counts_for_example():
    assert complete_floats(3, 2, 22, 2) == 216
    assert partial_floats(3, 2, 22, 2) == 96
    assert complete_floats(3, 2, 24, 2, inputs=3) == 390
    assert partial_floats(3, 2, 24, 2, inputs=3) == 170


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 8), st.integers(1, 6), st.integers(0, 60), st.integers(1, 6))
def test_bytes_saved_is_the_storage_difference(N, n, extra, q):
    m = n + extra
    saved = 4 * (complete_floats(N, n, m, q) - partial_floats(N, n, m, q))
    assert saved == formula_f1(N, n, m)[0]
    saved3 = 4 * (complete_floats(3, n, m, q, inputs=3) - partial_floats(3, n, m, q, inputs=3))
    assert saved3 == formula_f2(3, n, m)[0]


def test_sweep_slopes():
    s1, _, r1 = affine_fit(sweep(3, 1, range(1, 59)))
    s4, _, r4 = affine_fit(sweep(3, 4, range(4, 29)))
    assert s1 == pytest.approx(8.0) and s4 == pytest.approx(5.0)
    assert r1 < 1e-9 and r4 < 1e-9
    assert s1 > s4


def test_sweep_errors():
    with pytest.raises(ValueError):
        sweep(3, 1, [])
    with pytest.raises(ValueError):
        affine_fit(sweep(3, 1, [5]))
    with pytest.raises(KeyError):
        sweep(3, 1, [1, 2], "f9")


def test_sweep_csv():
    text = sweep_csv([(("f1", 3, 1), sweep(3, 1, [1, 2]))])
    assert text.splitlines() == ["formulation,N,n,m,bytes_saved,extra_ops", "f1,3,1,1,0,3", "f1,3,1,2,16,5"]


def test_measured_example(f1_storage, f2_storage):
    r1 = measure(f1_storage["complete"], f1_storage["partial"], "f1")
    assert r1.extra_ops_per_slot == [0, 94, 94]
    assert r1.measured_extra_ops == r1.formula_extra_ops == 94
    assert r1.measured_bytes_partial == 384 and r1.measured_bytes_complete == 864
    assert r1.measured_bytes_saved == r1.formula_bytes_saved == 480
    assert r1.uniform_q
    r2 = measure(f2_storage["complete"], f2_storage["partial"], "f2")
    assert r2.extra_ops_per_slot == [0, 294, 294]
    assert r2.measured_bytes_partial == 680 and r2.measured_bytes_complete == 1560
    assert r2.measured_bytes_saved == r2.formula_bytes_saved == 880
    assert "864" in r1.text() and "294" in r2.text()


def test_extra_ops_do_not_depend_on_state(f2_storage, rng):
    comp, part = f2_storage["complete"], f2_storage["partial"]
    base = extra_ops_per_slot(comp, part)
    for x in rng.normal(size=(5, comp.n)):
        assert extra_ops_per_slot(comp, part, x) == base


def test_measured_ops_follow_closed_form_on_random_plants(rng):
    done = 0
    while done < 6:
        N, n = int(rng.integers(2, 5)), int(rng.integers(1, 4))
        p = catalog.random_plant(rng, period=N, n=n, radius=0.6)
        for aug in (augment_fixed_input, augment_periodic_input):
            sys = aug(p)
            try:
                mas = compute_omega0(sys, 0.1, max_steps=300)
            except (ValidationError, NotFinitelyDetermined, PolytopeError):
                continue
            comp, part = build_storage(mas, sys, "complete"), build_storage(mas, sys, "partial")
            per_slot = extra_ops_per_slot(comp, part)
            d = sys.d
            assert per_slot[0] == 0
            assert all(v == n * (2 * mas.m * d + 2 * n - 1) for v in per_slot[1:])
            if aug is augment_fixed_input:
                assert max(per_slot) == formula_f1(N, n, mas.m)[1]
                if len(set(sys.q)) == 1:
                    assert comp.bytes32 - part.bytes32 == formula_f1(N, n, mas.m)[0]
            done += 1
