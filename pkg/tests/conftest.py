import numpy as np
import pytest

from periodic_rg import catalog
from periodic_rg.mas import build_storage, compute_omega0
from periodic_rg.model import augment_fixed_input, augment_periodic_input

# filled in by test_acceptance.py, printed at the end of the session
ACCEPTANCE_RESULTS = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_RESULTS, key=lambda k: int(k[2:])):
        ok, detail = ACCEPTANCE_RESULTS[key]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} {key}: {detail}")


@pytest.fixture(scope="session")
def three_slot():
    return catalog.three_slot_system()


@pytest.fixture(scope="session")
def plant():
    return catalog.three_slot_plant()


@pytest.fixture(scope="session")
def f1_sys(plant):
    return augment_fixed_input(plant)


@pytest.fixture(scope="session")
def f2_sys(plant):
    return augment_periodic_input(plant)


@pytest.fixture(scope="session")
def three_slot_mas(three_slot):
    return compute_omega0(three_slot)


@pytest.fixture(scope="session")
def f1_mas(f1_sys):
    return compute_omega0(f1_sys, catalog.EPSILON_EXAMPLE)


@pytest.fixture(scope="session")
def f2_mas(f2_sys):
    return compute_omega0(f2_sys, catalog.EPSILON_EXAMPLE)


@pytest.fixture(scope="session")
def f1_storage(f1_mas, f1_sys):
    return {mode: build_storage(f1_mas, f1_sys, mode) for mode in ("complete", "partial")}


@pytest.fixture(scope="session")
def f2_storage(f2_mas, f2_sys):
    return {mode: build_storage(f2_mas, f2_sys, mode) for mode in ("complete", "partial")}


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
