"""Scalar reference governors for periodic plants.

Formulation 1 ("fixed input") keeps one governed reference v and filters
v <- v + kappa (r - v) every step. Formulation 2 ("periodic input") keeps one
held value per timeslot and only updates the current slot's value. Both
choose the largest kappa in [0, 1] that keeps the augmented state inside
the admissible set of the current slot.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import InfeasibleGovernorState

CLAMP_TOL = 1e-9
POS_TOL = 1e-12
F1 = "f1"
F2 = "f2"


@dataclass
class GovernorF1State:
    v_prev: float


@dataclass
class GovernorF2State:
    v: np.ndarray

    def __post_init__(self):
        self.v = np.array(self.v, dtype=float)


@dataclass(frozen=True)
class GovernorStep:
    kappa: float
    v_applied: float
    binding_row: Optional[int]


def solve_kappa(a, b, tol=CLAMP_TOL, pos_tol=POS_TOL):
    """Largest kappa in [0, 1] with kappa * a_i <= b_i for every row.

    Only rows with a_i > pos_tol can bound kappa; rows with a_i <= 0 hold
    for every kappa >= 0 once b_i >= 0. Slightly negative b_i (within
    ``tol``) are treated as 0.

    Returns
    -------
    (kappa, binding_row)
        ``binding_row`` is the lowest index attaining the bound, or None if
        kappa = 1 is unconstrained.
    """
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    if a.size != b.size:
        raise ValueError(f"a has {a.size} rows, b has {b.size}")
    worst = int(np.argmin(b)) if b.size else None
    if worst is not None and b[worst] < -tol:
        raise InfeasibleGovernorState(
            f"row {worst} has slack {b[worst]:.3e} < -{tol:g}: state is outside the admissible set")
    kappa, binding = 1.0, None
    for i in range(a.size):
        if a[i] > pos_tol:
            gamma = max(b[i], 0.0) / a[i]
            if gamma < kappa:
                kappa, binding = float(gamma), i
    return kappa, binding


def _x_aug(x, v):
    return np.concatenate([np.asarray(x, dtype=float).ravel(), np.atleast_1d(v)])


def step_f1(state, storage, slot, x, r):
    """One fixed-input governor update; mutates ``state`` and returns the step."""
    Hv, b = storage.residual(slot, _x_aug(x, state.v_prev))
    delta = r - state.v_prev
    kappa, row = solve_kappa(delta * Hv[:, 0], b)
    state.v_prev = state.v_prev + kappa * delta
    return GovernorStep(kappa, state.v_prev, row)


def step_f2(state, storage, slot, x, r):
    """One periodic-input governor update: only v[slot] moves."""
    Hv, b = storage.residual(slot, _x_aug(x, state.v))
    delta = r - state.v[slot]
    kappa, row = solve_kappa(delta * Hv[:, slot], b)
    state.v[slot] = state.v[slot] + kappa * delta
    return GovernorStep(kappa, float(state.v[slot]), row)


def step(kind, state, storage, slot, x, r):
    if kind == F1:
        return step_f1(state, storage, slot, x, r)
    if kind == F2:
        return step_f2(state, storage, slot, x, r)
    raise ValueError(f"unknown formulation {kind!r}")


def initialize(storage, slot, x0, v_guess=0.0, kind=F1, tol=CLAMP_TOL):
    """Feasible governor state for starting at ``slot`` from ``x0``.

    Tries ``v_guess`` first, then 0. For formulation 2 the candidate value
    is used for every timeslot.
    """
    width = 1 if kind == F1 else storage.d
    for cand in dict.fromkeys([float(v_guess), 0.0]):
        v = np.full(width, cand)
        if storage.contains(slot, _x_aug(x0, v), tol):
            return GovernorF1State(cand) if kind == F1 else GovernorF2State(v)
    raise InfeasibleGovernorState(
        f"no feasible initial reference: neither v={v_guess} nor v=0 puts x0 in the slot-{slot} set")


def state_vector(state):
    if isinstance(state, GovernorF1State):
        return np.array([state.v_prev])
    return state.v.copy()
