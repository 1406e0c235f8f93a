"""Discrete-time linear N-periodic systems: monodromy, lifting, validation
and reference-input augmentation."""

from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import block_diag

from .lp import maximize

STABILITY_TOL = 1e-9
OBSERVABILITY_RTOL = 1e-9
BLOCK_TOL = 1e-12


def _frozen(mats, ndim=2):
    out = []
    for M in mats:
        M = np.array(M, dtype=float)
        if M.ndim != ndim:
            raise ValueError(f"expected a {ndim}-D array, got shape {M.shape}")
        M.setflags(write=False)
        out.append(M)
    return tuple(out)


@dataclass(frozen=True, eq=False)
class PeriodicSystem:
    """Autonomous N-periodic system x(t+1) = A_k x(t), y(t) = C_k x(t),
    with output constraints S_k y(t) <= 1 at timeslot k = t mod N.

    ``d`` is the size of the trailing identity block in every A_k (the
    held-input states); it is 0 for asymptotically stable systems.
    """

    a_mats: Tuple[np.ndarray, ...]
    c_mats: Tuple[np.ndarray, ...]
    s_mats: Tuple[np.ndarray, ...]
    d: int = 0
    labels: Optional[dict] = field(default=None, compare=False)

    def __post_init__(self):
        a, c, s = _frozen(self.a_mats), _frozen(self.c_mats), _frozen(self.s_mats)
        object.__setattr__(self, "a_mats", a)
        object.__setattr__(self, "c_mats", c)
        object.__setattr__(self, "s_mats", s)
        N = len(a)
        if N < 1:
            raise ValueError("period must be at least 1")
        if len(c) != N or len(s) != N:
            raise ValueError(f"need {N} C and S matrices, got {len(c)} and {len(s)}")
        n = a[0].shape[0]
        p = c[0].shape[0]
        if n < 1 or p < 1:
            raise ValueError("state and output dimensions must be positive")
        for k in range(N):
            if a[k].shape != (n, n):
                raise ValueError(f"A_{k} has shape {a[k].shape}, expected {(n, n)}")
            if c[k].shape != (p, n):
                raise ValueError(f"C_{k} has shape {c[k].shape}, expected {(p, n)}")
            if s[k].shape[1] != p:
                raise ValueError(f"S_{k} has {s[k].shape[1]} columns, expected {p}")
        if not 0 <= int(self.d) <= n:
            raise ValueError(f"d={self.d} outside [0, {n}]")
        object.__setattr__(self, "d", int(self.d))

    @property
    def period(self):
        return len(self.a_mats)

    @property
    def n(self):
        return self.a_mats[0].shape[0]

    @property
    def p(self):
        return self.c_mats[0].shape[0]

    @property
    def q(self):
        return [S.shape[0] for S in self.s_mats]

    def slot(self, t):
        return t % self.period

    def __eq__(self, other):
        if not isinstance(other, PeriodicSystem):
            return NotImplemented
        same = lambda xs, ys: len(xs) == len(ys) and all(np.array_equal(x, y) for x, y in zip(xs, ys))
        return (self.d == other.d and same(self.a_mats, other.a_mats)
                and same(self.c_mats, other.c_mats) and same(self.s_mats, other.s_mats))

    __hash__ = None


@dataclass(frozen=True, eq=False)
class PlantWithInput:
    """Single-input periodic closed-loop plant

        x(t+1) = A_k x(t) + B_k v(t),   y(t) = C_k x(t) + D_k v(t),

    constrained by S_k y(t) <= 1.
    """

    a_mats: Tuple[np.ndarray, ...]
    b_mats: Tuple[np.ndarray, ...]
    c_mats: Tuple[np.ndarray, ...]
    d_mats: Tuple[np.ndarray, ...]
    s_mats: Tuple[np.ndarray, ...]
    labels: Optional[dict] = field(default=None, compare=False)

    def __post_init__(self):
        a = _frozen(self.a_mats)
        c = _frozen(self.c_mats)
        N = len(a)
        n, p = a[0].shape[0], c[0].shape[0]
        b = _frozen([np.reshape(B, (n, 1)) for B in self.b_mats])
        dd = _frozen([np.reshape(D, (p, 1)) for D in self.d_mats])
        if len(b) != N or len(dd) != N:
            raise ValueError(f"need {N} B and D matrices, got {len(b)} and {len(dd)}")
        object.__setattr__(self, "a_mats", a)
        object.__setattr__(self, "b_mats", b)
        object.__setattr__(self, "c_mats", c)
        object.__setattr__(self, "d_mats", dd)
        object.__setattr__(self, "s_mats", _frozen(self.s_mats))
        # reuse the shape checks of the autonomous system
        self.unforced()

    @property
    def period(self):
        return len(self.a_mats)

    @property
    def n(self):
        return self.a_mats[0].shape[0]

    @property
    def p(self):
        return self.c_mats[0].shape[0]

    def unforced(self):
        """The plant with v = 0, as an autonomous periodic system."""
        return PeriodicSystem(self.a_mats, self.c_mats, self.s_mats, d=0, labels=self.labels)

    def step(self, t, x, v):
        """Return (x(t+1), y(t)) for input value ``v`` at time ``t``."""
        k = t % self.period
        y = self.c_mats[k] @ x + self.d_mats[k][:, 0] * v
        return self.a_mats[k] @ x + self.b_mats[k][:, 0] * v, y

    def __eq__(self, other):
        if not isinstance(other, PlantWithInput):
            return NotImplemented
        pairs = [(self.a_mats, other.a_mats), (self.b_mats, other.b_mats), (self.c_mats, other.c_mats),
                 (self.d_mats, other.d_mats), (self.s_mats, other.s_mats)]
        return all(len(x) == len(y) and all(np.array_equal(u, w) for u, w in zip(x, y)) for x, y in pairs)

    __hash__ = None


@dataclass(frozen=True)
class LiftedSystem:
    phi: np.ndarray
    c_lift: np.ndarray
    s_lift: np.ndarray
    slot: int


@dataclass
class ValidationReport:
    multipliers: List[complex]
    stable: bool
    observable: bool
    assumption_failures: List[Tuple[str, str]] = field(default_factory=list)

    @property
    def ok(self):
        return not self.assumption_failures


def _check_slot(sys, slot):
    if not 0 <= slot < sys.period:
        raise IndexError(f"slot {slot} outside [0, {sys.period})")


def monodromy(sys, start_slot=0):
    """State transition over one period, A_{k+N-1} ... A_{k+1} A_k for k = start_slot."""
    _check_slot(sys, start_slot)
    phi = np.eye(sys.n)
    for j in range(sys.period):
        phi = sys.a_mats[(start_slot + j) % sys.period] @ phi
    return phi


def lift(sys, slot=0):
    """Time-invariant lifting of ``sys`` with the state sampled at ``slot``.

    The stacked output matrix has row blocks C_k, C_{k+1} A_k, ...,
    C_{k+N-1} A_{k+N-2} ... A_k (indices mod N), and the lifted constraint
    matrix is block diagonal in the same slot order.
    """
    _check_slot(sys, slot)
    N = sys.period
    P = np.eye(sys.n)
    blocks, s_blocks = [], []
    for j in range(N):
        k = (slot + j) % N
        blocks.append(sys.c_mats[k] @ P)
        s_blocks.append(sys.s_mats[k])
        P = sys.a_mats[k] @ P
    return LiftedSystem(phi=P, c_lift=np.vstack(blocks), s_lift=block_diag(*s_blocks), slot=slot)


def observability_matrix(c, phi):
    n = phi.shape[0]
    rows, M = [], c
    for _ in range(n):
        rows.append(M)
        M = M @ phi
    return np.vstack(rows)


def is_observable(c, phi, rtol=OBSERVABILITY_RTOL):
    sv = np.linalg.svd(observability_matrix(c, phi), compute_uv=False)
    if sv.size == 0 or sv[0] == 0.0:
        return False
    return int(np.sum(sv > rtol * sv[0])) == phi.shape[0]


def validate(sys, stability_tol=STABILITY_TOL):
    """Check assumptions A1-A4 and collect failures instead of raising."""
    failures = []
    n, d = sys.n, sys.d
    s = n - d
    if d >= 1:
        for k, A in enumerate(sys.a_mats):
            if np.max(np.abs(A[s:, :s]), initial=0.0) > BLOCK_TOL:
                failures.append(("A1", f"A_{k} has a nonzero bottom-left block"))
            if np.max(np.abs(A[s:, s:] - np.eye(d))) > BLOCK_TOL:
                failures.append(("A1", f"A_{k} bottom-right block is not I_{d}"))

    lifted = lift(sys, 0)
    phi_s = lifted.phi[:s, :s]
    multipliers = [complex(z) for z in np.linalg.eigvals(phi_s)] if s else []
    radius = max((abs(z) for z in multipliers), default=0.0)
    stable = radius < 1.0 - stability_tol
    if not stable:
        kind = "marginal (unit magnitude)" if radius <= 1.0 + stability_tol else "unstable"
        where = "stable block of the monodromy matrix" if d else "monodromy matrix"
        failures.append(("A2", f"{where} has a characteristic multiplier that is {kind}, |lambda| = {radius:.6g}"))

    observable = is_observable(lifted.c_lift, lifted.phi)
    if not observable:
        failures.append(("A3", "lifted pair (C, Phi) is not observable"))

    for k, S in enumerate(sys.s_mats):
        ones = np.ones(S.shape[0])
        for i in range(sys.p):
            for sgn in (1.0, -1.0):
                e = np.zeros(sys.p)
                e[i] = sgn
                if not maximize(e, S, ones).optimal:
                    failures.append(("A4", f"Y_{k} = {{y : S_{k} y <= 1}} is unbounded along {'+' if sgn > 0 else '-'}e_{i}"))
                    break
            else:
                continue
            break
    return ValidationReport(multipliers, stable, observable, failures)


def _check_plant(plant):
    if not isinstance(plant, PlantWithInput):
        raise TypeError("expected a PlantWithInput")


def augment_fixed_input(plant):
    """Append a held input state v(t+1) = v(t); the result has d = 1."""
    _check_plant(plant)
    n = plant.n
    a, c = [], []
    for k in range(plant.period):
        a.append(np.block([[plant.a_mats[k], plant.b_mats[k]], [np.zeros((1, n)), np.ones((1, 1))]]))
        c.append(np.hstack([plant.c_mats[k], plant.d_mats[k]]))
    return PeriodicSystem(a, c, plant.s_mats, d=1, labels=plant.labels)


def augment_periodic_input(plant):
    """Append N held input states v_0..v_{N-1}; slot k drives the plant with v_k."""
    _check_plant(plant)
    n, N = plant.n, plant.period
    a, c = [], []
    for k in range(N):
        e = np.zeros((1, N))
        e[0, k] = 1.0
        a.append(np.block([[plant.a_mats[k], plant.b_mats[k] @ e], [np.zeros((N, n)), np.eye(N)]]))
        c.append(np.hstack([plant.c_mats[k], plant.d_mats[k] @ e]))
    return PeriodicSystem(a, c, plant.s_mats, d=N, labels=plant.labels)


def simulate_outputs(sys, x0, start_slot, steps):
    """Free response outputs y(t) for ``steps`` samples starting in ``start_slot``."""
    x = np.asarray(x0, dtype=float)
    out = []
    for j in range(steps):
        k = (start_slot + j) % sys.period
        out.append(sys.c_mats[k] @ x)
        x = sys.a_mats[k] @ x
    return np.array(out)
