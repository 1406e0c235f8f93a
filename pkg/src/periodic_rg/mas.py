"""Periodic maximal output admissible sets.

``compute_omega0`` builds the slot-0 set (tightened at steady state when
the system carries held-input states), ``expand_slot`` derives the other
N - 1 slots from it without further LPs, and ``MasStorage`` serves the
per-slot sets either fully materialized ("complete") or reconstructed on the
fly from slot 0 ("partial").
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .errors import NotFinitelyDetermined, PolytopeError, ValidationError
from .model import lift, validate
from .polytope import HPolytope, append_nonredundant, bounding_box

log = logging.getLogger(__name__)

DEFAULT_EPSILON = 0.05
MAX_STEPS = 10_000
BYTES_PER_FLOAT = 4

COMPLETE = "complete"
PARTIAL = "partial"


@dataclass(frozen=True)
class SteadyStateMap:
    gamma: np.ndarray
    s_lift: np.ndarray

    @property
    def rows(self):
        """Steady-state constraint rows S Gamma."""
        return self.s_lift @ self.gamma


@dataclass(frozen=True, eq=False)
class PeriodicMas:
    h0: np.ndarray
    rhs0: np.ndarray
    epsilon: float
    admissibility_index: int
    steady_rows: int = 0
    start_slot: int = 0

    @property
    def m(self):
        return self.h0.shape[0]

    @property
    def polytope(self):
        return HPolytope(self.h0, self.rhs0)


def gamma(sys, slot=0):
    """Steady-state output map of the lifted system sampled at ``slot``.

    With the lifted monodromy partitioned as [[Phi_s, Phi_c], [0, I_d]] and
    the stacked output as [C_s, C_c], the limit of the lifted output from
    x0 is ``Gamma @ x0`` with Gamma = [0, C_s (I - Phi_s)^-1 Phi_c + C_c].
    """
    d = sys.d
    if d < 1:
        raise ValueError("steady-state map is only defined for systems with held states (d >= 1)")
    lifted = lift(sys, slot)
    s = sys.n - d
    phi_s, phi_c = lifted.phi[:s, :s], lifted.phi[:s, s:]
    c_s, c_c = lifted.c_lift[:, :s], lifted.c_lift[:, s:]
    if s:
        M = np.eye(s) - phi_s
        if np.linalg.cond(M) > 1e12:
            raise ValueError("I - Phi_s is numerically singular; the stable block has a unit multiplier")
        tail = c_s @ np.linalg.solve(M, phi_c) + c_c
    else:
        tail = c_c
    G = np.hstack([np.zeros((lifted.c_lift.shape[0], s)), tail])
    return SteadyStateMap(G, lifted.s_lift)


def _require_valid(sys):
    report = validate(sys)
    if not report.ok:
        raise ValidationError(report)


def compute_omega0(sys, epsilon=DEFAULT_EPSILON, *, start_slot=0, max_steps=MAX_STEPS, check=True):
    """Admissible set for initial states at ``start_slot`` (slot 0 by default).

    Output constraint rows S_k C_k A_{k-1} ... are generated one timestep at
    a time and appended only when they cut the current set. The recursion
    stops once N consecutive timesteps contribute nothing. When the system
    has held-input states (d >= 1) the set starts from the steady-state rows
    S Gamma x <= (1 - epsilon).

    Raises
    ------
    ValidationError
        If the system fails any of A1-A4 (skipped with ``check=False``).
    NotFinitelyDetermined
        If ``max_steps`` timesteps pass without termination.
    """
    if check:
        _require_valid(sys)
    N, n = sys.period, sys.n
    if sys.d >= 1:
        if not 0.0 < epsilon < 1.0:
            raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
        rows = gamma(sys, start_slot).rows
        P = HPolytope(rows, np.full(rows.shape[0], 1.0 - epsilon))
    else:
        epsilon = 0.0
        P = HPolytope.whole_space(n)
    steady = P.m

    prod = np.eye(n)
    idle = 0
    t = 0
    while True:
        if t >= max_steps:
            raise NotFinitelyDetermined(
                f"no termination after {max_steps} timesteps (epsilon={epsilon}); "
                "the set may not be finitely determined at this tightening")
        k = (start_slot + t) % N
        Y = sys.s_mats[k] @ sys.c_mats[k] @ prod
        P, added = append_nonredundant(P, Y, np.ones(Y.shape[0]))
        if added:
            idle = 0
        else:
            idle += 1
            if idle == N:
                break
        prod = sys.a_mats[k] @ prod
        t += 1

    mas = PeriodicMas(P.H, P.h, float(epsilon), t, steady, start_slot)
    log.info("admissible set at slot %d: m=%d rows, admissibility index j*=%d, epsilon=%g",
             start_slot, mas.m, t, epsilon)
    if check:
        _check_compact(mas)
    return mas


def _check_compact(mas):
    try:
        bounding_box(mas.polytope)
    except PolytopeError as exc:
        raise PolytopeError(f"admissible set is not compact: {exc}") from exc
    if np.any(mas.rhs0 <= 0.0):
        raise PolytopeError("origin is not interior to the admissible set")


def slot_blocks(sys, k):
    """Fresh constraint blocks for slot k >= 1 and the trailing state product.

    Returns ``(blocks, T)`` where blocks are S_k C_k, S_{k+1} C_{k+1} A_k, ...,
    S_{N-1} C_{N-1} A_{N-2} ... A_k and T = A_{N-1} ... A_k.
    """
    N = sys.period
    prod = np.eye(sys.n)
    blocks = []
    for j in range(k, N):
        blocks.append(sys.s_mats[j] @ sys.c_mats[j] @ prod)
        prod = sys.a_mats[j] @ prod
    return blocks, prod


def expand_slot(mas, sys, k):
    """Admissible set at slot ``k`` from the slot-0 set, no LPs involved."""
    if mas.start_slot != 0:
        raise ValueError("expansion requires the slot-0 set")
    if not 0 <= k < sys.period:
        raise IndexError(f"slot {k} outside [0, {sys.period})")
    if k == 0:
        return mas.polytope
    blocks, T = slot_blocks(sys, k)
    fresh = np.vstack(blocks)
    H = np.vstack([fresh, mas.h0 @ T])
    h = np.concatenate([np.ones(fresh.shape[0]), mas.rhs0])
    return HPolytope(H, h)


class OpCounter:
    """Tally of scalar multiplications plus additions/subtractions."""

    def __init__(self):
        self.ops = 0

    def matvec(self, M, x):
        r, c = M.shape
        self.ops += r * c + r * max(c - 1, 0)
        return M @ x


def _matvec(M, x, counter):
    return M @ x if counter is None else counter.matvec(M, x)


def _affine_residual(Hx, Hv, h, x, v, counter):
    b = h - _matvec(Hx, x, counter)
    if counter is not None:
        counter.ops += Hx.shape[0]
    if Hv.shape[1]:
        b = b - _matvec(Hv, v, counter)
        if counter is not None:
            counter.ops += Hv.shape[0]
    return b


@dataclass(frozen=True, eq=False)
class MasStorage:
    """Per-slot access to the admissible sets.

    Complete mode keeps all N ``(H_k, h_k)``. Partial mode keeps ``H_0, h_0``
    and, for each slot k >= 1, the stacked fresh rows and the top (plant)
    rows of the trailing product A_{N-1} ... A_k; the bottom rows of that
    product are [0, I_d] by construction and are not stored.
    """

    mode: str
    period: int
    n: int
    d: int
    rhs_epsilon: float
    q: tuple = ()
    polytopes: Optional[List[HPolytope]] = None
    h0: Optional[np.ndarray] = None
    rhs0: Optional[np.ndarray] = None
    fresh: List[Optional[np.ndarray]] = field(default_factory=list)
    trailing: List[Optional[np.ndarray]] = field(default_factory=list)

    @property
    def m(self):
        return (self.polytopes[0].m if self.mode == COMPLETE else self.h0.shape[0])

    @property
    def floats(self):
        if self.mode == COMPLETE:
            return sum(P.H.size for P in self.polytopes)
        return self.h0.size + sum(F.size for F in self.fresh[1:]) + sum(T.size for T in self.trailing[1:])

    @property
    def bytes32(self):
        return BYTES_PER_FLOAT * self.floats

    def _trailing_full(self, k):
        s = self.n - self.d
        bottom = np.hstack([np.zeros((self.d, s)), np.eye(self.d)])
        return np.vstack([self.trailing[k], bottom])

    def slot_polytope(self, k):
        if not 0 <= k < self.period:
            raise IndexError(f"slot {k} outside [0, {self.period})")
        if self.mode == COMPLETE:
            return self.polytopes[k]
        if k == 0:
            return HPolytope(self.h0, self.rhs0)
        F = self.fresh[k]
        H = np.vstack([F, self.h0 @ self._trailing_full(k)])
        return HPolytope(H, np.concatenate([np.ones(F.shape[0]), self.rhs0]))

    def residual(self, slot, x_aug, counter=None):
        return residual(self, slot, x_aug, counter)

    def contains(self, slot, x_aug, tol=1e-9):
        _, b = residual(self, slot, x_aug)
        return bool(np.all(b >= -tol))


def build_storage(mas, sys, mode=PARTIAL, parallel=False):
    if mode not in (COMPLETE, PARTIAL):
        raise ValueError(f"unknown storage mode {mode!r}")
    N, n, d = sys.period, sys.n, sys.d
    common = dict(mode=mode, period=N, n=n, d=d, rhs_epsilon=mas.epsilon, q=tuple(sys.q))
    if mode == COMPLETE:
        if parallel and N > 1:
            with ThreadPoolExecutor() as pool:
                polys = list(pool.map(lambda k: expand_slot(mas, sys, k), range(N)))
        else:
            polys = [expand_slot(mas, sys, k) for k in range(N)]
        return MasStorage(polytopes=polys, **common)
    fresh, trailing = [None], [None]
    s = n - d
    for k in range(1, N):
        blocks, T = slot_blocks(sys, k)
        fresh.append(np.vstack(blocks))
        trailing.append(T[:s].copy())
    return MasStorage(h0=mas.h0, rhs0=mas.rhs0, fresh=fresh, trailing=trailing, **common)


def residual(st, slot, x_aug, counter=None):
    """Slack of the slot's constraints at ``x_aug`` and the held-input columns.

    Returns ``(Hv, b)`` with ``b = h - H_x x - H_v v`` and ``Hv`` the columns
    of H_slot multiplying the held-input part ``v`` of ``x_aug``. In partial
    mode the plant part is first mapped through the stored trailing product
    and the input columns are rebuilt as H_0x T_xv + H_0v, which is where the
    extra arithmetic over complete mode goes. Pass an ``OpCounter`` to tally
    the arithmetic.
    """
    if not 0 <= slot < st.period:
        raise IndexError(f"slot {slot} outside [0, {st.period})")
    x_aug = np.asarray(x_aug, dtype=float).ravel()
    if x_aug.size != st.n:
        raise ValueError(f"state has length {x_aug.size}, expected {st.n}")
    s = st.n - st.d
    x, v = x_aug[:s], x_aug[s:]

    if st.mode == COMPLETE or slot == 0:
        P = st.polytopes[slot] if st.mode == COMPLETE else HPolytope(st.h0, st.rhs0)
        Hx, Hv = P.H[:, :s], P.H[:, s:]
        return Hv, _affine_residual(Hx, Hv, P.h, x, v, counter)

    F = st.fresh[slot]
    Fx, Fv = F[:, :s], F[:, s:]
    b_fresh = _affine_residual(Fx, Fv, np.ones(F.shape[0]), x, v, counter)

    T = st.trailing[slot]
    T_xx, T_xv = T[:, :s], T[:, s:]
    H0x, H0v = st.h0[:, :s], st.h0[:, s:]
    z = _matvec(T_xx, x, counter)
    Hv0 = H0x @ T_xv + H0v
    if counter is not None:
        # each of the m*d entries: s products, s-1 sums inside, one sum with H0v
        counter.ops += Hv0.size * (2 * s)
    b_tail = _affine_residual(H0x, Hv0, st.rhs0, z, v, counter)
    return np.vstack([Fv, Hv0]), np.concatenate([b_fresh, b_tail])
