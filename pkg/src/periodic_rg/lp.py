"""Dense two-phase simplex for small inequality-form linear programs.

Solves ``max c'z  s.t.  A z <= b`` with ``z`` free. The problem is put in
standard form by splitting ``z = z_plus - z_minus`` and adding one slack per
row; rows with a negative right-hand side are negated and receive an
artificial variable for phase 1. Pivoting uses Bland's rule throughout, so
the method cannot cycle on degenerate vertices, and the tableau is
refactored from the basis after each pivot to stay accurate on nearly
parallel constraints.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import LpIterationLimit

OPTIMAL = "optimal"
UNBOUNDED = "unbounded"
INFEASIBLE = "infeasible"

PIVOT_TOL = 1e-10
PIVOT_REL = 1e-11


@dataclass(frozen=True)
class LpOutcome:
    status: str
    value: Optional[float] = None
    point: Optional[np.ndarray] = None
    # multipliers y >= 0 with A'y = c, read off the final basis
    dual: Optional[np.ndarray] = None

    @property
    def optimal(self):
        return self.status == OPTIMAL

    @property
    def unbounded(self):
        return self.status == UNBOUNDED


def _pivot(T, rhs, basis, row, col):
    piv = T[row, col]
    T[row] /= piv
    rhs[row] /= piv
    for i in range(T.shape[0]):
        if i != row and T[i, col] != 0.0:
            f = T[i, col]
            T[i] -= f * T[row]
            rhs[i] -= f * rhs[row]
    basis[row] = col


def _refactor(T0, rhs0, T, rhs, basis):
    """Rebuild the tableau from the original data and the current basis."""
    B = T0[:, basis]
    try:
        T[:] = np.linalg.solve(B, T0)
        rhs[:] = np.linalg.solve(B, rhs0)
    except np.linalg.LinAlgError:
        pass


def _leaving_row(col, rhs, basis, tol):
    """Minimum-ratio test with Bland's lowest basic index among ties.

    A row ties with the minimizer when its slack after the step would be
    within ``tol`` of zero; comparing slacks rather than raw ratios keeps
    ties meaningful on short, steep edges. Entries that are negligible next
    to the largest one in the column are treated as zero, and slightly
    negative right-hand sides count as zero.
    """
    rows = np.flatnonzero(col > max(tol, PIVOT_REL * np.abs(col).max()))
    if rows.size == 0:
        return None
    r = np.maximum(rhs[rows], 0.0)
    best = np.min(r / col[rows])
    ties = rows[r - best * col[rows] <= tol * max(1.0, r.max())]
    return min(ties, key=lambda i: basis[i])


def _simplex(T, rhs, basis, cost, allowed, budget, tol, T0, rhs0):
    """Maximize ``cost'w`` over the tableau in place. Returns (status, iterations).

    The tableau is rebuilt from ``T0`` after every pivot, which keeps a
    small pivot from leaking round-off into later ratio tests.
    """
    iters = 0
    _refactor(T0, rhs0, T, rhs, basis)
    while True:
        reduced = cost - cost[basis] @ T
        reduced[basis] = 0.0
        entering = next((j for j in allowed if reduced[j] > tol), None)
        if entering is None:
            return OPTIMAL, iters
        leave = _leaving_row(T[:, entering], rhs, basis, tol)
        if leave is None:
            return UNBOUNDED, iters
        if iters >= budget:
            raise LpIterationLimit(f"simplex exceeded {budget} pivots")
        _pivot(T, rhs, basis, leave, entering)
        _refactor(T0, rhs0, T, rhs, basis)
        iters += 1


def maximize(c, A, b, *, tol=PIVOT_TOL, max_iter=None):
    """Maximize ``c @ z`` subject to ``A @ z <= b`` with ``z`` unrestricted.

    Parameters
    ----------
    c : array_like, shape (n,)
    A : array_like, shape (m, n); ``m`` may be zero.
    b : array_like, shape (m,)
    tol : float
        Pivot and reduced-cost tolerance.
    max_iter : int, optional
        Pivot budget over both phases, ``50 * (m + n)`` by default.

    Returns
    -------
    LpOutcome
        ``value``, ``point`` and ``dual`` are populated only when optimal.

    Raises
    ------
    ValueError
        On inconsistent dimensions.
    LpIterationLimit
        If the pivot budget is exhausted.
    """
    c = np.asarray(c, dtype=float).ravel()
    n = c.size
    A = np.asarray(A, dtype=float)
    if A.size == 0:
        A = A.reshape(0, n)
    b = np.asarray(b, dtype=float).ravel()
    if A.ndim != 2 or A.shape[1] != n or A.shape[0] != b.size:
        raise ValueError(f"dimension mismatch: c has {n}, A is {A.shape}, b has {b.size}")
    m = A.shape[0]
    if max_iter is None:
        max_iter = 50 * (m + n)

    if m == 0:
        if np.any(c != 0.0):
            return LpOutcome(UNBOUNDED)
        return LpOutcome(OPTIMAL, 0.0, np.zeros(n), np.zeros(0))

    sign = np.where(b < 0.0, -1.0, 1.0)
    art_rows = np.flatnonzero(b < 0.0)
    n_art = art_rows.size
    n_std = 2 * n + m
    # standard-form matrix [A, -A, I] with row signs folded in
    std = sign[:, None] * np.hstack([A, -A, np.eye(m)])
    T = np.hstack([std, np.zeros((m, n_art))])
    T[art_rows, n_std + np.arange(n_art)] = 1.0
    rhs = sign * b
    basis = [2 * n + i for i in range(m)]
    for k, i in enumerate(art_rows):
        basis[i] = n_std + k

    budget = max_iter
    T0, rhs0 = T.copy(), rhs.copy()
    if n_art:
        cost1 = np.zeros(n_std + n_art)
        cost1[n_std:] = -1.0
        _, used = _simplex(T, rhs, basis, cost1, range(n_std + n_art), budget, tol, T0, rhs0)
        budget -= used
        if rhs[[i for i, j in enumerate(basis) if j >= n_std]].sum() > 1e-9 * max(1.0, np.abs(b).max()):
            return LpOutcome(INFEASIBLE)
        # drive zero-level artificials out; [A,-A,I] has full row rank so a pivot always exists
        for i, j in enumerate(basis):
            if j >= n_std:
                k = int(np.argmax(np.abs(T[i, :n_std])))
                _pivot(T, rhs, basis, i, k)

    cost2 = np.zeros(n_std + n_art)
    cost2[:n] = c
    cost2[n:2 * n] = -c
    status, _ = _simplex(T, rhs, basis, cost2, range(n_std), budget, tol, T0, rhs0)
    if status == UNBOUNDED:
        return LpOutcome(UNBOUNDED)

    # re-solve with the final basis for accuracy instead of trusting the tableau
    Bmat = std[:, basis]
    w_basic = np.linalg.solve(Bmat, sign * b)
    w = np.zeros(n_std)
    w[basis] = w_basic
    point = w[:n] - w[n:2 * n]
    u = np.linalg.solve(Bmat.T, cost2[basis])
    dual = sign * u
    return LpOutcome(OPTIMAL, float(c @ point), point, dual)
