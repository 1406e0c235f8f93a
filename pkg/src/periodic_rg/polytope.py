"""Halfspace polytopes {x : H x <= h} and the LP-based queries on them."""

import io
from dataclasses import dataclass

import numpy as np

from .errors import PolytopeError
from .lp import INFEASIBLE, maximize

REDUNDANCY_TOL = 1e-9
VERTEX_DEDUP_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class HPolytope:
    H: np.ndarray
    h: np.ndarray

    def __post_init__(self):
        H = np.array(self.H, dtype=float)
        h = np.array(self.h, dtype=float).ravel()
        if H.ndim != 2:
            raise ValueError(f"H must be 2-D, got shape {H.shape}")
        if H.shape[0] != h.size:
            raise ValueError(f"H has {H.shape[0]} rows but h has {h.size} entries")
        H.setflags(write=False)
        h.setflags(write=False)
        object.__setattr__(self, "H", H)
        object.__setattr__(self, "h", h)

    @classmethod
    def whole_space(cls, dim):
        return cls(np.zeros((0, dim)), np.zeros(0))

    @classmethod
    def box(cls, lower, upper):
        lower = np.asarray(lower, dtype=float)
        upper = np.asarray(upper, dtype=float)
        eye = np.eye(lower.size)
        return cls(np.vstack([eye, -eye]), np.concatenate([upper, -lower]))

    @property
    def dim(self):
        return self.H.shape[1]

    @property
    def m(self):
        return self.H.shape[0]

    def intersect(self, other):
        return HPolytope(np.vstack([self.H, other.H]), np.concatenate([self.h, other.h]))

    def __repr__(self):
        return f"HPolytope(m={self.m}, dim={self.dim})"


def _check_dim(P, vec, what):
    if vec.size != P.dim:
        raise ValueError(f"{what} has length {vec.size}, polytope dimension is {P.dim}")


def contains(P, x, tol=1e-9):
    x = np.asarray(x, dtype=float).ravel()
    _check_dim(P, x, "point")
    return bool(np.all(P.H @ x <= P.h + tol))


def support(P, direction):
    """max direction'z over P, as an LpOutcome."""
    direction = np.asarray(direction, dtype=float).ravel()
    _check_dim(P, direction, "direction")
    return maximize(direction, P.H, P.h)


def _exceeds(value, rhs, tol):
    return value > rhs + tol * max(1.0, abs(rhs))


def append_nonredundant(P, rows, rhs, tol=REDUNDANCY_TOL):
    """Append each candidate row that cuts the current polytope.

    Rows are screened in order and each one is tested against the polytope
    including rows accepted earlier in the same call. A row ``y z <= r`` is
    kept when ``max y z`` over the polytope exceeds ``r`` (relative ``tol``)
    or is unbounded.

    Returns
    -------
    (HPolytope, int)
        The enlarged polytope and the number of rows appended.
    """
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    rhs = np.asarray(rhs, dtype=float).ravel()
    if rows.size == 0:
        return P, 0
    if rows.shape[1] != P.dim or rows.shape[0] != rhs.size:
        raise ValueError(f"candidate rows {rows.shape} / rhs {rhs.size} do not match dimension {P.dim}")
    H, h = list(P.H), list(P.h)
    appended = 0
    for y, r in zip(rows, rhs):
        out = maximize(y, np.array(H).reshape(-1, P.dim), np.array(h))
        if out.status == INFEASIBLE:
            raise PolytopeError("cannot screen rows against an empty polytope")
        if out.unbounded or _exceeds(out.value, r, tol):
            H.append(y)
            h.append(r)
            appended += 1
    if not appended:
        return P, 0
    return HPolytope(np.array(H), np.array(h)), appended


def inclusion_violations(P, Q, tol=1e-7):
    """Rows of Q not implied on all of P, as (row index, reason) pairs."""
    bad = []
    for i, (q, r) in enumerate(zip(Q.H, Q.h)):
        out = support(P, q)
        if out.status == INFEASIBLE:
            return []
        if out.unbounded:
            bad.append((i, "unbounded"))
        elif out.value > r + tol:
            bad.append((i, f"support {out.value:.12g} > {r:.12g}"))
    return bad


def is_subset(P, Q, tol=1e-7):
    """P is contained in Q."""
    if P.dim != Q.dim:
        raise ValueError("dimension mismatch")
    return not inclusion_violations(P, Q, tol)


def set_equal(P, Q, tol=1e-7):
    """Mutual inclusion, each direction decided by one LP per row."""
    return is_subset(P, Q, tol) and is_subset(Q, P, tol)


def bounding_box(P):
    """Axis-aligned bounds (lower, upper) from coordinate supports."""
    lo, hi = np.empty(P.dim), np.empty(P.dim)
    for i in range(P.dim):
        e = np.zeros(P.dim)
        e[i] = 1.0
        up, down = support(P, e), support(P, -e)
        if up.status == INFEASIBLE:
            raise PolytopeError("polytope is empty")
        if up.unbounded or down.unbounded:
            raise PolytopeError(f"polytope is unbounded along coordinate {i}")
        hi[i], lo[i] = up.value, -down.value
    return lo, hi


def is_bounded(P):
    try:
        bounding_box(P)
    except PolytopeError:
        return False
    return True


def sample(P, count, rng, max_tries=1_000_000):
    """Uniform samples from P by rejection in its bounding box."""
    lo, hi = bounding_box(P)
    out = []
    tries = 0
    while len(out) < count:
        batch = rng.uniform(lo, hi, size=(max(64, 4 * (count - len(out))), P.dim))
        tries += len(batch)
        ok = np.all(batch @ P.H.T <= P.h, axis=1)
        out.extend(batch[ok])
        if tries > max_tries and len(out) < count:
            raise PolytopeError("rejection sampling acceptance rate too low")
    return np.array(out[:count])


def vertices_2d(P, tol=1e-9):
    """Extreme points of a bounded planar polytope, counterclockwise."""
    if P.dim != 2:
        raise PolytopeError(f"vertices_2d needs a 2-D polytope, got dimension {P.dim}")
    bounding_box(P)
    H, h = P.H, P.h
    pts = []
    for i in range(P.m):
        for j in range(i + 1, P.m):
            M = H[[i, j]]
            if abs(np.linalg.det(M)) < 1e-12 * max(1.0, np.abs(M).max() ** 2):
                continue
            v = np.linalg.solve(M, h[[i, j]])
            scale = np.maximum(1.0, np.abs(h))
            if np.all(H @ v <= h + tol * scale):
                if all(np.linalg.norm(v - w) > VERTEX_DEDUP_TOL for w in pts):
                    pts.append(v)
    if len(pts) < 3:
        raise PolytopeError("polytope has empty interior")
    pts = np.array(pts)
    centre = pts.mean(axis=0)
    order = np.argsort(np.arctan2(pts[:, 1] - centre[1], pts[:, 0] - centre[0]))
    return pts[order]


def to_csv(P):
    buf = io.StringIO()
    cols = [f"h{j + 1}" for j in range(P.dim)] + ["rhs"]
    buf.write(",".join(cols) + "\n")
    for row, r in zip(P.H, P.h):
        buf.write(",".join(repr(float(x)) for x in row) + f",{float(r)!r}\n")
    return buf.getvalue()


def from_csv(text):
    lines = [ln for ln in text.strip().splitlines() if ln.strip()]
    data = np.array([[float(x) for x in ln.split(",")] for ln in lines[1:]])
    dim = len(lines[0].split(",")) - 1
    if data.size == 0:
        return HPolytope.whole_space(dim)
    return HPolytope(data[:, :-1], data[:, -1])


def vertices_csv(vertices):
    return "x,y\n" + "".join(f"{float(x)!r},{float(y)!r}\n" for x, y in np.asarray(vertices, dtype=float))
