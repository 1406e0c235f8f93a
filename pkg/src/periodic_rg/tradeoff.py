"""Memory saved versus extra arithmetic when only the slot-0 set is stored.

Counts follow the usual embedded convention: 4 bytes per stored float, and
one multiply or one add/subtract each count as one operation. ``n`` is the
plant state dimension (without the held-input states) and ``m`` the number
of rows of H_0.
"""

from dataclasses import dataclass, field
from typing import List

import numpy as np

from .mas import BYTES_PER_FLOAT, OpCounter

F1 = "f1"
F2 = "f2"


def formula_f1(N, n, m):
    """(bytes saved, extra operations per step) for the fixed-input governor."""
    return 4 * (N - 1) * (n + 1) * (m - n), n * (2 * m + 2 * n - 1)


def formula_f2(N, n, m):
    """Same for the periodic-input governor (closed forms stated for N = 3)."""
    return 4 * (N - 1) * (n + 3) * (m - n), n * (6 * m + 2 * n - 1)


FORMULAS = {F1: formula_f1, F2: formula_f2}


def complete_floats(N, n, m, q, inputs=1):
    """Floats for all N matrices H_k with uniform q rows per constraint set."""
    w = n + inputs
    return N * m * w + N * (N - 1) // 2 * q * w


def partial_floats(N, n, m, q, inputs=1):
    """Floats for H_0, the fresh constraint blocks and N-1 trailing products."""
    w = n + inputs
    return m * w + N * (N - 1) // 2 * q * w + (N - 1) * n * w


@dataclass(frozen=True)
class SweepRow:
    m: int
    bytes_saved: int
    extra_ops: int


def sweep(N, n, m_values, formulation=F1):
    m_values = list(m_values)
    if not m_values:
        raise ValueError("m range is empty")
    fn = FORMULAS[formulation]
    return [SweepRow(m, *fn(N, n, m)) for m in m_values]


def affine_fit(rows):
    """Least-squares line bytes_saved = slope * extra_ops + intercept.

    Returns (slope, intercept, max absolute residual).
    """
    ops = np.array([r.extra_ops for r in rows], dtype=float)
    saved = np.array([r.bytes_saved for r in rows], dtype=float)
    if ops.size < 2:
        raise ValueError("need at least two points")
    slope, intercept = np.polyfit(ops, saved, 1)
    resid = saved - (slope * ops + intercept)
    return float(slope), float(intercept), float(np.abs(resid).max())


def sweep_csv(tables):
    """CSV with one block per (N, n, formulation) sweep."""
    lines = ["formulation,N,n,m,bytes_saved,extra_ops"]
    for (formulation, N, n), rows in tables:
        lines += [f"{formulation},{N},{n},{r.m},{r.bytes_saved},{r.extra_ops}" for r in rows]
    return "\n".join(lines) + "\n"


@dataclass
class TradeoffReport:
    formulation: str
    N: int
    n: int
    m: int
    q: tuple
    formula_bytes_saved: int
    formula_extra_ops: int
    measured_bytes_complete: int
    measured_bytes_partial: int
    measured_extra_ops: int
    extra_ops_per_slot: List[int] = field(default_factory=list)
    formula_bytes_complete: int = 0
    formula_bytes_partial: int = 0

    @property
    def uniform_q(self):
        return len(set(self.q)) <= 1

    @property
    def measured_bytes_saved(self):
        return self.measured_bytes_complete - self.measured_bytes_partial

    def text(self):
        qnote = "" if self.uniform_q else "  (formula assumes uniform q; per-slot q differs)"
        return "\n".join([
            f"formulation: {self.formulation}",
            f"N={self.N} n={self.n} m={self.m} q={list(self.q)}{qnote}",
            f"complete storage: measured {self.measured_bytes_complete} B, uniform-q formula {self.formula_bytes_complete} B",
            f"partial storage:  measured {self.measured_bytes_partial} B, uniform-q formula {self.formula_bytes_partial} B",
            f"bytes saved: measured {self.measured_bytes_saved}, closed form {self.formula_bytes_saved}",
            f"extra ops per step: measured {self.measured_extra_ops} (per slot {self.extra_ops_per_slot}), "
            f"closed form {self.formula_extra_ops}",
        ]) + "\n"


def extra_ops_per_slot(storage_complete, storage_partial, x_aug=None):
    """Instrumented residual cost difference, partial minus complete, per slot."""
    if x_aug is None:
        x_aug = np.zeros(storage_complete.n)
    out = []
    for k in range(storage_complete.period):
        cc, cp = OpCounter(), OpCounter()
        storage_complete.residual(k, x_aug, cc)
        storage_partial.residual(k, x_aug, cp)
        out.append(cp.ops - cc.ops)
    return out


def measure(storage_complete, storage_partial, formulation=F1, x_aug=None):
    """Measured bytes and operation counts next to the closed forms.

    The measured extra cost is the largest per-step difference over one
    period; slot 0 never needs the transformation and costs nothing extra.
    """
    N = storage_complete.period
    d = storage_complete.d
    n = storage_complete.n - d
    m = storage_complete.m
    q = storage_complete.q
    per_slot = extra_ops_per_slot(storage_complete, storage_partial, x_aug)
    saved, ops = FORMULAS[formulation](N, n, m)
    q0 = q[0] if q else 0
    return TradeoffReport(
        formulation=formulation, N=N, n=n, m=m, q=tuple(q),
        formula_bytes_saved=saved, formula_extra_ops=ops,
        measured_bytes_complete=storage_complete.bytes32,
        measured_bytes_partial=storage_partial.bytes32,
        measured_extra_ops=max(per_slot),
        extra_ops_per_slot=per_slot,
        formula_bytes_complete=BYTES_PER_FLOAT * complete_floats(N, n, m, q0, d),
        formula_bytes_partial=BYTES_PER_FLOAT * partial_floats(N, n, m, q0, d),
    )
