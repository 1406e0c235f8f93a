"""JSON system-definition files.

Layout (all matrices row-major nested lists, one entry per timeslot)::

    {
      "schema": "periodic-system/1",
      "period": 3,
      "a": [A_0, A_1, A_2],            # n x n each
      "c": [C_0, C_1, C_2],            # p x n each
      "s": [S_0, S_1, S_2],            # q_k x p each, rows scaled so rhs = 1
      "b": [B_0, B_1, B_2],            # optional: n-vectors, makes the file a plant
      "d_feedthrough": [D_0, ...],     # optional with "b": p-vectors, default 0
      "unit_block": 0,                 # optional for autonomous systems: d
      "epsilon": 0.05,                 # optional default tightening
      "labels": {"states": [...], ...} # optional, free-form
    }

Every parse error names the offending field, e.g. ``a[1][0]``.
"""

import json
import math

import numpy as np

from .errors import SchemaError
from .model import PeriodicSystem, PlantWithInput

SCHEMA = "periodic-system/1"
_KNOWN = {"schema", "period", "a", "c", "s", "b", "d_feedthrough", "unit_block", "epsilon", "labels"}


def _number(value, path):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaError(path, f"expected a number, got {type(value).__name__}")
    if not math.isfinite(value):
        raise SchemaError(path, "non-finite number")
    return float(value)


def _matrix(value, path, rows=None, cols=None):
    if not isinstance(value, list) or not value:
        raise SchemaError(path, "expected a non-empty list of rows")
    out = []
    for i, row in enumerate(value):
        if not isinstance(row, list):
            raise SchemaError(f"{path}[{i}]", "expected a list")
        if cols is not None and len(row) != cols:
            raise SchemaError(f"{path}[{i}]", f"expected {cols} entries, got {len(row)}")
        cols = len(row)
        out.append([_number(x, f"{path}[{i}][{j}]") for j, x in enumerate(row)])
    if rows is not None and len(out) != rows:
        raise SchemaError(path, f"expected {rows} rows, got {len(out)}")
    return np.array(out)


def _vector(value, path, size):
    if not isinstance(value, list):
        raise SchemaError(path, "expected a list")
    # accept both [1, 2] and [[1], [2]]
    flat = [v[0] if isinstance(v, list) and len(v) == 1 else v for v in value]
    if len(flat) != size:
        raise SchemaError(path, f"expected {size} entries, got {len(flat)}")
    return np.array([_number(x, f"{path}[{i}]") for i, x in enumerate(flat)])


def _per_slot(doc, key, period):
    if key not in doc:
        raise SchemaError(key, "missing required field")
    value = doc[key]
    if not isinstance(value, list) or len(value) != period:
        raise SchemaError(key, f"expected a list of {period} entries (one per timeslot)")
    return value


def parse_system(doc):
    """Build a PeriodicSystem or PlantWithInput from a decoded JSON document."""
    if not isinstance(doc, dict):
        raise SchemaError("", "top level must be an object")
    unknown = sorted(set(doc) - _KNOWN)
    if unknown:
        raise SchemaError(unknown[0], "unknown field")
    if doc.get("schema", SCHEMA) != SCHEMA:
        raise SchemaError("schema", f"unsupported schema {doc['schema']!r}, expected {SCHEMA!r}")
    period = doc.get("period")
    if isinstance(period, bool) or not isinstance(period, int) or period < 1:
        raise SchemaError("period", "expected a positive integer")

    a = [_matrix(m, f"a[{k}]") for k, m in enumerate(_per_slot(doc, "a", period))]
    n = a[0].shape[0]
    for k, A in enumerate(a):
        if A.shape != (n, n):
            raise SchemaError(f"a[{k}]", f"expected {n}x{n}, got {A.shape[0]}x{A.shape[1]}")
    c = [_matrix(m, f"c[{k}]", cols=n) for k, m in enumerate(_per_slot(doc, "c", period))]
    p = c[0].shape[0]
    for k, C in enumerate(c):
        if C.shape[0] != p:
            raise SchemaError(f"c[{k}]", f"expected {p} rows, got {C.shape[0]}")
    s = [_matrix(m, f"s[{k}]", cols=p) for k, m in enumerate(_per_slot(doc, "s", period))]
    labels = doc.get("labels")
    if labels is not None and not isinstance(labels, dict):
        raise SchemaError("labels", "expected an object")
    if "epsilon" in doc:
        eps = _number(doc["epsilon"], "epsilon")
        if not 0.0 < eps < 1.0:
            raise SchemaError("epsilon", "must lie in (0, 1)")

    if "b" in doc:
        if "unit_block" in doc:
            raise SchemaError("unit_block", "not allowed for plants; augmentation sets it")
        b = [_vector(v, f"b[{k}]", n) for k, v in enumerate(_per_slot(doc, "b", period))]
        if "d_feedthrough" in doc:
            dd = [_vector(v, f"d_feedthrough[{k}]", p)
                  for k, v in enumerate(_per_slot(doc, "d_feedthrough", period))]
        else:
            dd = [np.zeros(p) for _ in range(period)]
        return PlantWithInput(a, b, c, dd, s, labels=labels)
    if "d_feedthrough" in doc:
        raise SchemaError("d_feedthrough", "only allowed together with b")
    d = doc.get("unit_block", 0)
    if isinstance(d, bool) or not isinstance(d, int) or not 0 <= d <= n:
        raise SchemaError("unit_block", f"expected an integer in [0, {n}]")
    return PeriodicSystem(a, c, s, d=d, labels=labels)


def load_system(path):
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError("", f"invalid JSON: {exc}") from exc
    return parse_system(doc)


def system_to_dict(obj, epsilon=None):
    doc = {"schema": SCHEMA, "period": obj.period,
           "a": [A.tolist() for A in obj.a_mats],
           "c": [C.tolist() for C in obj.c_mats],
           "s": [S.tolist() for S in obj.s_mats]}
    if isinstance(obj, PlantWithInput):
        doc["b"] = [B[:, 0].tolist() for B in obj.b_mats]
        doc["d_feedthrough"] = [D[:, 0].tolist() for D in obj.d_mats]
    elif obj.d:
        doc["unit_block"] = obj.d
    if epsilon is not None:
        doc["epsilon"] = epsilon
    if obj.labels:
        doc["labels"] = obj.labels
    return doc


def save_system(obj, path, epsilon=None):
    with open(path, "w") as fh:
        json.dump(system_to_dict(obj, epsilon), fh, indent=2)
        fh.write("\n")
