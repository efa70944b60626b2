"""Deterministic report serialization.

Every emitter here is byte-stable: dict keys are sorted, floats render via
repr, and non-finite values are rejected rather than smuggled into output.
The config hash ties each record back to the exact (canonicalized) run
configuration that produced it.
"""

import hashlib
import json

import numpy as np


def config_hash(canonical_text):
    if isinstance(canonical_text, str):
        canonical_text = canonical_text.encode("utf-8")
    return hashlib.sha256(canonical_text).hexdigest()


def _plain(obj):
    """Recursively coerce numpy scalars/arrays so json sees pure Python."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def dumps(obj):
    """Single JSON document, newline-terminated."""
    return json.dumps(_plain(obj), sort_keys=True, indent=2,
                      allow_nan=False) + "\n"


def dump_lines(records):
    """JSON-lines: one compact object per record."""
    return "".join(
        json.dumps(_plain(r), sort_keys=True, allow_nan=False) + "\n"
        for r in records)


def records_csv(records, columns):
    """CSV with a fixed column order; floats rendered via repr."""
    rows = [",".join(columns)]
    for rec in records:
        cells = []
        for col in columns:
            v = _plain(rec[col])
            if isinstance(v, float):
                if v != v or v in (float("inf"), float("-inf")):
                    raise ValueError(f"non-finite value in column {col}")
                cells.append(repr(v))
            else:
                cells.append(str(v))
        rows.append(",".join(cells))
    return "\n".join(rows) + "\n"


def trajectory_csv(trajectory, decimate=1):
    """Classical trajectory as CSV (t, x1, x2, z, v1, v2, vz).

    decimate keeps every decimate-th stored sample.  Requires a full-state
    record.
    """
    if decimate < 1:
        raise ValueError("decimate must be >= 1")
    trajectory._require_full()
    t = trajectory.t[::decimate]
    x = trajectory.x[::decimate]
    v = trajectory.v[::decimate]
    lines = ["t,x1,x2,z,v1,v2,vz"]
    for i in range(t.size):
        lines.append(",".join(repr(float(c)) for c in
                              (t[i], x[i, 0], x[i, 1], x[i, 2],
                               v[i, 0], v[i, 1], v[i, 2])))
    return "\n".join(lines) + "\n"


def attach_hash(records, digest):
    """Records with the provenance hash stamped into each one."""
    return [dict(r, config_hash=digest) for r in records]
