"""Deterministic JSON and CSV writers for traces and reports.

JSON floats are written with 17 significant digits so every value
round-trips exactly and output is byte-stable across runs.
"""

from __future__ import annotations

import csv
import io
import json
import math

import numpy as np


def format_float(x: float, digits: int = 17) -> str:
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"cannot serialize non-finite value {x!r}")
    s = format(x, f".{digits}g")
    if not any(ch in s for ch in ".en"):
        s += ".0"
    return s


def _scalar(v) -> str:
    if v is None:
        return "null"
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format_float(v)
    if isinstance(v, str):
        return json.dumps(v)
    raise TypeError(f"unsupported type {type(v).__name__}")


def _is_flat(seq) -> bool:
    return all(not isinstance(v, (list, tuple, dict)) for v in seq)


def _encode(obj, level: int) -> str:
    pad = "  " * (level + 1)
    end = "  " * level
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_encode(v, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        obj = list(obj)
        if not obj:
            return "[]"
        if _is_flat(obj):
            return "[" + ", ".join(_scalar(v) for v in obj) + "]"
        if all(isinstance(v, (list, tuple, np.ndarray)) and _is_flat(v) for v in obj):
            rows = [f"{pad}{_encode(v, level + 1)}" for v in obj]
            return "[\n" + ",\n".join(rows) + "\n" + end + "]"
        rows = [f"{pad}{_encode(v, level + 1)}" for v in obj]
        return "[\n" + ",\n".join(rows) + "\n" + end + "]"
    return _scalar(obj)


def dumps(obj) -> str:
    """Serialize ``obj`` (dicts, lists, scalars) to indented JSON text."""
    return _encode(obj, 0) + "\n"


def trace_csv(trace) -> str:
    """One row per outer iterate; floats with 17 significant digits."""
    n = trace.directions.dimension
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["k", "alpha", "l", "f", "evals", "grad_norm", "status"] + [f"x_{i + 1}" for i in range(n)])
    for r in trace.iterates:
        w.writerow(
            [r.k, format_float(r.alpha), r.l, format_float(r.f), r.evals,
             "" if r.grad_norm is None else format_float(r.grad_norm), r.status]
            + [format_float(v) for v in r.x]
        )
    return buf.getvalue()


def read_trace_csv(text: str) -> list[dict]:
    rows = []
    for row in csv.DictReader(io.StringIO(text)):
        xs = [float(v) for k, v in row.items() if k.startswith("x_")]
        rows.append({
            "k": int(row["k"]),
            "alpha": float(row["alpha"]),
            "l": int(row["l"]),
            "f": float(row["f"]),
            "evals": int(row["evals"]),
            "grad_norm": None if row["grad_norm"] == "" else float(row["grad_norm"]),
            "status": row["status"],
            "x": xs,
        })
    return rows
