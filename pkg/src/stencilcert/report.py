"""Deterministic text serialization for reports.

Floats are written with 17 significant digits so that every double
round-trips; non-finite values become the strings ``"inf"``, ``"-inf"`` and
``"nan"``.  Key order is insertion order, so equal inputs give equal bytes.
"""
from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np


def format_float(x: float) -> str:
    x = float(x)
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    return "%.17g" % x


def _encode(obj, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None or isinstance(obj, (bool, np.bool_)):
        return json.dumps(None if obj is None else bool(obj))
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return format_float(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in obj):
            return "[" + ", ".join(_encode(v, indent, level + 1) for v in obj) + "]"
        items = ",\n".join(pad + _encode(v, indent, level + 1) for v in obj)
        return "[\n" + items + "\n" + end + "]"
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = ",\n".join(
            pad + json.dumps(str(k)) + ": " + _encode(v, indent, level + 1) for k, v in obj.items()
        )
        return "{\n" + items + "\n" + end + "}"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj, indent: int = 2) -> str:
    """JSON text with full-precision floats and a trailing newline."""
    return _encode(obj, indent, 0) + "\n"


def csv_text(rows, header: list[str] | None = None) -> str:
    """CSV with ``%.17g`` numbers; `rows` is a 1-D or 2-D sequence."""
    lines = [] if header is None else [",".join(header)]
    for row in rows:
        if np.ndim(row) == 0:
            row = [row]
        lines.append(",".join("%.17g" % float(v) for v in row))
    return "\n".join(lines) + "\n"


def write_text(path: str | Path, text: str) -> None:
    path = Path(path)
    if path.parent != Path(""):
        path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
