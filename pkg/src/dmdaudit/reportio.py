"""Canonical report serialization: sorted-key JSON with floats rendered at
15 significant digits, CSV plot tables, and atomic file writes, so reruns
with the same inputs produce byte-identical outputs."""

from __future__ import annotations

import json
import math
import os
import tempfile
from pathlib import Path

__all__ = [
    "canonical",
    "canonical_json",
    "write_json",
    "write_csv",
    "format_float",
]

SCHEMA_VERSION = 1


def format_float(x: float) -> str:
    return format(float(x), ".15g")


def canonical(obj):
    """Recursively normalize floats to 15 significant digits.

    Non-finite floats become None; JSON has no representation for them and
    reports must stay loadable.
    """
    if isinstance(obj, bool) or obj is None:
        return obj
    if isinstance(obj, float):
        if not math.isfinite(obj):
            return None
        return float(format_float(obj))
    if isinstance(obj, int):
        return obj
    if isinstance(obj, dict):
        return {str(k): canonical(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [canonical(v) for v in obj]
    return obj


def canonical_json(obj) -> str:
    return json.dumps(canonical(obj), sort_keys=True, indent=2) + "\n"


def _write_atomic(path: Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json(path, obj) -> None:
    doc = dict(obj)
    doc.setdefault("schema_version", SCHEMA_VERSION)
    _write_atomic(Path(path), canonical_json(doc))


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return format_float(v) if math.isfinite(v) else repr(v)
    return str(v)


def write_csv(path, header, rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_cell(v) for v in row))
    _write_atomic(Path(path), "\n".join(lines) + "\n")
