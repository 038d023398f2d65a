"""Table and JSON writers with a byte-stable format.

CSV: header row, UTF-8, LF line endings, floats as the shortest decimal that
round-trips (``repr``), integers and strings verbatim.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np


def format_value(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _jsonable(value):
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_jsonable(v) for v in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else repr(value)
    return value


def write_json(path, payload) -> Path:
    path = Path(path)
    text = json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n"
    path.write_text(text, encoding="utf-8", newline="\n")
    return path


def write_table(path, columns, rows, fmt: str = "csv") -> Path:
    """Write rows under ``columns`` as CSV or as JSON {"columns", "rows"}.

    ``path`` is given without extension; the format's suffix is appended.
    """
    path = Path(path)
    if fmt == "csv":
        target = path.with_suffix(".csv")
        with open(target, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(columns)
            for row in rows:
                writer.writerow([format_value(v) for v in row])
        return target
    if fmt == "json":
        target = path.with_suffix(".json")
        return write_json(target, {"columns": list(columns), "rows": [list(r) for r in rows]})
    raise ValueError(f"unknown table format {fmt!r}")


def read_csv(path) -> tuple[list[str], np.ndarray]:
    """Read a numeric CSV written by :func:`write_table`."""
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        data = [[float(x) for x in row] for row in reader]
    return header, np.asarray(data, dtype=np.float64)
