"""CSV and JSON emission. Floats are written with ``repr`` so identical
inputs give byte-identical files."""

from __future__ import annotations

import csv
import io
import json

import numpy as np


def _cell(x):
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def csv_text(columns, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_cell(x) for x in row])
    return buf.getvalue()


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def json_text(obj):
    return json.dumps(_plain(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


def table_json(kind, columns, rows):
    return json_text({"kind": kind, "columns": list(columns), "rows": [list(r) for r in rows]})


def read_csv(text):
    """Parse CSV text back into (columns, float rows)."""
    reader = csv.reader(io.StringIO(text))
    columns = next(reader)
    return columns, [[float(x) for x in row] for row in reader]
