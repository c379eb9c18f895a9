"""Deterministic CSV output."""
from __future__ import annotations

import csv
import io
import os
from typing import Iterable, List, Mapping, Sequence

import numpy as np

__all__ = ["format_value", "csv_text", "write_csv", "rows_to_columns"]


def format_value(v) -> str:
    """Full-precision text for floats (17 significant digits), ``str`` otherwise."""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def rows_to_columns(rows: Sequence[Mapping[str, object]]) -> List[str]:
    """Union of row keys in first-seen order (``pass_`` is written as ``pass``)."""
    cols: List[str] = []
    for row in rows:
        for k in row:
            if k not in cols:
                cols.append(k)
    return cols


def csv_text(columns: Sequence[str], rows: Iterable[Mapping[str, object]], comment: str = "") -> str:
    buf = io.StringIO()
    if comment:
        buf.write(f"# {comment}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([c.rstrip("_") for c in columns])
    for row in rows:
        w.writerow([format_value(row[c]) if c in row else "" for c in columns])
    return buf.getvalue()


def write_csv(path: str, columns: Sequence[str], rows: Iterable[Mapping[str, object]],
              comment: str = "") -> str:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    text = csv_text(columns, rows, comment)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    return path
