"""CSV and JSON emission for tables and verification reports.

Both formats carry the schema tag ``gauss-convex v<version>``.  Floats are
written with ``repr`` so equal results give byte-identical files.
"""
from __future__ import annotations

import csv
import io
import json
import math
from typing import Iterable, Sequence

from . import __version__

SCHEMA = f"gauss-convex v{__version__}"
REPORT_COLUMNS = ("name", "body", "relation", "lhs", "lhs_se", "rhs", "rhs_se", "slack", "verdict", "seed", "samples")
FORMATS = ("csv", "json")


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _json_value(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def to_csv(rows: Sequence[dict], columns: Sequence[str]) -> str:
    buf = io.StringIO()
    buf.write(f"# {SCHEMA}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_cell(row.get(c)) for c in columns])
    return buf.getvalue()


def to_json(rows: Sequence[dict], columns: Sequence[str], kind: str = "table") -> str:
    doc = {
        "schema": SCHEMA,
        "kind": kind,
        "columns": list(columns),
        "rows": [{c: _json_value(row.get(c)) for c in columns} for row in rows],
    }
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"


def render(rows: Sequence[dict], columns: Sequence[str], fmt: str, kind: str = "table") -> str:
    if fmt not in FORMATS:
        raise ValueError(f"format must be one of {FORMATS}, got {fmt!r}")
    return to_csv(rows, columns) if fmt == "csv" else to_json(rows, columns, kind)


def report_rows(results: Iterable) -> list[dict]:
    return [r.row() for r in results]


def render_report(results: Iterable, fmt: str) -> str:
    return render(report_rows(results), REPORT_COLUMNS, fmt, kind="verification")


def read_csv(text: str) -> list[dict]:
    """Parse a CSV written by :func:`to_csv` (values stay strings)."""
    lines = text.splitlines()
    if not lines or not lines[0].startswith("# gauss-convex v"):
        raise ValueError("missing schema header line")
    return list(csv.DictReader(lines[1:]))
