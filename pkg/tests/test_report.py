import json
import math

import pytest

from gauss_convex.report import REPORT_COLUMNS, SCHEMA, read_csv, render, render_report, to_csv, to_json
from gauss_convex.sampling import Estimate
from gauss_convex.verify import compare

ROWS = [{"a": 0.1, "b": "x,y", "c": None}, {"a": 1 / 3, "b": "z", "c": 7}]


def test_csv_round_trip():
    text = to_csv(ROWS, ("a", "b", "c"))
    assert text.splitlines()[0] == f"# {SCHEMA}"
    rows = read_csv(text)
    assert rows[0] == {"a": "0.1", "b": "x,y", "c": ""}
    assert float(rows[1]["a"]) == 1 / 3
    with pytest.raises(ValueError):
        read_csv("a,b\n1,2\n")


def test_json_document():
    doc = json.loads(to_json(ROWS + [{"a": math.nan, "b": "", "c": math.inf}], ("a", "b", "c"), "table"))
    assert doc["schema"] == SCHEMA and doc["kind"] == "table"
    assert doc["columns"] == ["a", "b", "c"]
    assert doc["rows"][2] == {"a": None, "b": "", "c": None}


def test_render_dispatch():
    assert render(ROWS, ("a",), "csv") == to_csv(ROWS, ("a",))
    with pytest.raises(ValueError):
        render(ROWS, ("a",), "xml")


def test_verification_report_columns():
    result = compare("poincare", Estimate(0.3, 0.01, 100, 5), Estimate(0.1, 0.0), ">=", body="slab_n2")
    rows = read_csv(render_report([result], "csv"))
    assert tuple(rows[0]) == REPORT_COLUMNS
    assert rows[0]["verdict"] == "pass" and rows[0]["seed"] == "5" and rows[0]["body"] == "slab_n2"
    doc = json.loads(render_report([result], "json"))
    assert doc["kind"] == "verification" and doc["rows"][0]["slack"] == pytest.approx(0.03)
