import math

import numpy as np
import pytest

from gauss_convex.bodies import make_cube, random_orthogonal
from gauss_convex.bodyspec import BodySpecError, body_from_dict, dump_body_spec, load_body_spec, parse_body_spec

NESTED = """\
kind: intersect
parts:
  - kind: slab
    axis: 0
    c: 1.0
    n: 3
  - kind: rotate
    angle_deg: 45
    plane: [0, 1]
    child:
      kind: cube
      r: 0.8
      n: 3
"""


def test_simple_kinds():
    ball = parse_body_spec("kind: ball\nr: 2.0\nn: 4\n")
    assert ball.kind == "ball" and ball.n == 4 and ball.r == 2.0
    slab = parse_body_spec("kind: slab\nv: [3, 4]\nc: 0.5\n")
    assert slab.n == 2 and slab.contains([0.3, 0.3]) and not slab.contains([0.5, 0.5])
    np.testing.assert_allclose(slab.normal, [0.6, 0.8])
    pair = parse_body_spec("kind: halfspace_pair\naxis: 1\nn: 3\nc: 1\n")
    assert pair.contains([5.0, 0.9, 5.0]) and not pair.contains([0.0, 1.1, 0.0])
    ell = parse_body_spec("kind: ellipsoid\nsemiaxes: [1, 2, 3]\n")
    assert ell.n == 3


def test_nested_spec():
    body = parse_body_spec(NESTED)
    assert body.kind == "intersect" and body.n == 3
    s = 0.8 * math.sqrt(2) - 0.01
    assert body.contains([0.0, s, 0.0])
    assert not body.contains([0.0, 0.8 * math.sqrt(2) + 0.01, 0.0])


def test_linear_kind():
    Q = random_orthogonal(2, 1)
    text = f"kind: linear\nmatrix: {Q.tolist()}\nchild:\n  kind: cube\n  r: 1\n  n: 2\n"
    body = parse_body_spec(text)
    assert body.gaussian_volume() == pytest.approx(make_cube(1.0, 2).gaussian_volume())


@pytest.mark.parametrize("text,line,column,fragment", [
    ("kind: ball\nr: 2\n", 1, 1, "requires field 'n'"),
    ("kind: ball\nr: -2\nn: 3\n", 2, 4, "positive"),
    ("kind: blob\nr: 1\n", 1, 7, "unknown kind"),
    ("kind: ball\nr: 1\nn: 3\ncolour: red\n", 4, 9, "unknown field"),
    ("kind: cube\nr: one\nn: 3\n", 2, 4, "must be a number"),
    ("kind: slab\naxis: 3\nn: 3\nc: 1\n", 2, 7, "out of range"),
    ("kind: slab\nv: [0, 0]\nc: 1\n", 2, 4, "nonzero"),
    (NESTED.replace("n: 3\n  - kind", "n: 2\n  - kind"), 3, 3, "different dimensions"),
    (NESTED.replace("plane: [0, 1]", "plane: [0, 0]"), 9, 12, "invalid rotation plane"),
    ("kind: linear\nmatrix: [[2, 0], [0, 1]]\nchild: {kind: cube, r: 1, n: 2}\n", 2, 9, "orthogonal"),
    ("kind: ball\nr: [1\n", 3, 1, ""),
])
def test_errors_carry_positions(text, line, column, fragment):
    with pytest.raises(BodySpecError) as info:
        parse_body_spec(text, "body.yaml")
    err = info.value
    assert (err.line, err.column) == (line, column)
    assert fragment in err.message
    assert str(err).startswith(f"body.yaml:{line}:{column}: ")


def test_empty_and_missing():
    with pytest.raises(BodySpecError):
        parse_body_spec("")
    with pytest.raises(BodySpecError, match="no such spec file"):
        load_body_spec("/nonexistent/body.yaml")


def test_overrides_apply_to_top_level_only():
    body = parse_body_spec("kind: ball\nr: 1\nn: 3\n", overrides={"n": 5, "r": 2.0})
    assert (body.n, body.r) == (5, 2.0)
    slab = parse_body_spec("kind: slab\naxis: 0\nn: 2\nc: 1\n", overrides={"c": 0.5, "r": None})
    assert slab.c == 0.5
    nested = parse_body_spec(NESTED, overrides={"n": 7})
    assert nested.n == 3


def test_load_from_file_and_inline(tmp_path):
    path = tmp_path / "cube.yaml"
    path.write_text("kind: cube\nr: 0.5\nn: 2\n")
    assert load_body_spec(str(path)).r == 0.5
    assert load_body_spec("{kind: ball, r: 1, n: 2}").kind == "ball"


def _same(a, b):
    if isinstance(a, dict):
        return a.keys() == b.keys() and all(_same(a[k], b[k]) for k in a)
    if isinstance(a, list):
        return len(a) == len(b) and all(_same(x, y) for x, y in zip(a, b))
    if isinstance(a, float):
        return a == pytest.approx(b, rel=1e-14)
    return a == b


def test_round_trip():
    for text in (NESTED, "kind: ellipsoid\nsemiaxes: [1, 2]\n", "kind: slab\nv: [1, 1]\nc: 0.3\n"):
        body = parse_body_spec(text)
        again = parse_body_spec(dump_body_spec(body))
        assert _same(again.spec(), body.spec())
        assert _same(body_from_dict(body.spec()).spec(), body.spec())
