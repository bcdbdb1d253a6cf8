"""Body specification files.

A spec is a YAML mapping with a ``kind`` and kind-specific fields; composite
kinds nest child specs.  See ``docs/body_spec.md`` for the schema.  Errors
carry the 1-based line and column of the offending node.
"""
from __future__ import annotations

import math
from pathlib import Path

import numpy as np
import yaml

from . import bodies as B

KINDS = ("slab", "halfspace_pair", "ball", "cube", "ellipsoid", "intersect", "rotate", "linear")


class BodySpecError(ValueError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None, source: str = "<spec>"):
        self.message, self.line, self.column, self.source = message, line, column, source
        where = f"{source}:{line}:{column}: " if line is not None else f"{source}: "
        super().__init__(where + message)


class _Builder:
    def __init__(self, source: str, overrides: dict | None):
        self.source = source
        self.overrides = {k: v for k, v in (overrides or {}).items() if v is not None}

    def fail(self, node, message):
        mark = node.start_mark if node is not None else None
        if mark is None:
            raise BodySpecError(message, source=self.source)
        raise BodySpecError(message, mark.line + 1, mark.column + 1, self.source)

    # scalar helpers --------------------------------------------------------
    def scalar(self, node, what):
        if not isinstance(node, yaml.ScalarNode):
            self.fail(node, f"{what} must be a scalar")
        return yaml.safe_load(node.value) if node.style is None else node.value

    def number(self, node, what, positive=False):
        value = self.scalar(node, what)
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            self.fail(node, f"{what} must be a number, got {node.value!r}")
        value = float(value)
        if not math.isfinite(value) or (positive and value <= 0):
            self.fail(node, f"{what} must be {'a positive' if positive else 'a finite'} number, got {node.value!r}")
        return value

    def integer(self, node, what, minimum=None):
        value = self.scalar(node, what)
        if isinstance(value, bool) or not isinstance(value, int):
            self.fail(node, f"{what} must be an integer, got {node.value!r}")
        if minimum is not None and value < minimum:
            self.fail(node, f"{what} must be >= {minimum}, got {value}")
        return value

    def vector(self, node, what):
        if not isinstance(node, yaml.SequenceNode) or not node.value:
            self.fail(node, f"{what} must be a non-empty list of numbers")
        return np.array([self.number(item, f"{what} entry") for item in node.value])

    def matrix(self, node, what):
        if not isinstance(node, yaml.SequenceNode) or not node.value:
            self.fail(node, f"{what} must be a list of rows")
        rows = [self.vector(row, f"{what} row") for row in node.value]
        if len({len(r) for r in rows}) != 1:
            self.fail(node, f"{what} rows have different lengths")
        return np.array(rows)

    # nodes -------------------------------------------------------------------
    def fields(self, node):
        if not isinstance(node, yaml.MappingNode):
            self.fail(node, "body spec must be a mapping with a 'kind' field")
        out = {}
        for key_node, value_node in node.value:
            key = key_node.value
            if key in out:
                self.fail(key_node, f"duplicate field {key!r}")
            out[key] = value_node
        return out

    def body(self, node, top=False) -> B.ConvexBody:
        f = self.fields(node)
        if "kind" not in f:
            self.fail(node, "missing field 'kind'")
        kind = self.scalar(f["kind"], "kind")
        if kind not in KINDS:
            self.fail(f["kind"], f"unknown kind {kind!r}; expected one of {', '.join(KINDS)}")
        allowed = {
            "slab": {"v", "c", "axis", "n"}, "halfspace_pair": {"v", "c", "axis", "n"},
            "ball": {"r", "n"}, "cube": {"r", "n"}, "ellipsoid": {"semiaxes"},
            "intersect": {"parts"}, "rotate": {"angle_deg", "plane", "child"}, "linear": {"matrix", "child"},
        }[kind] | {"kind"}
        for key, value_node in f.items():
            if key not in allowed:
                self.fail(value_node, f"unknown field {key!r} for kind {kind!r}")
        ov = self.overrides if top else {}

        def need(key):
            if key not in f:
                self.fail(node, f"kind {kind!r} requires field {key!r}")
            return f[key]

        def num(key, positive=True):
            return float(ov[key]) if key in ov else self.number(need(key), key, positive)

        def dim(key="n"):
            return int(ov["n"]) if "n" in ov else self.integer(need(key), key, minimum=1)

        try:
            if kind in ("slab", "halfspace_pair"):
                c = num("c")
                if "v" in f:
                    v = self.vector(f["v"], "v")
                    if "n" in ov and int(ov["n"]) != v.size:
                        self.fail(f["v"], f"normal has length {v.size} but --dim is {ov['n']}")
                    if not np.any(v):
                        self.fail(f["v"], "slab normal must be nonzero")
                    return B.make_slab(v, c)
                if "axis" not in f:
                    self.fail(node, "slab requires 'v' or 'axis' with 'n'")
                n = dim()
                axis = self.integer(f["axis"], "axis", minimum=0)
                if axis >= n:
                    self.fail(f["axis"], f"axis {axis} out of range for dimension {n}")
                return B.coordinate_slab(axis, c, n)
            if kind == "ball":
                return B.make_ball(num("r"), dim())
            if kind == "cube":
                return B.make_cube(num("r"), dim())
            if kind == "ellipsoid":
                a = self.vector(need("semiaxes"), "semiaxes")
                if np.any(a <= 0):
                    self.fail(f["semiaxes"], "semi-axes must be positive")
                return B.make_ellipsoid(a)
            if kind == "intersect":
                parts_node = need("parts")
                if not isinstance(parts_node, yaml.SequenceNode) or not parts_node.value:
                    self.fail(parts_node, "parts must be a non-empty list of bodies")
                parts = [self.body(p) for p in parts_node.value]
                dims = {p.n for p in parts}
                if len(dims) != 1:
                    self.fail(parts_node, f"parts have different dimensions {sorted(dims)}")
                return B.intersect(parts)
            if kind == "rotate":
                child = self.body(need("child"))
                angle = self.number(need("angle_deg"), "angle_deg")
                plane_node = need("plane")
                if not isinstance(plane_node, yaml.SequenceNode) or len(plane_node.value) != 2:
                    self.fail(plane_node, "plane must be a pair of coordinate indices [i, j]")
                i, j = (self.integer(x, "plane index", minimum=0) for x in plane_node.value)
                if i == j or i >= child.n or j >= child.n:
                    self.fail(plane_node, f"invalid rotation plane [{i}, {j}] in dimension {child.n}")
                return B.rotate(child, angle, (i, j))
            if kind == "linear":
                child = self.body(need("child"))
                Q = self.matrix(need("matrix"), "matrix")
                if Q.shape != (child.n, child.n):
                    self.fail(f["matrix"], f"matrix shape {Q.shape} does not match child dimension {child.n}")
                if not np.allclose(Q.T @ Q, np.eye(child.n), rtol=0.0, atol=1e-9):
                    self.fail(f["matrix"], "matrix must be orthogonal")
                return B.linear_image(child, Q)
        except (ValueError, B.DimensionError) as exc:
            if isinstance(exc, BodySpecError):
                raise
            self.fail(node, str(exc))
        raise AssertionError(kind)


def parse_body_spec(text: str, source: str = "<spec>", overrides: dict | None = None) -> B.ConvexBody:
    """Build a body from spec text.

    ``overrides`` may set ``n``, ``r`` or ``c`` on the top-level node (the
    CLI's ``--dim``, ``--r`` and ``--c``).
    """
    try:
        node = yaml.compose(text)
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark
        raise BodySpecError(exc.problem or str(exc), mark.line + 1 if mark else None,
                            mark.column + 1 if mark else None, source) from None
    if node is None:
        raise BodySpecError("empty body spec", source=source)
    return _Builder(source, overrides).body(node, top=True)


def load_body_spec(path_or_text: str, overrides: dict | None = None) -> B.ConvexBody:
    """Load a spec from a file path, or parse the argument itself as inline YAML."""
    path = Path(path_or_text)
    try:
        is_file = path.is_file()
    except OSError:
        is_file = False
    if is_file:
        return parse_body_spec(path.read_text(), str(path), overrides)
    if ":" not in path_or_text:
        raise BodySpecError(f"no such spec file: {path_or_text}", source=path_or_text)
    return parse_body_spec(path_or_text, "<inline>", overrides)


def body_from_dict(spec: dict) -> B.ConvexBody:
    """Inverse of :meth:`ConvexBody.spec` for bodies built from spec kinds."""
    return parse_body_spec(yaml.safe_dump(spec), "<dict>")


def dump_body_spec(body: B.ConvexBody) -> str:
    return yaml.safe_dump(body.spec(), sort_keys=False, default_flow_style=None)
