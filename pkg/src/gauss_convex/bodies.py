"""Symmetric convex bodies given by membership oracles.

Every body answers ``contains`` on batches of points and ``chord``: for lines
``P + t D`` it returns the interval of ``t`` that stays inside.  Bodies built
from the closed-form constructors compute chords exactly; a body known only
through its membership function falls back to bisection.  Gaussian volume
and in-radius are exposed when a formula exists.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .sampling import SamplingPlan, sphere_sample
from .special import chi2_cdf, normal_cdf

RADIAL_TOL = 1e-6
FIBER_TOL = 1e-8
DEFAULT_DIRECTIONS = 4096


class DimensionError(ValueError):
    pass


class EmptyBodyError(ValueError):
    pass


def _as_points(X, n: int) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.shape[-1] != n:
        raise DimensionError(f"expected points of dimension {n}, got shape {X.shape}")
    return X


class ConvexBody:
    """Base class for symmetric convex bodies in R^n.

    Subclasses implement ``_contains`` and usually ``_chord``.  Instances are
    immutable once constructed.
    """

    kind = "body"

    def __init__(self, n: int):
        if int(n) < 1:
            raise DimensionError("dimension must be >= 1")
        self.n = int(n)

    def __setattr__(self, name, value):
        if getattr(self, "_frozen", False):
            raise AttributeError(f"{type(self).__name__} is immutable")
        object.__setattr__(self, name, value)

    def _freeze(self):
        for value in vars(self).values():
            if isinstance(value, np.ndarray):
                value.flags.writeable = False
        self._frozen = True

    # membership -------------------------------------------------------
    def contains(self, X):
        """Boolean membership for a point ``(n,)`` or a batch ``(m, n)``."""
        X = _as_points(X, self.n)
        if X.ndim == 1:
            return bool(self._contains(X[None, :])[0])
        return self._contains(X)

    def __call__(self, X):
        """0/1 indicator, so a body can be passed wherever a function is expected."""
        inside = self.contains(X)
        return float(inside) if isinstance(inside, bool) else inside.astype(float)

    def _contains(self, X: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    # lines -------------------------------------------------------------
    def chord(self, P, D):
        """Interval ``[lo, hi]`` of ``t`` with ``P + t D`` inside the body.

        ``P`` and ``D`` are ``(m, n)`` (or broadcastable).  Rows where the
        line misses the body have ``lo > hi``; unbounded ends are infinite.
        """
        P = np.atleast_2d(_as_points(P, self.n))
        D = np.atleast_2d(_as_points(D, self.n))
        P, D = np.broadcast_arrays(P, D)
        return self._chord(np.ascontiguousarray(P), np.ascontiguousarray(D))

    def _chord(self, P, D):
        return bisect_chord(self._contains, P, D)

    # analytic metadata --------------------------------------------------
    def gaussian_volume(self, sigma: float = 1.0) -> float | None:
        """``gamma_sigma(K)`` in closed form, or ``None`` when unknown."""
        return None

    @property
    def in_radius_value(self) -> float | None:
        return None

    def spec(self) -> dict:
        """Constructor tree, in the body-spec file schema."""
        raise NotImplementedError

    def __repr__(self):
        return f"{type(self).__name__}({self.spec()!r})"


def _empty_interval(m):
    return np.full(m, np.inf), np.full(m, -np.inf)


def _slab_chord(a, b, c):
    """Solve ``|a + t b| <= c`` row-wise."""
    lo, hi = _empty_interval(a.shape[0])
    flat = b == 0.0
    full = flat & (np.abs(a) <= c)
    lo[full], hi[full] = -np.inf, np.inf
    moving = ~flat
    t1 = (-c - a[moving]) / b[moving]
    t2 = (c - a[moving]) / b[moving]
    lo[moving] = np.minimum(t1, t2)
    hi[moving] = np.maximum(t1, t2)
    return lo, hi


def _ball_chord(P, D, r):
    """Solve ``|P + t D|^2 <= r^2`` row-wise."""
    A = np.einsum("ij,ij->i", D, D)
    B = np.einsum("ij,ij->i", P, D)
    C = np.einsum("ij,ij->i", P, P) - r * r
    lo, hi = _empty_interval(P.shape[0])
    flat = A == 0.0
    full = flat & (C <= 0)
    lo[full], hi[full] = -np.inf, np.inf
    disc = B * B - A * C
    hit = ~flat & (disc >= 0)
    root = np.sqrt(disc[hit])
    lo[hit] = (-B[hit] - root) / A[hit]
    hi[hit] = (-B[hit] + root) / A[hit]
    return lo, hi


class Slab(ConvexBody):
    """``{x : |<x, v/|v|>| <= c}``."""

    kind = "slab"

    def __init__(self, v, c: float):
        v = np.asarray(v, dtype=float).ravel()
        super().__init__(v.size)
        norm = np.linalg.norm(v)
        if norm == 0:
            raise ValueError("slab normal must be nonzero")
        if not c > 0:
            raise ValueError(f"slab half-width must be positive, got {c}")
        self.normal = v / norm
        self.c = float(c)
        self._freeze()

    def _contains(self, X):
        return np.abs(X @ self.normal) <= self.c

    def _chord(self, P, D):
        return _slab_chord(P @ self.normal, D @ self.normal, self.c)

    def gaussian_volume(self, sigma=1.0):
        return float(2.0 * normal_cdf(self.c / sigma) - 1.0)

    @property
    def in_radius_value(self):
        return self.c

    def spec(self):
        return {"kind": "slab", "v": self.normal.tolist(), "c": self.c}


class Ball(ConvexBody):
    kind = "ball"

    def __init__(self, r: float, n: int):
        super().__init__(n)
        if not r > 0:
            raise ValueError(f"ball radius must be positive, got {r}")
        self.r = float(r)
        self._freeze()

    def _contains(self, X):
        return np.einsum("ij,ij->i", X, X) <= self.r * self.r

    def _chord(self, P, D):
        return _ball_chord(P, D, self.r)

    def gaussian_volume(self, sigma=1.0):
        return float(chi2_cdf((self.r / sigma) ** 2, self.n))

    @property
    def in_radius_value(self):
        return self.r

    def spec(self):
        return {"kind": "ball", "r": self.r, "n": self.n}


class Cube(ConvexBody):
    """``{x : |x_i| <= r for all i}``."""

    kind = "cube"

    def __init__(self, r: float, n: int):
        super().__init__(n)
        if not r > 0:
            raise ValueError(f"cube half-side must be positive, got {r}")
        self.r = float(r)
        self._freeze()

    def _contains(self, X):
        return np.max(np.abs(X), axis=1) <= self.r

    def _chord(self, P, D):
        lo, hi = np.full(P.shape[0], -np.inf), np.full(P.shape[0], np.inf)
        for i in range(self.n):
            l, h = _slab_chord(P[:, i], D[:, i], self.r)
            lo, hi = np.maximum(lo, l), np.minimum(hi, h)
        return lo, hi

    def gaussian_volume(self, sigma=1.0):
        return float((2.0 * normal_cdf(self.r / sigma) - 1.0) ** self.n)

    @property
    def in_radius_value(self):
        return self.r

    def spec(self):
        return {"kind": "cube", "r": self.r, "n": self.n}


class Ellipsoid(ConvexBody):
    """Axis-aligned ellipsoid ``sum (x_i / a_i)^2 <= 1``."""

    kind = "ellipsoid"

    def __init__(self, semiaxes):
        a = np.asarray(semiaxes, dtype=float).ravel()
        super().__init__(a.size)
        if np.any(a <= 0):
            raise ValueError("ellipsoid semi-axes must be positive")
        self.semiaxes = a
        self._freeze()

    def _contains(self, X):
        Y = X / self.semiaxes
        return np.einsum("ij,ij->i", Y, Y) <= 1.0

    def _chord(self, P, D):
        return _ball_chord(P / self.semiaxes, D / self.semiaxes, 1.0)

    @property
    def in_radius_value(self):
        return float(self.semiaxes.min())

    def spec(self):
        return {"kind": "ellipsoid", "semiaxes": self.semiaxes.tolist()}


class Intersection(ConvexBody):
    kind = "intersect"

    def __init__(self, parts: Sequence[ConvexBody]):
        parts = tuple(parts)
        if not parts:
            raise ValueError("intersection needs at least one body")
        n = parts[0].n
        if any(p.n != n for p in parts):
            raise DimensionError(f"intersected bodies have dimensions {[p.n for p in parts]}")
        super().__init__(n)
        self.parts = parts
        self._freeze()

    def _contains(self, X):
        out = self.parts[0]._contains(X)
        for p in self.parts[1:]:
            out = out & p._contains(X)
        return out

    def _chord(self, P, D):
        lo, hi = self.parts[0]._chord(P, D)
        for p in self.parts[1:]:
            l, h = p._chord(P, D)
            lo, hi = np.maximum(lo, l), np.minimum(hi, h)
        return lo, hi

    def gaussian_volume(self, sigma=1.0):
        if len(self.parts) == 1:
            return self.parts[0].gaussian_volume(sigma)
        return None

    @property
    def in_radius_value(self):
        # B_r lies in every part iff it lies in the intersection
        radii = [p.in_radius_value for p in self.parts]
        return None if any(r is None for r in radii) else min(radii)

    def spec(self):
        return {"kind": "intersect", "parts": [p.spec() for p in self.parts]}


class LinearImage(ConvexBody):
    """``Q K`` for an orthogonal matrix ``Q``."""

    kind = "linear"

    def __init__(self, child: ConvexBody, Q, label: dict | None = None):
        Q = np.array(Q, dtype=float)
        if Q.shape != (child.n, child.n):
            raise DimensionError(f"matrix shape {Q.shape} does not match body dimension {child.n}")
        if not np.allclose(Q.T @ Q, np.eye(child.n), rtol=0.0, atol=1e-9):
            raise ValueError("linear images are restricted to orthogonal matrices")
        super().__init__(child.n)
        self.child = child
        self.Q = Q
        self._label = label
        self._freeze()

    # x in QK  <=>  Q^T x in K; for row vectors Q^T x is x @ Q
    def _contains(self, X):
        return self.child._contains(X @ self.Q)

    def _chord(self, P, D):
        return self.child._chord(P @ self.Q, D @ self.Q)

    def gaussian_volume(self, sigma=1.0):
        return self.child.gaussian_volume(sigma)

    @property
    def in_radius_value(self):
        return self.child.in_radius_value

    def spec(self):
        if self._label is not None:
            return dict(self._label, child=self.child.spec())
        return {"kind": "linear", "matrix": self.Q.tolist(), "child": self.child.spec()}


class OracleBody(ConvexBody):
    """A body known only through a vectorised membership function.

    The caller vouches for symmetry and convexity; the origin is checked.
    """

    kind = "oracle"

    def __init__(self, membership: Callable[[np.ndarray], np.ndarray], n: int, name: str = "oracle"):
        super().__init__(n)
        self._membership = membership
        self.name = name
        if not bool(np.asarray(membership(np.zeros((1, n))))[0]):
            raise EmptyBodyError("body does not contain the origin")
        self._freeze()

    def _contains(self, X):
        return np.asarray(self._membership(X), dtype=bool)

    def spec(self):
        return {"kind": "oracle", "name": self.name, "n": self.n}


# bisection fallback ------------------------------------------------------

def _walk_out(contains, P, D, t_in, sign, tol, reach):
    """Largest ``t`` (in direction ``sign``) with ``P + t D`` inside, starting from inside ``t_in``."""
    m = P.shape[0]
    inside_t = t_in.astype(float).copy()
    outside_t = np.full(m, np.inf)
    step = np.ones(m)
    active = np.ones(m, dtype=bool)
    while active.any():
        idx = np.flatnonzero(active)
        t = inside_t[idx] + sign * step[idx]
        ok = contains(P[idx] + t[:, None] * D[idx])
        inside_t[idx[ok]] = t[ok]
        step[idx[ok]] *= 2.0
        outside_t[idx[~ok]] = t[~ok]
        active[idx[~ok]] = False
        escaped = idx[ok][np.abs(t[ok] - t_in[idx[ok]]) > reach]
        inside_t[escaped] = sign * np.inf
        active[escaped] = False
    bounded = np.isfinite(inside_t)
    lo, hi = inside_t[bounded], outside_t[bounded]
    Pb, Db = P[bounded], D[bounded]
    while np.any(np.abs(hi - lo) > tol):
        mid = 0.5 * (lo + hi)
        ok = contains(Pb + mid[:, None] * Db)
        lo = np.where(ok, mid, lo)
        hi = np.where(ok, hi, mid)
    inside_t[bounded] = lo
    return inside_t


def bisect_chord(contains, P, D, tol: float = FIBER_TOL, reach: float = 1e6, scan: float = 50.0, scan_points: int = 257):
    """Chord of a convex set by bisection on its membership oracle.

    An interior point is looked for at ``t = 0`` first and then on a grid of
    ``scan_points`` values in ``[-scan, scan]``; rows with no interior point
    found are reported empty.
    """
    m = P.shape[0]
    lo, hi = _empty_interval(m)
    t0 = np.zeros(m)
    found = contains(P)
    missing = np.flatnonzero(~found)
    if missing.size:
        grid = np.linspace(-scan, scan, scan_points)
        for t in grid[np.argsort(np.abs(grid), kind="stable")]:
            if missing.size == 0:
                break
            ok = contains(P[missing] + t * D[missing])
            t0[missing[ok]] = t
            found[missing[ok]] = True
            missing = missing[~ok]
    idx = np.flatnonzero(found)
    if idx.size:
        hi[idx] = _walk_out(contains, P[idx], D[idx], t0[idx], 1.0, tol, reach)
        lo[idx] = _walk_out(contains, P[idx], D[idx], t0[idx], -1.0, tol, reach)
    return lo, hi


# constructors -------------------------------------------------------------

def make_slab(v, c: float, n: int | None = None) -> Slab:
    v = np.asarray(v, dtype=float).ravel()
    if n is not None and v.size != n:
        raise DimensionError(f"normal has length {v.size}, expected {n}")
    return Slab(v, c)


def coordinate_slab(i: int, c: float, n: int) -> Slab:
    """Slab ``|x_i| <= c`` (``i`` is 0-based)."""
    v = np.zeros(n)
    v[i] = 1.0
    return Slab(v, c)


def make_ball(r: float, n: int) -> Ball:
    return Ball(r, n)


def make_cube(r: float, n: int) -> Cube:
    return Cube(r, n)


def make_ellipsoid(semiaxes) -> Ellipsoid:
    return Ellipsoid(semiaxes)


def intersect(bodies: Sequence[ConvexBody]) -> ConvexBody:
    return Intersection(bodies)


def linear_image(body: ConvexBody, Q) -> LinearImage:
    return LinearImage(body, Q)


def rotation_matrix(n: int, i: int, j: int, angle_deg: float) -> np.ndarray:
    """Rotation by ``angle_deg`` in the ``(i, j)`` coordinate plane (0-based)."""
    if i == j or not (0 <= i < n and 0 <= j < n):
        raise ValueError(f"invalid rotation plane ({i}, {j}) in dimension {n}")
    theta = math.radians(angle_deg)
    Q = np.eye(n)
    Q[i, i] = Q[j, j] = math.cos(theta)
    Q[j, i] = math.sin(theta)
    Q[i, j] = -math.sin(theta)
    return Q


def rotate(body: ConvexBody, angle_deg: float, plane: tuple[int, int]) -> LinearImage:
    Q = rotation_matrix(body.n, plane[0], plane[1], angle_deg)
    return LinearImage(body, Q, label={"kind": "rotate", "angle_deg": float(angle_deg), "plane": [int(plane[0]), int(plane[1])]})


def random_orthogonal(n: int, seed: int) -> np.ndarray:
    """Haar-distributed orthogonal matrix (QR of a Gaussian matrix with sign fix)."""
    gen = SamplingPlan(seed).generator(0)
    A = gen.standard_normal((n, n))
    Q, R = np.linalg.qr(A)
    return Q * np.sign(np.diag(R))


def make_oracle_body(membership, n: int, name: str = "oracle") -> OracleBody:
    return OracleBody(membership, n, name)


# queries -------------------------------------------------------------------

@dataclass(frozen=True)
class InRadius:
    lower: float
    upper: float
    exact: bool


def exit_radii(body: ConvexBody, U: np.ndarray, tol: float = RADIAL_TOL) -> np.ndarray:
    """Radius where the ray ``t u`` leaves the body, by bisection on membership."""
    U = np.atleast_2d(_as_points(U, body.n))
    return _walk_out(body._contains, np.zeros_like(U), U, np.zeros(U.shape[0]), 1.0, tol, 1e6)


def in_radius(body: ConvexBody, n_directions: int = DEFAULT_DIRECTIONS, seed: int = 0, method: str = "auto") -> InRadius:
    """Bounds on the in-radius ``sup{r : B_r in K}``.

    With ``method="auto"`` the closed-form value is returned when the body
    has one.  Otherwise (or with ``method="search"``) the upper bound is the
    smallest exit radius over ``n_directions`` uniformly random directions
    and the lower bound is the largest radius on a grid below it at which a
    second, independent set of sphere directions lies entirely inside.
    """
    if not body.contains(np.zeros(body.n)):
        raise EmptyBodyError("body does not contain the origin")
    if method not in ("auto", "search"):
        raise ValueError(f"unknown method {method!r}")
    if method == "auto" and body.in_radius_value is not None:
        r = float(body.in_radius_value)
        return InRadius(r, r, True)

    plan = SamplingPlan(seed, n_directions)
    U = sphere_sample(body.n, 1.0, plan.substream(1))
    upper = float(exit_radii(body, U).min())
    if not math.isfinite(upper):
        return InRadius(math.inf, math.inf, False)
    probes = sphere_sample(body.n, 1.0, plan.substream(2))
    lower = 0.0
    for t in upper * np.linspace(1.0, 0.0, 65)[:-1]:
        if body._contains(t * probes).all():
            lower = float(t)
            break
    return InRadius(lower, upper, False)


def fiber_intervals(body: ConvexBody, i: int, X: np.ndarray):
    """Fibers along coordinate ``i`` through the rows of ``X``.

    Coordinate ``i`` of ``X`` is ignored.  Returns ``(lo, hi)`` in absolute
    coordinates; empty fibers have ``lo > hi``.
    """
    X = np.atleast_2d(_as_points(X, body.n)).copy()
    X[:, i] = 0.0
    D = np.zeros_like(X)
    D[:, i] = 1.0
    return body._chord(X, D)


def fiber_interval(body: ConvexBody, i: int, x_rest) -> tuple[float, float] | None:
    """The interval ``{y : (x_rest with y inserted at i) in K}``, or ``None`` if empty."""
    x_rest = np.asarray(x_rest, dtype=float).ravel()
    if x_rest.size != body.n - 1:
        raise DimensionError(f"x_rest must have length {body.n - 1}")
    point = np.insert(x_rest, i, 0.0)
    lo, hi = fiber_intervals(body, i, point[None, :])
    if lo[0] > hi[0]:
        return None
    return float(lo[0]), float(hi[0])
