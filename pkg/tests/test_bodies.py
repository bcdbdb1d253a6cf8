import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from scipy import stats

from gauss_convex.bodies import (
    DimensionError,
    EmptyBodyError,
    bisect_chord,
    coordinate_slab,
    fiber_interval,
    in_radius,
    intersect,
    linear_image,
    make_ball,
    make_cube,
    make_ellipsoid,
    make_oracle_body,
    make_slab,
    random_orthogonal,
    rotate,
    rotation_matrix,
)
from gauss_convex.influence import gaussian_volume
from gauss_convex.sampling import SamplingPlan


def _bodies(n=3):
    Q = random_orthogonal(n, 7)
    return [
        coordinate_slab(0, 1.0, n),
        make_slab(np.arange(1, n + 1), 0.5),
        make_ball(1.5, n),
        make_cube(0.8, n),
        make_ellipsoid(np.linspace(0.5, 2.0, n)),
        intersect([coordinate_slab(0, 1.0, n), make_ball(2.0, n)]),
        linear_image(make_cube(0.8, n), Q),
        make_oracle_body(lambda X: np.sum(np.abs(X), axis=1) <= 1.5, n, "cross_polytope"),
    ]


def test_examples():
    slab = coordinate_slab(0, 1.0, 2)
    assert slab.contains([0.9, 100.0]) and not slab.contains([1.1, 0.0])
    np.testing.assert_array_equal(slab([[0.0, 0.0], [2.0, 0.0]]), [1.0, 0.0])
    ball = make_ball(2.0, 3)
    assert ball.contains([1.0, 1.0, 1.0]) and not ball.contains([2.0, 1.0, 0.0])
    cube = make_cube(1.0, 2)
    assert cube.contains([1.0, -1.0]) and not cube.contains([1.01, 0.0])
    assert make_slab([3.0, 4.0], 1.0).normal.tolist() == [0.6, 0.8]


def test_validation():
    with pytest.raises(ValueError):
        make_ball(0.0, 3)
    with pytest.raises(ValueError):
        make_slab([0.0, 0.0], 1.0)
    with pytest.raises(ValueError):
        make_cube(-1.0, 2)
    with pytest.raises(DimensionError):
        intersect([make_ball(1.0, 2), make_ball(1.0, 3)])
    with pytest.raises(ValueError):
        linear_image(make_ball(1.0, 2), np.array([[2.0, 0.0], [0.0, 1.0]]))
    with pytest.raises(EmptyBodyError):
        make_oracle_body(lambda X: X[:, 0] > 1, 2)
    with pytest.raises(DimensionError):
        make_ball(1.0, 3).contains(np.zeros(2))
    with pytest.raises(ValueError):
        rotation_matrix(3, 1, 1, 30.0)


def test_bodies_are_immutable():
    ball = make_ball(1.0, 2)
    with pytest.raises(AttributeError):
        ball.r = 3.0


@settings(max_examples=60, deadline=None)
@given(arrays(np.float64, (20, 3), elements=st.floats(-3, 3)))
def test_symmetric(X):
    for body in _bodies():
        np.testing.assert_array_equal(body.contains(X), body.contains(-X))


@settings(max_examples=60, deadline=None)
@given(arrays(np.float64, (40, 3), elements=st.floats(-2, 2)), st.floats(0, 1))
def test_convex(X, lam):
    for body in _bodies():
        inside = X[body.contains(X)]
        if len(inside) < 2:
            continue
        mix = lam * inside[:-1] + (1 - lam) * inside[1:]
        assert body.contains(mix).all()


def test_chords_agree_with_bisection():
    rng = np.random.default_rng(3)
    P0 = 0.3 * rng.standard_normal((50, 3))
    D0 = rng.standard_normal((50, 3))
    for body in _bodies()[:-1]:
        # the bisection scan needs a start point inside the body
        keep = body.contains(P0)
        P, D = P0[keep], D0[keep]
        lo, hi = body.chord(P, D)
        blo, bhi = bisect_chord(body._contains, P, D)
        finite = np.isfinite(lo)
        np.testing.assert_allclose(lo[finite], blo[finite], atol=1e-6)
        np.testing.assert_allclose(hi[np.isfinite(hi)], bhi[np.isfinite(hi)], atol=1e-6)


@pytest.mark.parametrize("body", _bodies()[:4] + [_bodies()[6]], ids=lambda b: b.kind)
def test_volume_formula_against_monte_carlo(body):
    exact = body.gaussian_volume(1.3)
    e = gaussian_volume(body, 1.3, SamplingPlan(1, 1 << 17))
    assert abs(e.value - exact) <= 4 * e.std_error


def test_volume_oracles():
    assert coordinate_slab(0, 1.0, 5).gaussian_volume() == pytest.approx(2 * stats.norm.cdf(1) - 1)
    assert make_ball(2.0, 4).gaussian_volume(2.0) == pytest.approx(stats.chi2.cdf(1.0, 4))
    assert make_cube(1.0, 3).gaussian_volume() == pytest.approx((2 * stats.norm.cdf(1) - 1) ** 3)
    assert make_ellipsoid([1.0, 2.0]).gaussian_volume() is None


def test_rotation_preserves_volume_and_spec():
    body = rotate(make_cube(1.0, 3), 30.0, (0, 2))
    assert body.gaussian_volume() == pytest.approx(make_cube(1.0, 3).gaussian_volume())
    assert body.spec()["kind"] == "rotate"
    R = rotation_matrix(3, 0, 2, 90.0)
    np.testing.assert_allclose(R @ R.T, np.eye(3), atol=1e-15)


def test_random_orthogonal_is_orthogonal_and_seeded():
    Q = random_orthogonal(6, 11)
    np.testing.assert_allclose(Q.T @ Q, np.eye(6), atol=1e-12)
    np.testing.assert_array_equal(Q, random_orthogonal(6, 11))
    assert not np.allclose(Q, random_orthogonal(6, 12))


@pytest.mark.parametrize("body,expected", [
    (coordinate_slab(1, 0.7, 3), 0.7),
    (make_ball(1.5, 4), 1.5),
    (make_cube(0.8, 5), 0.8),
    (make_ellipsoid([0.5, 1.0, 2.0]), 0.5),
    (intersect([coordinate_slab(0, 1.0, 2), make_ball(0.6, 2)]), 0.6),
    (linear_image(make_cube(0.8, 3), random_orthogonal(3, 2)), 0.8),
])
def test_in_radius_exact(body, expected):
    r = in_radius(body)
    assert r.exact and r.lower == r.upper == pytest.approx(expected)


def test_in_radius_search_brackets_the_truth():
    cross = make_oracle_body(lambda X: np.sum(np.abs(X), axis=1) <= 1.0, 3)
    r = in_radius(cross, n_directions=4096, seed=1)
    truth = 1 / math.sqrt(3)
    # the upper bound is a true exit radius; the lower one comes from finitely many probes
    assert not r.exact
    assert r.lower <= r.upper and truth - 1e-6 <= r.upper <= truth * 1.05
    assert r.lower == pytest.approx(truth, rel=0.05)
    ball = in_radius(make_ball(1.2, 3), method="search")
    assert ball.lower <= 1.2 + 1e-6 <= ball.upper + 2e-6


def test_fiber_interval():
    lo, hi = fiber_interval(make_ball(2.0, 3), 1, [1.0, 1.0])
    assert hi == pytest.approx(math.sqrt(2)) and lo == pytest.approx(-math.sqrt(2))
    assert fiber_interval(make_ball(2.0, 3), 0, [2.0, 1.0]) is None
    assert fiber_interval(coordinate_slab(0, 1.0, 2), 1, [0.5]) == (-math.inf, math.inf)
    lo, hi = fiber_interval(make_cube(1.0, 2), 0, [0.5])
    assert (lo, hi) == (-1.0, 1.0)
    with pytest.raises(DimensionError):
        fiber_interval(make_cube(1.0, 2), 0, [0.5, 0.5])
