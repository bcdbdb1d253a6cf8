"""The builtin body suite and a runner that applies every check to it."""
from __future__ import annotations

import math
from dataclasses import replace
from typing import Iterable

import numpy as np

from ..bodies import ConvexBody, coordinate_slab, intersect, linear_image, make_ball, make_cube, make_slab, random_orthogonal
from ..influence import half_volume_cube_radius, matched_ball_radius
from ..sampling import SamplingPlan, Sphere, mc_expectation
from . import checks as K
from .constants import KK_ALPHA_RANGE

SUITE_DIMENSIONS = (2, 4, 8, 16)
SUITE_SEED = 20240917
NONNEGATIVITY_DIRECTIONS = 8
KK_EPS = 0.01

CHECK_NAMES = (
    "margulis_russo",
    "dilation_form",
    "poincare",
    "kkl_first_goal",
    "isoperimetric_estimate",
    "slab_lower_bound",
    "s_inequality",
    "nonnegativity",
    "rotation_invariance",
    "kruskal_katona",
)


def builtin_suite(dims: Iterable[int] = SUITE_DIMENSIONS) -> list[tuple[str, ConvexBody]]:
    """Slabs, balls, cubes, randomly rotated cubes and two-slab intersections.

    Random rotations and directions come from a fixed seed so the suite is
    the same on every run.
    """
    suite = []
    for n in dims:
        Q = random_orthogonal(n, SUITE_SEED + n)
        suite.append((f"slab_n{n}", coordinate_slab(0, 1.0, n)))
        suite.append((f"ball_n{n}", make_ball(matched_ball_radius(0.5, n), n)))
        suite.append((f"cube_n{n}", make_cube(half_volume_cube_radius(n), n)))
        suite.append((f"rotated_cube_n{n}", linear_image(make_cube(half_volume_cube_radius(n), n), Q)))
        suite.append((f"two_slabs_n{n}", intersect([coordinate_slab(0, 1.0, n), make_slab(Q[:, -1], 0.8, n)])))
    return suite


def random_directions(n: int, count: int, seed: int) -> np.ndarray:
    from ..sampling import sphere_sample

    return sphere_sample(n, 1.0, SamplingPlan(seed, count))


def median_shell_radius(body: ConvexBody, plan: SamplingPlan, grid: int = 97) -> float | None:
    """Radius on a coarse grid whose shell density is nearest 1/2, or ``None`` if none is in range."""
    radii = np.sqrt(body.n) * np.linspace(0.25, 2.5, grid)
    small = plan.with_samples(min(plan.samples, 1 << 12))
    alphas = np.array([e.value for e in mc_expectation(
        lambda U: np.column_stack([body(r * U) for r in radii]), Sphere(body.n, 1.0), small)])
    ok = (alphas >= KK_ALPHA_RANGE[0]) & (alphas <= KK_ALPHA_RANGE[1])
    if not ok.any():
        return None
    k = int(np.argmin(np.where(ok, np.abs(alphas - 0.5), np.inf)))
    return float(radii[k])


def _checks_for(label: str, body: ConvexBody, plan: SamplingPlan, selected: set[str]) -> list[K.CheckResult]:
    out = []

    def want(name):
        return name in selected

    if want("margulis_russo"):
        out.append(K.check_margulis_russo(body, 1.0, plan.substream(0)))
    if want("dilation_form"):
        out.append(K.check_dilation_form(body, 1e-2, plan.substream(1)))
    if want("poincare"):
        out.append(K.check_poincare(body, plan.substream(2)))
    if want("kkl_first_goal"):
        out.append(K.check_kkl_chain(body, plan.substream(3))[0])
    if want("slab_lower_bound"):
        out.append(K.check_slab_lower_bound(body, plan.substream(4)))
    if want("s_inequality"):
        out.append(K.check_s_inequality_spot(body, 1.2, plan.substream(5)))
        out.append(K.check_s_inequality_spot(body, 0.8, plan.substream(6)))
    if want("nonnegativity"):
        V = random_directions(body.n, NONNEGATIVITY_DIRECTIONS, plan.seed ^ body.n)
        out.extend(K.check_nonnegativity(body, V, plan.substream(7)))
    if want("rotation_invariance"):
        Q = random_orthogonal(body.n, (plan.seed + 1) % (1 << 64))
        out.append(K.check_rotation_invariance(body, Q, plan.substream(8)))
    if want("kruskal_katona") and not label.startswith("ball"):
        r = median_shell_radius(body, plan.substream(9))
        if r is None:
            out.append(K.inconclusive("kruskal_katona", "no radius with shell density in range"))
        else:
            out.append(K.check_kruskal_katona(body, r, KK_EPS, plan.substream(10)))
    return [replace(res, body=label) for res in out]


def run_suite(plan: SamplingPlan, checks: Iterable[str] | None = None,
              dims: Iterable[int] = SUITE_DIMENSIONS) -> list[K.CheckResult]:
    """Run the selected checks on every suite body, in a fixed order.

    Body ``i`` uses the substream ``(i,)`` of ``plan``; results do not depend
    on ``plan.workers``.
    """
    selected = set(CHECK_NAMES if checks is None else checks)
    unknown = selected - set(CHECK_NAMES)
    if unknown:
        raise ValueError(f"unknown checks: {sorted(unknown)}")
    results = []
    if "isoperimetric_estimate" in selected:
        results.append(K.check_isoperimetric_estimate())
    for i, (label, body) in enumerate(builtin_suite(dims)):
        results.extend(_checks_for(label, body, plan.substream(i), selected))
    return results
