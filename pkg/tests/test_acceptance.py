"""Acceptance criteria, one test per criterion (criterion 9 has two halves).

Each test records its outcome through the ``criterion`` fixture; the
terminal summary prints one pass/fail line per criterion.
"""
import math

import numpy as np
import pytest

from gauss_convex.bodies import coordinate_slab, intersect, linear_image, make_ball, make_cube, make_slab, random_orthogonal
from gauss_convex.influence import (
    analytic_cube_influence,
    ball_total_influence,
    fiber_variance_influence,
    geometric_influence,
    half_volume_cube_radius,
    influence_along,
    influences_along,
    matched_slab_width,
    max_influence_direction,
    slab_shell_density,
    total_influence,
)
from gauss_convex.report import render_report
from gauss_convex.sampling import SamplingPlan, quadrature_1d, radial_quadrature
from gauss_convex.special import isoperimetric_profile, normal_cdf, normal_pdf
from gauss_convex.verify import (
    check_margulis_russo,
    check_kruskal_katona,
    check_rotation_invariance,
    check_sharp_threshold,
    friedgut_average,
    run_suite,
    threshold_curve,
    transition_grid,
    builtin_suite,
)
from gauss_convex.verify.checks import isoperimetric_margin

SEED = 20260101
FULL = 1 << 20


def _angle_to_line(v, u):
    return math.acos(min(1.0, abs(float(np.dot(v, u))) / (np.linalg.norm(v) * np.linalg.norm(u))))


def _max_principal_angle(A, B):
    """Largest principal angle between the row spaces of ``A`` and ``B``."""
    qa, _ = np.linalg.qr(np.atleast_2d(A).T)
    qb, _ = np.linalg.qr(np.atleast_2d(B).T)
    s = np.linalg.svd(qa.T @ qb, compute_uv=False)
    return float(math.acos(min(1.0, s.min())))


@pytest.fixture(scope="module")
def suite_report():
    plan = SamplingPlan(SEED, 1 << 18)
    return run_suite(plan, checks=["kkl_first_goal", "isoperimetric_estimate", "slab_lower_bound"])


def test_criterion_01_slab_closed_form(criterion):
    oracle = quadrature_1d(lambda x: (1 - x * x) * normal_pdf(x) / math.sqrt(2), -1.0, 1.0, 1e-12)
    assert oracle == pytest.approx(math.sqrt(2) * normal_pdf(1.0), abs=1e-10)
    est = influence_along(coordinate_slab(0, 1.0, 1), [1.0], 1.0, SamplingPlan(SEED, FULL))
    ok = abs(est.value - oracle) <= 3 * est.std_error and est.std_error <= 1e-3
    criterion(1, ok, f"estimate {est}, oracle {oracle:.6f}")
    assert ok


def test_criterion_02_ball_total_influence(criterion):
    r = math.sqrt(2)
    closed = math.sqrt(2) / math.e
    radial = radial_quadrature(lambda t: (2 - t * t) / math.sqrt(2) if t <= r else 0.0, 2, 1e-12, points=[r])
    assert radial == pytest.approx(closed, abs=1e-9)
    assert ball_total_influence(r, 2) == pytest.approx(closed, abs=1e-14)
    est = total_influence(make_ball(r, 2), 1.0, SamplingPlan(SEED, FULL))
    ok = abs(est.value - closed) <= 3 * est.std_error
    criterion(2, ok, f"estimate {est}, closed form {closed:.6f}")
    assert ok


def test_criterion_03_margulis_russo(criterion):
    bodies = {
        "slab": coordinate_slab(0, 1.0, 2),
        "ball": make_ball(math.sqrt(2), 2),
        "cube": make_cube(half_volume_cube_radius(4), 4),
    }
    failures = []
    for k, (name, body) in enumerate(bodies.items()):
        for j, sigma in enumerate((0.8, 1.0, 1.25)):
            res = check_margulis_russo(body, sigma, SamplingPlan(SEED, FULL).substream(k, j))
            if not res.passed:
                failures.append(f"{name} sigma={sigma}: {res.lhs} vs {res.rhs}")
            if name == "slab":
                exact = -1.0 * normal_pdf(1.0 / sigma) / sigma ** 3
                if abs(res.lhs.value - exact) > 5e-4 * abs(exact):
                    failures.append(f"slab sigma={sigma}: difference quotient {res.lhs.value} vs {exact}")
    criterion(3, not failures, "; ".join(failures) or "9 cases, slab derivative to 3 significant figures")
    assert not failures


def test_criterion_04_nonnegativity(criterion):
    plan = SamplingPlan(SEED, 1 << 18)
    pairs, worst, bad = 0, math.inf, []
    for i, (label, body) in enumerate(builtin_suite()):
        V = SamplingPlan(SEED + i, 1).generator(0).standard_normal((25, body.n))
        V[0] = np.eye(body.n)[0]
        V = V / np.linalg.norm(V, axis=1, keepdims=True)
        for k, e in enumerate(influences_along(body, V, 1.0, plan.substream(i), method="conditional")):
            pairs += 1
            z = e.value / e.std_error if e.std_error > 0 else math.inf
            worst = min(worst, z)
            if e.value < -3 * e.std_error:
                bad.append(f"{label}#{k}: {e}")
    ok = pairs >= 500 and not bad
    criterion(4, ok, f"{pairs} pairs, smallest value/SE {worst:.2f}" + (f", violations {bad}" if bad else ""))
    assert ok


def test_criterion_05_rotation_invariance(criterion):
    plan = SamplingPlan(SEED, 1 << 16)
    bad, total = [], 0
    for i, (label, body) in enumerate(builtin_suite()):
        for b in range(10):
            Q = random_orthogonal(body.n, SEED + 100 * i + b)
            res = check_rotation_invariance(body, Q, plan.substream(i, b))
            total += 1
            if not res.passed:
                bad.append(f"{label} basis {b}: {res.lhs} vs {res.rhs}")
    criterion(5, not bad, f"{total} (body, basis) comparisons" + (f", failures {bad}" if bad else ""))
    assert not bad


def test_criterion_06_eigen_direction(criterion):
    worst, bad = 0.0, []
    for n in (4, 8, 16):
        for rep in range(2):
            Q = random_orthogonal(n, SEED + 10 * n + rep)
            body = linear_image(coordinate_slab(0, 1.0, n), Q)
            v, _ = max_influence_direction(body, 1.0, SamplingPlan(SEED, FULL).substream(n, rep))
            angle = _angle_to_line(v, Q[:, 0])
            worst = max(worst, angle)
            if angle > 0.05:
                bad.append(f"n={n} rep={rep}: {angle:.4f} rad")
    criterion(6, not bad, f"largest angle {worst:.4f} rad")
    assert not bad


def test_criterion_07_kkl_ingredient(criterion, suite_report):
    rows = [r for r in suite_report if r.name == "kkl_first_goal"]
    bad = [f"{r.body}: {r.lhs} < {r.rhs}" for r in rows if not r.passed]
    margin, _ = isoperimetric_margin(10_000)
    half = isoperimetric_profile(0.5)
    equality = abs(half - math.sqrt(2 / math.pi) * 0.5) <= 1e-12 and abs(half - 1 / math.sqrt(2 * math.pi)) <= 1e-12
    ok = not bad and len(rows) == 20 and margin >= 0 and equality
    criterion(7, ok, f"{len(rows)} suite bodies, isoperimetric grid margin {margin:.3g}, equality at 1/2: {equality}")
    assert ok


def test_criterion_08_slab_lower_bound(criterion, suite_report):
    rows = [r for r in suite_report if r.name == "slab_lower_bound"]
    bad = [f"{r.body}: {r.lhs} < {r.rhs}" for r in rows if not r.passed]
    ok = not bad and len(rows) == 20
    ratio = min(r.lhs.value / r.rhs.value for r in rows)
    criterion(8, ok, f"{len(rows)} suite bodies, smallest lhs/rhs {ratio:.2f}")
    assert ok


def test_criterion_09a_geometric_vs_convex_ball(criterion):
    n = 16
    body = make_ball(math.sqrt(n), n)
    plan = SamplingPlan(SEED, FULL)
    geo = geometric_influence(body, 0, plan.substream(0))
    conv = influence_along(body, np.eye(n)[0], 1.0, plan.substream(1))
    ratio = geo.value / conv.value
    ok = ratio >= 2.0
    criterion(9, ok, f"ball n=16 geometric {geo} / convex {conv} = {ratio:.3f}, required >= 2", part="ball")
    assert ok, f"geometric/convex ratio {ratio:.3f} < 2"


def test_criterion_09b_fiber_variance_vs_convex_slab(criterion):
    n = 16
    body = make_slab(np.ones(n), 1.0)
    plan = SamplingPlan(SEED, FULL)
    var = fiber_variance_influence(body, 0, plan.substream(0))
    conv = influence_along(body, np.eye(n)[0], 1.0, plan.substream(1))
    ratio = var.value / conv.value
    ok = ratio >= 2.0
    criterion(9, ok, f"diagonal slab n=16 fiber variance {var} / convex {conv} = {ratio:.3f}", part="diagonal slab")
    assert ok


def test_criterion_10_cube_growth_law(criterion):
    values = {}
    for n in (16, 64, 256):
        r = half_volume_cube_radius(n)
        assert (2 * normal_cdf(r) - 1) ** n == pytest.approx(0.5, abs=1e-12)
        values[n] = n * analytic_cube_influence(r, n) / math.log(n)
    ok = all(0.3 <= v <= 3.0 for v in values.values())
    criterion(10, ok, ", ".join(f"n={n}: {v:.4f}" for n, v in values.items()))
    assert ok


def test_criterion_11_sharp_threshold(criterion):
    eps = 0.1
    plan = SamplingPlan(SEED, 1 << 16)
    families = [
        ("cube_n256", make_cube(half_volume_cube_radius(256), 256)),
        ("cube_n16", make_cube(half_volume_cube_radius(16), 16)),
        ("slab", coordinate_slab(0, matched_slab_width(0.5), 2)),
    ]
    curves = [(label, threshold_curve(body, eps, transition_grid(body, eps), plan.substream(k)))
              for k, (label, body) in enumerate(families)]
    ordering = check_sharp_threshold(curves, eps)

    closed_bad = []
    for k, (label, body) in enumerate([("slab", coordinate_slab(0, 1.0, 2)), ("ball", make_ball(2.0, 4))]):
        curve = threshold_curve(body, eps, np.linspace(0.3, 6.0, 40), SamplingPlan(SEED, 1 << 18).substream(9, k))
        for s, e in zip(curve.sigmas, curve.estimates):
            exact = body.gaussian_volume(s)
            # binomial SE at the exact volume: the sample SE is 0 when every point lands inside
            se = max(e.std_error, math.sqrt(exact * (1.0 - exact) / e.samples))
            if abs(e.value - exact) > 3 * se + 1e-15:
                closed_bad.append(f"{label} sigma={s:.3f}: {e} vs {exact:.6f}")
    ok = ordering.passed and not closed_bad
    widths = ", ".join(f"{label} {c.width:.3f}" for label, c in curves)
    criterion(11, ok, f"widths {widths}" + (f"; closed-form misses {closed_bad}" if closed_bad else "; curves match closed forms"))
    assert ok


def test_criterion_12_friedgut(criterion):
    plan = SamplingPlan(SEED, 1 << 16)
    single = friedgut_average(coordinate_slab(0, 1.0, 8), 0.01, plan.substream(0))
    cross = friedgut_average(intersect([coordinate_slab(0, 1.0, 8), coordinate_slab(1, 1.0, 8)]), 0.01, plan.substream(1))
    ball = friedgut_average(make_ball(math.sqrt(8), 8), 0.25, plan.substream(2))
    problems = []
    if not (single.step_count == 1 and single.terminal_variance.value <= 0.01 and single.verdict == "pass"):
        problems.append(f"slab: {single.step_count} steps, variance {single.terminal_variance}")
    span_angle = _max_principal_angle(cross.directions, np.eye(8)[:2]) if cross.step_count == 2 else math.inf
    if not (cross.step_count == 2 and span_angle <= 0.05 and cross.verdict == "pass"):
        problems.append(f"two slabs: {cross.step_count} steps, span angle {span_angle:.4f}")
    for name, trace in (("slab", single), ("two slabs", cross), ("ball", ball)):
        if not (trace.within_bound_cap() and trace.influences_above_bound() and trace.step_count <= trace.step_cap):
            problems.append(f"{name}: step cap or per-step bound violated")
    detail = (f"slab 1 step (variance {single.terminal_variance}); two slabs {cross.step_count} steps, "
              f"span angle {span_angle:.4f}; ball {ball.step_count} steps")
    criterion(12, not problems, detail + (f"; problems {problems}" if problems else ""))
    assert not problems


def test_criterion_13_kruskal_katona(criterion):
    n, r, eps = 16, 4.0, 0.01
    plan = SamplingPlan(SEED, FULL)
    slab = check_kruskal_katona(coordinate_slab(0, 1.0, n), r, eps, plan)
    cube = check_kruskal_katona(make_cube(half_volume_cube_radius(n), n), r, eps, plan)
    oracle = slab_shell_density(1.0, r * (1 - eps), n) - slab_shell_density(1.0, r, n)
    matches = abs(slab.lhs.value - oracle) <= 3 * slab.lhs.std_error
    larger = cube.lhs.value / eps > slab.lhs.value / eps
    ok = matches and larger and slab.passed and cube.passed
    criterion(13, ok, f"slab increment {slab.lhs} vs cap oracle {oracle:.6f}; cube increment {cube.lhs}")
    assert ok


def test_criterion_14_determinism(criterion):
    reports = []
    for workers in (1, 4, 16, 1):
        results = run_suite(SamplingPlan(SEED, 1 << 12, workers=workers))
        reports.append(render_report(results, "csv") + render_report(results, "json"))
    ok = all(r == reports[0] for r in reports)
    criterion(14, ok, f"{len(reports)} runs (workers 1, 4, 16, 1) byte-identical: {ok}")
    assert ok
