"""Statistical checks of identities and inequalities for convex influence.

Each check returns a :class:`CheckResult`.  The slack is ``3 * (SE_lhs + SE_rhs)``
plus any deterministic allowance (finite-difference truncation), and both
sides are estimated on the same sample stream whenever both are random.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..bodies import ConvexBody, in_radius
from ..influence import (
    bottom_direction,
    influence_along,
    max_influence_direction,
    density_increment,
    matched_slab_width,
    second_moment_matrix,
    total_influence,
)
from ..sampling import Estimate, Gaussian, SamplingPlan, Sphere, mc_expectation
from ..special import SQRT2, isoperimetric_profile, normal_cdf, normal_pdf
from . import constants as C

PASS, FAIL, INCONCLUSIVE = "pass", "fail", "inconclusive"
RELATIONS = (">=", "<=", "==")


@dataclass(frozen=True)
class CheckResult:
    """Outcome of one check: ``lhs <relation> rhs`` up to ``slack``."""

    name: str
    relation: str
    lhs: Estimate
    rhs: Estimate
    slack: float
    verdict: str
    body: str = ""
    detail: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.verdict == PASS

    def row(self) -> dict:
        return {
            "name": self.name,
            "body": self.body,
            "relation": self.relation,
            "lhs": self.lhs.value,
            "lhs_se": self.lhs.std_error,
            "rhs": self.rhs.value,
            "rhs_se": self.rhs.std_error,
            "slack": self.slack,
            "verdict": self.verdict,
            "seed": self.lhs.seed if self.lhs.seed is not None else self.rhs.seed,
            "samples": max(self.lhs.samples, self.rhs.samples),
        }


def _as_estimate(x) -> Estimate:
    return x if isinstance(x, Estimate) else Estimate.exact(float(x))


def compare(name: str, lhs, rhs, relation: str, allowance: float = 0.0, body: str = "", **detail) -> CheckResult:
    """Build a :class:`CheckResult` with the standard slack convention."""
    if relation not in RELATIONS:
        raise ValueError(f"unknown relation {relation!r}")
    lhs, rhs = _as_estimate(lhs), _as_estimate(rhs)
    slack = C.SLACK_SIGMAS * (lhs.std_error + rhs.std_error) + abs(allowance)
    diff = lhs.value - rhs.value
    if not math.isfinite(slack) or not math.isfinite(diff):
        verdict = INCONCLUSIVE
    elif relation == ">=":
        verdict = PASS if diff >= -slack else FAIL
    elif relation == "<=":
        verdict = PASS if diff <= slack else FAIL
    else:
        verdict = PASS if abs(diff) <= slack else FAIL
    if allowance:
        detail = dict(detail, allowance=abs(allowance))
    return CheckResult(name, relation, lhs, rhs, float(slack), verdict, body, detail)


def inconclusive(name: str, reason: str, body: str = "", lhs=math.nan, rhs=math.nan, **detail) -> CheckResult:
    return CheckResult(name, "==", _as_estimate(lhs), _as_estimate(rhs), math.nan, INCONCLUSIVE, body,
                       dict(detail, reason=reason))


def _label(body: ConvexBody) -> str:
    return getattr(body, "label", None) or body.kind


def _scaled(est: Estimate, factor: float, shift: float = 0.0) -> Estimate:
    return Estimate(shift + factor * est.value, abs(factor) * est.std_error, est.samples, est.seed)


def volume_and_total_influence(body: ConvexBody, sigma: float, plan: SamplingPlan) -> tuple[Estimate, Estimate]:
    """``gamma_sigma(K)`` and ``TInf^sigma[K]`` from one pass over the same points."""
    n = body.n

    def integrand(X):
        k = body(X)
        sq = np.einsum("ij,ij->i", X, X) / (sigma * sigma)
        return np.column_stack([k, k * (n - sq) / SQRT2])

    gamma, tinf = mc_expectation(integrand, Gaussian(n, sigma), plan)
    return gamma, tinf


def _variance(gamma: Estimate) -> Estimate:
    """``gamma (1 - gamma)`` with a delta-method standard error."""
    g = gamma.value
    return Estimate(g * (1.0 - g), abs(1.0 - 2.0 * g) * gamma.std_error, gamma.samples, gamma.seed)


# Margulis-Russo -----------------------------------------------------------

def _volume_difference_quotient(body, sigma, h, plan):
    s_plus, s_minus = math.sqrt(sigma ** 2 + h), math.sqrt(sigma ** 2 - h)
    if body.gaussian_volume(sigma) is not None:
        return Estimate.exact((body.gaussian_volume(s_plus) - body.gaussian_volume(s_minus)) / (2.0 * h))

    def integrand(Z):
        return (body(s_plus * Z) - body(s_minus * Z)) / (2.0 * h)

    return mc_expectation(integrand, Gaussian(body.n, 1.0), plan)


def check_margulis_russo(body: ConvexBody, sigma: float, plan: SamplingPlan, h: float | None = None) -> CheckResult:
    """Central difference of ``gamma_sigma`` in ``sigma^2`` against ``-TInf^sigma / (sigma^2 sqrt 2)``.

    Volumes come from the closed form when the body has one and otherwise
    from Monte Carlo with common random numbers.  Halving ``h`` once gives
    the truncation allowance ``4/3 |D(h) - D(h/2)|``.
    """
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    h = C.MR_STEP_FACTOR * sigma ** 2 if h is None else float(h)
    if not 0 < h < sigma ** 2:
        raise ValueError(f"step h must lie in (0, sigma^2), got {h}")
    d_full = _volume_difference_quotient(body, sigma, h, plan)
    d_half = _volume_difference_quotient(body, sigma, 0.5 * h, plan)
    allowance = 4.0 / 3.0 * abs(d_full.value - d_half.value)
    tinf = total_influence(body, sigma, plan)
    rhs = _scaled(tinf, -1.0 / (sigma ** 2 * SQRT2))
    return compare("margulis_russo", d_full, rhs, "==", allowance, _label(body), sigma=sigma, h=h)


def check_dilation_form(body: ConvexBody, delta: float, plan: SamplingPlan, sigma: float = 1.0) -> CheckResult:
    """``(gamma(K) - gamma((1 - delta) K)) / (sqrt(2) delta)`` against ``TInf[K]``.

    Both quotients (at ``delta`` and ``delta / 2``) and the total influence
    come from one pass; the first-order truncation allowance is
    ``2 |Q(delta) - Q(delta / 2)|``.
    """
    if not 0 < delta <= 1e-2:
        raise ValueError("delta must lie in (0, 0.01]")
    n = body.n

    def integrand(X):
        k = body(X)
        sq = np.einsum("ij,ij->i", X, X) / (sigma * sigma)
        q1 = (k - body(X / (1.0 - delta))) / (SQRT2 * delta)
        q2 = (k - body(X / (1.0 - 0.5 * delta))) / (SQRT2 * 0.5 * delta)
        return np.column_stack([q1, q2, k * (n - sq) / SQRT2])

    q1, q2, tinf = mc_expectation(integrand, Gaussian(n, sigma), plan)
    allowance = 2.0 * abs(q1.value - q2.value)
    return compare("dilation_form", q1, tinf, "==", allowance, _label(body), delta=delta)


# Poincare and KKL -----------------------------------------------------------

def check_poincare(body: ConvexBody, plan: SamplingPlan, sigma: float = 1.0) -> CheckResult:
    """``TInf[K] >= POINCARE_C0 * Var[K]`` with ``Var = gamma (1 - gamma)``."""
    gamma, tinf = volume_and_total_influence(body, sigma, plan)
    rhs = _scaled(_variance(gamma), C.POINCARE_C0)
    return compare("poincare", tinf, rhs, ">=", body=_label(body), c0=C.POINCARE_C0)


def isoperimetric_margin(grid_points: int = 10_000) -> tuple[float, float]:
    """Smallest ``phi(Phi^-1(a)) - sqrt(2/pi) min(a, 1 - a)`` on an open grid, and the gap at ``a = 1/2``."""
    alpha = np.linspace(0.0, 1.0, grid_points + 2)[1:-1]
    gap = isoperimetric_profile(alpha) - C.ISOPERIMETRIC_FACTOR * np.minimum(alpha, 1.0 - alpha)
    mid = isoperimetric_profile(0.5) - C.ISOPERIMETRIC_FACTOR * 0.5
    return float(gap.min()), float(mid)


def check_isoperimetric_estimate(grid_points: int = 10_000) -> CheckResult:
    margin, mid = isoperimetric_margin(grid_points)
    # float rounding near alpha = 1/2 where the two sides touch
    return compare("isoperimetric_estimate", margin, 0.0, ">=", allowance=1e-15, grid_points=grid_points, gap_at_half=mid)


def check_kkl_chain(body: ConvexBody, plan: SamplingPlan, sigma: float = 1.0) -> tuple[CheckResult, CheckResult]:
    """The two ingredients of the KKL argument.

    (a) ``TInf >= Var * r_in / sqrt(pi)`` with the in-radius lower bound;
    (b) the isoperimetric estimate on a grid (deterministic).
    """
    bounds = in_radius(body)
    gamma, tinf = volume_and_total_influence(body, sigma, plan)
    rhs = _scaled(_variance(gamma), bounds.lower / math.sqrt(math.pi))
    first = compare("kkl_first_goal", tinf, rhs, ">=", body=_label(body), r_in=bounds.lower)
    return first, check_isoperimetric_estimate()


def check_slab_lower_bound(body: ConvexBody, plan: SamplingPlan, slab: tuple | None = None) -> CheckResult:
    """``Inf_v[K] >= gamma e^{-c^2} / (2^{3/2} pi)`` for ``K`` inside ``{|v.x| <= c}``.

    Without ``slab`` the direction is the eigen-direction of largest
    influence and ``c`` is the in-radius upper bound.
    """
    M = second_moment_matrix(body, 1.0, plan)
    if slab is None:
        v = bottom_direction(M)
        c = in_radius(body).upper
    else:
        v, c = np.asarray(slab[0], dtype=float), float(slab[1])
        v = v / np.linalg.norm(v)
    lhs = influence_along(body, v, 1.0, plan)
    rhs = _scaled(M.volume, math.exp(-c * c) * C.SLAB_BOUND_FACTOR)
    return compare("slab_lower_bound", lhs, rhs, ">=", body=_label(body), c=c)


# S-inequality ---------------------------------------------------------------

def check_s_inequality_spot(body: ConvexBody, t: float, plan: SamplingPlan) -> CheckResult:
    """``gamma(tK)`` against ``gamma(t S)`` for the slab ``S`` of equal volume.

    ``>=`` for ``t > 1``, ``<=`` for ``t < 1``.  ``x in tK`` iff ``x / t in K``,
    so both volumes use the same points.
    """
    if not t > 0:
        raise ValueError("t must be positive")
    if body.gaussian_volume(1.0) is not None:
        gamma = Estimate.exact(body.gaussian_volume(1.0))
        lhs = Estimate.exact(body.gaussian_volume(1.0 / t))
    else:
        gamma, lhs = mc_expectation(lambda X: np.column_stack([body(X), body(X / t)]), Gaussian(body.n, 1.0), plan)
    if not 0 < gamma.value < 1:
        return inconclusive("s_inequality", "volume estimate is 0 or 1", _label(body), t=t)
    c = matched_slab_width(gamma.value)
    value = 2.0 * normal_cdf(t * c) - 1.0
    # d/dgamma [2 Phi(t c(gamma)) - 1] = t phi(t c) / phi(c)
    se = t * normal_pdf(t * c) / normal_pdf(c) * gamma.std_error
    rhs = Estimate(float(value), float(se), gamma.samples, gamma.seed)
    relation = ">=" if t > 1 else "<=" if t < 1 else "=="
    return compare("s_inequality", lhs, rhs, relation, body=_label(body), t=t, slab_c=c)


# Kruskal-Katona -------------------------------------------------------------

def check_kruskal_katona(body: ConvexBody, r: float, eps: float, plan: SamplingPlan) -> CheckResult:
    """``alpha_K(r (1 - eps)) - alpha_K(r) >= KK_C1 * eps``.

    Inconclusive when ``eps > KK_MAX_EPS`` or ``alpha_K(r)`` falls outside
    ``KK_ALPHA_RANGE``.  The detail records the largest influence and the
    increment normalised by ``eps sqrt(ln(1/delta))``.
    """
    name = "kruskal_katona"
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    if eps > C.KK_MAX_EPS:
        return inconclusive(name, f"eps {eps} exceeds {C.KK_MAX_EPS}", _label(body), r=r, eps=eps)
    alpha = mc_expectation(lambda U: body(r * U), Sphere(body.n, 1.0), plan)
    lo, hi = C.KK_ALPHA_RANGE
    if not lo <= alpha.value <= hi:
        return inconclusive(name, f"alpha(r) = {alpha.value:.4g} outside [{lo}, {hi}]", _label(body), r=r, eps=eps)
    increment = density_increment(body, r, eps, plan)
    _, delta = max_influence_direction(body, 1.0, plan.substream(1))
    detail = {"r": r, "eps": eps, "alpha": alpha.value, "max_influence": delta.value}
    if 0 < delta.value < 1:
        detail["normalized_increment"] = increment.value / (eps * math.sqrt(math.log(1.0 / delta.value)))
    return compare(name, increment, C.KK_C1 * eps, ">=", body=_label(body), **detail)


# non-negativity and rotation invariance ---------------------------------------

def check_nonnegativity(body: ConvexBody, directions, plan: SamplingPlan,
                        method: str = "conditional") -> list[CheckResult]:
    """``Inf_v[K] >= 0`` for each row of ``directions``.

    The conditional estimator is the default: for directions the body barely
    depends on, the plain estimator's value is pure noise around 0.
    """
    from ..influence import influences_along

    ests = influences_along(body, directions, 1.0, plan, method)
    return [compare("nonnegativity", e, 0.0, ">=", body=_label(body), direction=k) for k, e in enumerate(ests)]


def check_rotation_invariance(body: ConvexBody, Q, plan: SamplingPlan) -> CheckResult:
    """``sum_i Inf_{q_i}[K]`` over the columns of an orthogonal ``Q`` against ``TInf[K]``.

    The two sides use independent streams; on a shared stream they would
    agree to rounding, which tests nothing.
    """
    Q = np.asarray(Q, dtype=float)
    if not np.allclose(Q.T @ Q, np.eye(body.n), rtol=0.0, atol=1e-9):
        raise ValueError("basis must be orthonormal")
    n = body.n
    base = total_influence(body, 1.0, plan.substream(0))

    def integrand(X):
        Y = X @ Q
        return body(X) * (n - np.einsum("ij,ij->i", Y, Y)) / SQRT2

    rotated = mc_expectation(integrand, Gaussian(n, 1.0), plan.substream(1))
    return compare("rotation_invariance", rotated, base, "==", body=_label(body))
