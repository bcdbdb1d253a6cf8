"""Convex influences, total influence and related quantities.

Under ``x ~ N(0, sigma^2)^n`` the influence of a unit direction ``v`` on a
body ``K`` is ``E[K(x) (1 - (v.x / sigma)^2)] / sqrt(2)``.  Writing
``M = E[K(x) x x^T]`` gives ``Inf_v = (gamma - v^T M v / sigma^2) / sqrt(2)``,
so the direction of largest influence is the bottom eigenvector of ``M``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bodies import ConvexBody, fiber_intervals
from .linalg import jacobi_eigh
from .sampling import Estimate, Gaussian, SamplingPlan, Sphere, mc_expectation, quadrature_1d
from .special import SQRT2, chi2_cdf, chi2_pdf, chi2_ppf, normal_cdf, normal_pdf, normal_ppf

UNIT_TOL = 1e-9


def _unit(v, n: int) -> np.ndarray:
    v = np.asarray(v, dtype=float).ravel()
    if v.size != n:
        raise ValueError(f"direction has length {v.size}, body dimension is {n}")
    norm = np.linalg.norm(v)
    if abs(norm - 1.0) > UNIT_TOL:
        raise ValueError(f"direction must be a unit vector, |v| = {norm!r}")
    return v


def _check_sigma(sigma):
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")


def gaussian_volume(body: ConvexBody, sigma: float, plan: SamplingPlan) -> Estimate:
    """Monte Carlo estimate of ``gamma_sigma(K)``."""
    _check_sigma(sigma)
    return mc_expectation(body, Gaussian(body.n, sigma), plan)


def _chord_term(body: ConvexBody, X: np.ndarray, V: np.ndarray, sigma: float) -> np.ndarray:
    """Per-point ``(b phi(b) - a phi(a)) / sqrt(2)`` for the chord ``[a, b]`` through ``x`` along each row of ``V``.

    Chord parameters are in units of ``sigma``; empty chords give 0.
    """
    out = np.empty((X.shape[0], V.shape[0]))
    for k, v in enumerate(V):
        Y = X - np.outer(X @ v, v)
        lo, hi = body._chord(Y, np.broadcast_to(v, Y.shape))
        a, b = lo / sigma, hi / sigma
        with np.errstate(invalid="ignore"):
            ta = np.where(np.isfinite(a), a * normal_pdf(a), 0.0)
            tb = np.where(np.isfinite(b), b * normal_pdf(b), 0.0)
        out[:, k] = np.where(lo <= hi, tb - ta, 0.0) / SQRT2
    return out


def influences_along(body: ConvexBody, directions, sigma: float, plan: SamplingPlan,
                     method: str = "plain") -> list[Estimate]:
    """Influences of the rows of ``directions``, all on one sample stream.

    ``method="plain"`` averages ``K(x) (1 - t^2) / sqrt(2)`` with ``t = v.x / sigma``.
    ``method="conditional"`` integrates ``t`` out exactly along the chord
    through each point (``(1 - t^2) phi(t)`` is the derivative of ``t phi(t)``),
    which estimates the same expectation with smaller variance and gives
    exactly 0 for a direction the body does not depend on.
    """
    _check_sigma(sigma)
    if method not in ("plain", "conditional"):
        raise ValueError(f"unknown method {method!r}")
    V = np.atleast_2d(np.asarray(directions, dtype=float))
    for row in V:
        _unit(row, body.n)

    if method == "plain":
        def integrand(X):
            T = (X @ V.T) / sigma
            return body(X)[:, None] * (1.0 - T * T) / SQRT2
    else:
        def integrand(X):
            return _chord_term(body, X, V, sigma)

    return mc_expectation(integrand, Gaussian(body.n, sigma), plan)


def influence_along(body: ConvexBody, v, sigma: float, plan: SamplingPlan, method: str = "plain") -> Estimate:
    """Estimate of the sigma-biased convex influence of direction ``v``.

    See :func:`influences_along` for ``method``.
    """
    v = _unit(v, body.n)
    return influences_along(body, v[None, :], sigma, plan, method)[0]


def total_influence(body: ConvexBody, sigma: float, plan: SamplingPlan) -> Estimate:
    """Single-pass estimate of ``E[K(x) (n - |x / sigma|^2)] / sqrt(2)``."""
    _check_sigma(sigma)
    n = body.n

    def integrand(X):
        sq = np.einsum("ij,ij->i", X, X) / (sigma * sigma)
        return body(X) * (n - sq) / SQRT2

    return mc_expectation(integrand, Gaussian(n, sigma), plan)


@dataclass(frozen=True)
class SecondMomentMatrix:
    """``M[i, j] = E[K(x) x_i x_j]`` with per-entry standard errors.

    All entries and the volume come from the same sample points.
    """

    values: np.ndarray
    std_errors: np.ndarray
    volume: Estimate
    sigma: float

    @property
    def n(self) -> int:
        return self.values.shape[0]

    def entry(self, i: int, j: int) -> Estimate:
        return Estimate(float(self.values[i, j]), float(self.std_errors[i, j]), self.volume.samples, self.volume.seed)

    def quadratic_form(self, v) -> float:
        v = np.asarray(v, dtype=float)
        return float(v @ self.values @ v)

    def influence(self, v) -> Estimate:
        """``(gamma - v^T M v / sigma^2) / sqrt(2)``.

        The standard error adds the entry errors with weights ``|v_i v_j|``,
        which bounds the true error whatever the correlations.
        """
        v = _unit(v, self.n)
        s2 = self.sigma ** 2
        value = (self.volume.value - self.quadratic_form(v) / s2) / SQRT2
        w = np.abs(np.outer(v, v))
        se = (self.volume.std_error + float(np.sum(w * self.std_errors)) / s2) / SQRT2
        return Estimate(value, se, self.volume.samples, self.volume.seed)


def second_moment_matrix(body: ConvexBody, sigma: float, plan: SamplingPlan) -> SecondMomentMatrix:
    """Estimate ``M`` (each unordered pair once) and ``gamma_sigma(K)`` on one stream."""
    _check_sigma(sigma)
    n = body.n
    iu, ju = np.triu_indices(n)

    def integrand(X):
        k = body(X)
        return np.column_stack([k, k[:, None] * X[:, iu] * X[:, ju]])

    ests = mc_expectation(integrand, Gaussian(n, sigma), plan)
    values = np.zeros((n, n))
    errors = np.zeros((n, n))
    for e, i, j in zip(ests[1:], iu, ju):
        values[i, j] = values[j, i] = e.value
        errors[i, j] = errors[j, i] = e.std_error
    return SecondMomentMatrix(values, errors, ests[0], float(sigma))


def _canonical_sign(v: np.ndarray) -> np.ndarray:
    k = int(np.argmax(np.abs(v)))
    return v if v[k] >= 0 else -v


def bottom_direction(M: SecondMomentMatrix, subspace=None) -> np.ndarray:
    """Unit vector minimising ``v^T M v``, optionally within ``span(subspace)``.

    ``subspace`` is an ``(n, k)`` matrix with orthonormal columns.
    """
    if subspace is None:
        _, V = jacobi_eigh(M.values)
        return _canonical_sign(V[:, 0])
    B = np.asarray(subspace, dtype=float)
    _, W = jacobi_eigh(B.T @ M.values @ B)
    v = B @ W[:, 0]
    return _canonical_sign(v / np.linalg.norm(v))


def max_influence_direction(body: ConvexBody, sigma: float, plan: SamplingPlan, subspace=None):
    """Direction of largest influence and its influence estimate.

    The direction is the bottom eigenvector of ``M``; the returned estimate
    is recomputed on the same sample stream so its standard error is the
    plain CLT one.
    """
    M = second_moment_matrix(body, sigma, plan)
    v = bottom_direction(M, subspace)
    return v, influence_along(body, v, sigma, plan)


@dataclass(frozen=True)
class ShellDensity:
    """Estimates of ``alpha_K(r)``, the fraction of the radius-``r`` sphere inside ``K``."""

    radii: np.ndarray
    estimates: tuple[Estimate, ...]

    @property
    def values(self) -> np.ndarray:
        return np.array([e.value for e in self.estimates])

    @property
    def std_errors(self) -> np.ndarray:
        return np.array([e.std_error for e in self.estimates])


def shell_density(body: ConvexBody, radii, plan: SamplingPlan) -> ShellDensity:
    """``alpha_K`` on a grid of radii, all radii sharing the same sphere directions."""
    radii = np.asarray(radii, dtype=float).ravel()
    if np.any(radii <= 0):
        raise ValueError("radii must be positive")

    def integrand(U):
        return np.column_stack([body(r * U) for r in radii])

    ests = mc_expectation(integrand, Sphere(body.n, 1.0), plan)
    return ShellDensity(radii, tuple(ests))


def density_increment(body: ConvexBody, r: float, eps: float, plan: SamplingPlan) -> Estimate:
    """``alpha_K(r (1 - eps)) - alpha_K(r)`` with common random numbers."""
    if not r > 0:
        raise ValueError("r must be positive")
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")

    def integrand(U):
        return body(r * (1.0 - eps) * U) - body(r * U)

    return mc_expectation(integrand, Sphere(body.n, 1.0), plan)


def geometric_influence(body: ConvexBody, i: int, plan: SamplingPlan) -> Estimate:
    """Expected boundary content ``phi(a) + phi(b)`` of the fibers along coordinate ``i``.

    Empty fibers contribute 0 and infinite endpoints contribute nothing.
    """

    def integrand(X):
        lo, hi = fiber_intervals(body, i, X)
        nonempty = lo <= hi
        return np.where(nonempty, normal_pdf(lo) + normal_pdf(hi), 0.0)

    return mc_expectation(integrand, Gaussian(body.n, 1.0), plan)


def fiber_variance_influence(body: ConvexBody, i: int, plan: SamplingPlan) -> Estimate:
    """Expected variance ``p (1 - p)`` of ``K`` along the fibers of coordinate ``i``."""

    def integrand(X):
        lo, hi = fiber_intervals(body, i, X)
        p = np.clip(normal_cdf(hi) - normal_cdf(lo), 0.0, 1.0)
        return p * (1.0 - p)

    return mc_expectation(integrand, Gaussian(body.n, 1.0), plan)


# closed forms --------------------------------------------------------------

def slab_influence(c: float, sigma: float = 1.0) -> float:
    """Influence of a slab of half-width ``c`` along its normal: ``sqrt(2) u phi(u)``, ``u = c / sigma``."""
    u = c / sigma
    return float(SQRT2 * u * normal_pdf(u))


def analytic_cube_influence(r: float, n: int) -> float:
    """Coordinate influence of the cube ``[-r, r]^n``: ``(2 Phi(r) - 1)^(n-1) sqrt(2) r phi(r)``."""
    if not r > 0:
        raise ValueError("r must be positive")
    return float((2.0 * normal_cdf(r) - 1.0) ** (n - 1) * slab_influence(r))


def ball_total_influence(r: float, n: int, sigma: float = 1.0) -> float:
    """Total influence of ``B_r``.

    With ``s = (r / sigma)^2``, ``int_0^s (n - t) f_n(t) dt = 2 s f_n(s)`` for
    the chi-square density ``f_n``, so the value is ``sqrt(2) s f_n(s)``.
    """
    s = (r / sigma) ** 2
    return float(SQRT2 * s * chi2_pdf(s, n))


def ball_volume(r: float, n: int, sigma: float = 1.0) -> float:
    return float(chi2_cdf((r / sigma) ** 2, n))


def matched_slab_width(gamma: float) -> float:
    """Half-width ``c`` with ``2 Phi(c) - 1 = gamma``."""
    if not 0 < gamma < 1:
        raise ValueError("gamma must lie in (0, 1)")
    return float(normal_ppf(0.5 * (1.0 + gamma)))


def matched_ball_radius(gamma: float, n: int) -> float:
    """Radius ``r`` with ``gamma(B_r) = gamma`` in dimension ``n``."""
    if not 0 < gamma < 1:
        raise ValueError("gamma must lie in (0, 1)")
    return float(math.sqrt(chi2_ppf(gamma, n)))


def half_volume_cube_radius(n: int) -> float:
    """``r`` with ``(2 Phi(r) - 1)^n = 1/2``."""
    return float(normal_ppf(0.5 * (1.0 + 2.0 ** (-1.0 / n))))


def slab_shell_density(c: float, r: float, n: int, tol: float = 1e-12) -> float:
    """``alpha(r)`` for the slab ``|x_1| <= c`` by quadrature of the first-coordinate density on the sphere.

    A uniform point on the unit sphere has first coordinate with density
    proportional to ``(1 - t^2)^((n - 3) / 2)`` on ``[-1, 1]``.
    """
    if n < 2:
        return 1.0 if r <= c else 0.0
    u = c / r
    if u >= 1.0:
        return 1.0
    log_norm = math.lgamma(0.5 * n) - math.lgamma(0.5) - math.lgamma(0.5 * (n - 1))
    norm = math.exp(log_norm)
    k = 0.5 * (n - 3)
    return 2.0 * norm * quadrature_1d(lambda t: (1.0 - t * t) ** k, 0.0, u, tol)
