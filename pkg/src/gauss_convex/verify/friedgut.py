"""Iterative averaging of a body's indicator over max-influence directions.

Averaging ``K`` over a set ``S`` of orthonormal directions gives
``g_S(x) = E_y[K(P x + y)]`` where ``P`` projects onto the complement of
``span(S)`` and ``y ~ N(0, sigma^2)`` lives in ``span(S)``.  Influences along
directions orthogonal to ``S`` are unchanged by averaging, and ``g_S`` has
no influence along ``S``, so the next direction is the bottom eigenvector of
``K``'s own second-moment matrix restricted to the complement.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..bodies import ConvexBody
from ..influence import bottom_direction, influence_along, second_moment_matrix
from ..sampling import Estimate, SamplingPlan, block_moments, standard_normals
from . import constants as C
from .checks import FAIL, INCONCLUSIVE, PASS, volume_and_total_influence

INNER_CHUNK = 64
MATRIX_SAMPLES = 1 << 20


@dataclass(frozen=True)
class AveragingStep:
    direction: np.ndarray
    influence: Estimate
    residual_variance: Estimate
    bound: float


@dataclass(frozen=True)
class AveragingTrace:
    """Record of one run: the chosen directions with their influences and the variance after each step."""

    steps: tuple[AveragingStep, ...]
    initial_variance: Estimate
    total_influence: Estimate
    eps_target: float
    step_cap: int
    log_bound_cap: float
    verdict: str
    reason: str = ""

    @property
    def step_count(self) -> int:
        return len(self.steps)

    @property
    def directions(self) -> np.ndarray:
        if not self.steps:
            return np.zeros((0, 0))
        return np.array([s.direction for s in self.steps])

    @property
    def terminal_variance(self) -> Estimate:
        return self.steps[-1].residual_variance if self.steps else self.initial_variance

    def within_bound_cap(self) -> bool:
        """Step count is at most ``I / (c eps e^{-4 pi I^2 / eps^2})``."""
        return self.step_count == 0 or math.log(self.step_count) <= self.log_bound_cap

    def influences_above_bound(self) -> bool:
        """Every chosen direction's influence clears the per-step lower bound up to slack."""
        return all(s.influence.value >= s.bound - C.SLACK_SIGMAS * s.influence.std_error for s in self.steps)


def _complement_basis(S: np.ndarray, n: int) -> np.ndarray:
    """Orthonormal basis (columns) of the orthogonal complement of the rows of ``S``."""
    if S.shape[0] == 0:
        return np.eye(n)
    _, _, Vt = np.linalg.svd(S, full_matrices=True)
    return Vt[S.shape[0]:].T


def _gram_schmidt(v: np.ndarray, S: list[np.ndarray]) -> np.ndarray:
    for s in S:
        v = v - (v @ s) * s
    return v / np.linalg.norm(v)


def residual_variance(body: ConvexBody, S, plan: SamplingPlan, inner: int = C.FRIEDGUT_INNER,
                      sigma: float = 1.0) -> Estimate:
    """Variance of ``g_S`` by nested Monte Carlo.

    For each outer point two independent inner averages ``g1, g2`` are
    formed; ``E[g1 g2] = E[g^2]`` without bias and ``(g1 + g2) / 2`` estimates
    ``g``.  The standard error comes from the delta method on the pair.
    """
    S = np.atleast_2d(np.asarray(S, dtype=float)).reshape(-1, body.n)
    k, n = S.shape
    if inner < 1:
        raise ValueError("inner sample count must be >= 1")

    def inner_mean(gen, Xp, m):
        total = np.zeros(m)
        done = 0
        while done < inner:
            c = min(INNER_CHUNK, inner - done)
            Y = sigma * standard_normals(gen, m * c * k).reshape(m, c, k)
            pts = Xp[:, None, :] + Y @ S
            total += body(pts.reshape(m * c, n)).reshape(m, c).sum(axis=1)
            done += c
        return total / inner

    def block(gen, m):
        X = sigma * standard_normals(gen, m * n).reshape(m, n)
        Xp = X - (X @ S.T) @ S if k else X
        if k == 0:
            g1 = g2 = body(Xp)
        else:
            g1 = inner_mean(gen, Xp, m)
            g2 = inner_mean(gen, Xp, m)
        a, b = g1 * g2, 0.5 * (g1 + g2)
        return np.column_stack([a, b, a + b])

    mean, var, count, _ = block_moments(block, plan)
    ea, eb = mean[0], mean[1]
    va, vb, vab = var[0], var[1], var[2]
    cov = 0.5 * (vab - va - vb)
    # Var[g] ~ E[a] - E[b]^2, gradient (1, -2 E[b])
    delta_var = va + 4.0 * eb * eb * vb - 4.0 * eb * cov
    value = max(ea - eb * eb, 0.0) if k == n else ea - eb * eb
    return Estimate(float(value), float(math.sqrt(max(delta_var, 0.0) / count)), count, plan.seed)


def friedgut_average(body: ConvexBody, eps_target: float, plan: SamplingPlan, step_cap: int | None = None,
                     inner: int = C.FRIEDGUT_INNER, sigma: float = 1.0,
                     matrix_samples: int = MATRIX_SAMPLES) -> AveragingTrace:
    """Average out max-influence directions until the residual variance is at most ``eps_target``.

    ``plan.samples`` is the outer sample count.  The default cap is the
    smaller of ``n`` (after ``n`` steps the average is constant) and the
    bound ``I / (c eps e^{-4 pi I^2 / eps^2})``.  The verdict is ``fail`` if
    the cap is hit and ``inconclusive`` when the final variance is within
    its statistical slack of the target.
    """
    if not 0 < eps_target < 1:
        raise ValueError("eps_target must lie in (0, 1)")
    n = body.n
    gamma, tinf = volume_and_total_influence(body, sigma, plan.substream(0))
    var0 = Estimate(gamma.value * (1.0 - gamma.value), abs(1.0 - 2.0 * gamma.value) * gamma.std_error,
                    gamma.samples, gamma.seed)
    total = max(tinf.value, 0.0)
    log_cap = C.friedgut_log_step_cap(total, eps_target)
    bound_cap = math.floor(math.exp(log_cap)) if log_cap < math.log(n + 1) else n
    cap = min(n, bound_cap) if step_cap is None else int(step_cap)

    M = second_moment_matrix(body, sigma, plan.substream(1).with_samples(matrix_samples))
    chosen: list[np.ndarray] = []
    steps: list[AveragingStep] = []
    current = var0
    verdict, reason = PASS, ""
    while current.value > eps_target:
        if len(chosen) >= cap:
            verdict, reason = FAIL, f"step cap {cap} reached"
            break
        B = _complement_basis(np.array(chosen).reshape(-1, n), n)
        v = _gram_schmidt(bottom_direction(M, B), chosen)
        inf = influence_along(body, v, sigma, plan.substream(2, len(chosen)).with_samples(matrix_samples))
        bound = C.friedgut_step_bound(current.value, total)
        chosen.append(v)
        current = residual_variance(body, np.array(chosen), plan.substream(3, len(chosen)), inner, sigma)
        steps.append(AveragingStep(v, inf, current, bound))
    if verdict == PASS and abs(current.value - eps_target) <= C.SLACK_SIGMAS * current.std_error:
        verdict, reason = INCONCLUSIVE, "final variance within statistical slack of the target"
    return AveragingTrace(tuple(steps), var0, tinf, float(eps_target), cap, log_cap, verdict, reason)
