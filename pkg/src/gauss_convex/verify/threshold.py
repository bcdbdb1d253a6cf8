"""Threshold curves ``sigma -> gamma_sigma(K)`` and their transition widths."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..bodies import ConvexBody
from ..sampling import Estimate, Gaussian, SamplingPlan, mc_expectation
from . import constants as C
from .checks import FAIL, INCONCLUSIVE, PASS, CheckResult, inconclusive


@dataclass(frozen=True)
class ThresholdCurve:
    """``gamma_sigma(K)`` on a grid of ``sigma`` with the ``(1 - eps) -> eps`` width.

    ``width`` is NaN when the grid does not bracket both crossings.
    """

    sigmas: np.ndarray
    estimates: tuple[Estimate, ...]
    eps: float
    sigma_high: float
    sigma_low: float

    @property
    def values(self) -> np.ndarray:
        return np.array([e.value for e in self.estimates])

    @property
    def std_errors(self) -> np.ndarray:
        return np.array([e.std_error for e in self.estimates])

    @property
    def width(self) -> float:
        return self.sigma_low - self.sigma_high

    @property
    def bracketed(self) -> bool:
        return math.isfinite(self.width)

    def is_monotone(self) -> bool:
        """Non-increasing up to ``3 * (SE_i + SE_{i+1})`` between neighbours."""
        v, s = self.values, self.std_errors
        return bool(np.all(np.diff(v) <= C.SLACK_SIGMAS * (s[:-1] + s[1:])))


def _crossing(sigmas: np.ndarray, values: np.ndarray, level: float) -> float:
    """First ``sigma`` where the non-increasing envelope of ``values`` drops to ``level``."""
    env = np.minimum.accumulate(values)
    below = np.flatnonzero(env <= level)
    if below.size == 0 or below[0] == 0:
        return math.nan
    k = below[0]
    s0, s1, v0, v1 = sigmas[k - 1], sigmas[k], env[k - 1], env[k]
    if v0 == v1:
        return float(s1)
    return float(s0 + (v0 - level) * (s1 - s0) / (v0 - v1))


def threshold_curve(body: ConvexBody, eps: float, sigmas, plan: SamplingPlan) -> ThresholdCurve:
    """Estimate the curve with common random numbers: ``x = sigma z`` for one set of ``z``.

    Since ``K`` is star-shaped each sample's indicator is non-increasing in
    ``sigma``, so the estimated curve is monotone exactly.
    """
    if not 0 < eps < 0.5:
        raise ValueError("eps must lie in (0, 1/2)")
    sigmas = np.asarray(sigmas, dtype=float).ravel()
    if sigmas.size < 2 or np.any(sigmas <= 0) or np.any(np.diff(sigmas) <= 0):
        raise ValueError("sigma grid must be positive and strictly increasing")

    def integrand(Z):
        return np.column_stack([body(s * Z) for s in sigmas])

    ests = tuple(mc_expectation(integrand, Gaussian(body.n, 1.0), plan))
    values = np.array([e.value for e in ests])
    return ThresholdCurve(sigmas, ests, float(eps), _crossing(sigmas, values, 1.0 - eps), _crossing(sigmas, values, eps))


def parse_grid(text: str) -> np.ndarray:
    """``"start:stop:count"`` to an inclusive linear grid."""
    try:
        start, stop, count = text.split(":")
        start, stop, count = float(start), float(stop), int(count)
    except ValueError as exc:
        raise ValueError(f"grid must look like start:stop:count, got {text!r}") from exc
    if count < 2 or not 0 < start < stop:
        raise ValueError(f"grid needs 0 < start < stop and count >= 2, got {text!r}")
    return np.linspace(start, stop, count)


def transition_grid(body: ConvexBody, eps: float, points: int = 64, plan: SamplingPlan | None = None) -> np.ndarray:
    """Log-spaced ``sigma`` grid bracketing the ``1 - eps/2`` and ``eps/2`` crossings.

    Uses the closed-form volume when available and otherwise a coarse
    Monte Carlo scan (``plan`` required).
    """
    if body.gaussian_volume(1.0) is not None:
        vol = body.gaussian_volume
    else:
        if plan is None:
            raise ValueError("a sampling plan is needed for bodies without a volume formula")
        coarse = np.exp(np.linspace(math.log(1e-3), math.log(1e3), 121))
        curve = threshold_curve(body, eps, coarse, plan.with_samples(min(plan.samples, 1 << 13)))
        table = dict(zip(coarse, curve.values))
        vol = lambda s: float(np.interp(math.log(s), np.log(coarse), [table[c] for c in coarse]))

    def solve(level):
        lo, hi = 1e-3, 1e3
        for _ in range(200):
            mid = math.sqrt(lo * hi)
            if vol(mid) > level:
                lo = mid
            else:
                hi = mid
        return math.sqrt(lo * hi)

    a, b = solve(1.0 - 0.5 * eps), solve(0.5 * eps)
    return np.exp(np.linspace(math.log(a), math.log(b), points))


def check_sharp_threshold(curves, eps: float) -> CheckResult:
    """Widths must increase along ``curves``, a sequence of ``(label, ThresholdCurve)``.

    Passes when every consecutive pair is strictly ordered; inconclusive if
    any curve misses a crossing.
    """
    labels = [label for label, _ in curves]
    widths = [curve.width for _, curve in curves]
    detail = {f"width[{label}]": w for label, w in zip(labels, widths)}
    if not all(curve.bracketed for _, curve in curves):
        missing = [label for label, curve in curves if not curve.bracketed]
        return inconclusive("sharp_threshold", f"transition not bracketed for {missing}", ",".join(labels), **detail)
    ordered = all(a < b for a, b in zip(widths[:-1], widths[1:]))
    lhs = Estimate.exact(min(b - a for a, b in zip(widths[:-1], widths[1:])))
    return CheckResult("sharp_threshold", ">=", lhs, Estimate.exact(0.0), 0.0, PASS if ordered else FAIL,
                       " < ".join(labels), dict(detail, eps=eps))
