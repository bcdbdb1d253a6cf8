"""Explicit constants for every inequality whose source states it only up to O(.).

Each tested constant has a validator that recomputes, from closed forms or
quadrature, the extremal quantity it is checked against.
"""
from __future__ import annotations

import math

import numpy as np
from scipy import optimize

from ..special import normal_cdf, normal_pdf

SLACK_SIGMAS = 3.0

# TInf >= POINCARE_C0 * Var
POINCARE_C0 = 0.1
POINCARE_FAMILY_RANGE = (0.01, 6.0)

# alpha_K(r (1 - eps)) - alpha_K(r) >= KK_C1 * eps
KK_C1 = 0.05
KK_MAX_EPS = 0.05
KK_ALPHA_RANGE = (0.1, 0.9)

# Inf_v >= gamma * exp(-c^2) * SLAB_BOUND_FACTOR for K inside {|v.x| <= c}
SLAB_BOUND_FACTOR = 1.0 / (2.0 ** 1.5 * math.pi)

# Inf_v* >= FRIEDGUT_C * s2 * exp(-FRIEDGUT_EXPONENT * I^2 / s2^2) when Var >= s2
FRIEDGUT_C = 1.0 / (2.0 ** 2.5 * math.pi)
FRIEDGUT_EXPONENT = 4.0 * math.pi
FRIEDGUT_OUTER = 1 << 16
FRIEDGUT_INNER = 1 << 10

# finite differences
MR_STEP_FACTOR = 1e-3
DILATION_DELTA = 1e-2

ISOPERIMETRIC_FACTOR = math.sqrt(2.0 / math.pi)


def poincare_slab_ratio(c):
    """``TInf / Var`` for the slab ``|x_1| <= c``."""
    c = np.asarray(c, dtype=float)
    gamma = 2.0 * normal_cdf(c) - 1.0
    return math.sqrt(2.0) * c * normal_pdf(c) / (gamma * (1.0 - gamma))


def validate_poincare_constant() -> tuple[float, float]:
    """Infimum of the slab ratio over ``POINCARE_FAMILY_RANGE`` and the minimiser."""
    lo, hi = POINCARE_FAMILY_RANGE
    grid = np.linspace(lo, hi, 6001)
    ratios = poincare_slab_ratio(grid)
    k = int(np.argmin(ratios))
    a, b = grid[max(k - 1, 0)], grid[min(k + 1, grid.size - 1)]
    if k in (0, grid.size - 1):
        return float(ratios[k]), float(grid[k])
    res = optimize.minimize_scalar(lambda c: float(poincare_slab_ratio(c)), bounds=(a, b), method="bounded",
                                   options={"xatol": 1e-10})
    return float(res.fun), float(res.x)


def friedgut_step_bound(variance: float, total_influence: float) -> float:
    """Lower bound on the largest influence of a function with the given variance and total influence."""
    if variance <= 0:
        return 0.0
    return FRIEDGUT_C * variance * math.exp(-FRIEDGUT_EXPONENT * total_influence ** 2 / variance ** 2)


def friedgut_log_step_cap(total_influence: float, eps: float) -> float:
    """Natural log of ``I / (FRIEDGUT_C eps exp(-FRIEDGUT_EXPONENT I^2 / eps^2))``.

    Kept in log form because the cap overflows a float for modest ``I / eps``.
    """
    if total_influence <= 0:
        return -math.inf
    return (math.log(total_influence) - math.log(FRIEDGUT_C * eps)
            + FRIEDGUT_EXPONENT * total_influence ** 2 / eps ** 2)


def validate_kk_constant(n: int = 16, eps: float = 0.01) -> float:
    """Smallest ``increment / eps`` over slabs whose shell density at ``r = sqrt(n)`` lies in ``KK_ALPHA_RANGE``."""
    from ..influence import slab_shell_density

    r = math.sqrt(n)
    best = math.inf
    for c in np.linspace(0.05, r, 400):
        alpha = slab_shell_density(c, r, n)
        if not KK_ALPHA_RANGE[0] <= alpha <= KK_ALPHA_RANGE[1]:
            continue
        inc = slab_shell_density(c, r * (1.0 - eps), n) - alpha
        best = min(best, inc / eps)
    return best
