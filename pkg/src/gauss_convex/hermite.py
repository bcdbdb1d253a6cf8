"""Orthonormal (probabilists') Hermite polynomials and Hermite coefficients.

``h_j`` is normalised so that ``E[h_i(z) h_j(z)] = delta_ij`` for
``z ~ N(0, 1)``.  The sigma-biased family ``h_{j,sigma}(x) = h_j(x / sigma)``
is orthonormal under ``N(0, sigma^2)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .sampling import Estimate, Gaussian, SamplingPlan, mc_expectation

MAX_DEGREE = 60


class UnsupportedDegreeError(ValueError):
    pass


@dataclass(frozen=True)
class MultiIndex:
    entries: tuple[int, ...]

    def __post_init__(self):
        entries = tuple(int(a) for a in self.entries)
        if any(a < 0 for a in entries):
            raise ValueError(f"multi-index entries must be non-negative, got {entries}")
        object.__setattr__(self, "entries", entries)

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def degree(self) -> int:
        return sum(self.entries)

    @classmethod
    def unit(cls, n: int, i: int, k: int = 1) -> "MultiIndex":
        """``k * e_i`` in ``n`` dimensions (``i`` is 0-based)."""
        entries = [0] * n
        entries[i] = k
        return cls(tuple(entries))


@dataclass(frozen=True)
class HermiteParams:
    degree: int
    sigma: float = 1.0

    def __post_init__(self):
        if int(self.degree) < 0:
            raise ValueError("degree must be non-negative")
        if not self.sigma > 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")


def _check_degree(j: int) -> None:
    if j < 0:
        raise ValueError("degree must be non-negative")
    if j > MAX_DEGREE:
        raise UnsupportedDegreeError(f"Hermite degree {j} exceeds the supported maximum {MAX_DEGREE}")


def hermite_eval(j: int, x):
    """Orthonormal Hermite polynomial ``h_j`` at ``x`` (scalar or array).

    Uses ``h_{k+1} = (x h_k - sqrt(k) h_{k-1}) / sqrt(k+1)``.
    """
    _check_degree(j)
    x = np.asarray(x, dtype=float)
    prev = np.ones_like(x)
    if j == 0:
        return prev if prev.ndim else float(prev)
    cur = x.copy()
    for k in range(1, j):
        prev, cur = cur, (x * cur - math.sqrt(k) * prev) / math.sqrt(k + 1)
    return cur if cur.ndim else float(cur)


def biased_hermite_eval(p: HermiteParams, x):
    """``h_{j,sigma}(x) = h_j(x / sigma)``."""
    return hermite_eval(p.degree, np.asarray(x, dtype=float) / p.sigma)


def multi_hermite_eval(alpha: MultiIndex | Sequence[int], sigma: float, x):
    """Product ``prod_i h_{alpha_i, sigma}(x_i)``.

    ``x`` is a single point of length ``n`` or an ``(m, n)`` batch.
    """
    alpha = alpha if isinstance(alpha, MultiIndex) else MultiIndex(tuple(alpha))
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != len(alpha):
        raise ValueError(f"multi-index has length {len(alpha)} but point has dimension {x.shape[-1]}")
    out = np.ones(x.shape[:-1])
    for i, a in enumerate(alpha):
        if a:
            out = out * hermite_eval(a, x[..., i] / sigma)
    return out if out.ndim else float(out)


def _as_batch_function(f):
    def wrapped(X):
        return np.asarray(f(X), dtype=float)

    return wrapped


def hermite_coefficient(f, alpha: MultiIndex | Sequence[int], sigma: float, plan: SamplingPlan) -> Estimate:
    """Monte Carlo estimate of ``<f, h_{alpha,sigma}>`` under ``N(0, sigma^2)^n``.

    ``f`` takes an ``(m, n)`` batch and returns ``m`` values; a
    :class:`~gauss_convex.bodies.ConvexBody` works directly.
    """
    alpha = alpha if isinstance(alpha, MultiIndex) else MultiIndex(tuple(alpha))
    f = _as_batch_function(f)

    def integrand(X):
        return f(X) * multi_hermite_eval(alpha, sigma, X)

    return mc_expectation(integrand, Gaussian(len(alpha), sigma), plan)


def directional_coefficient(f, k: int, v, sigma: float, plan: SamplingPlan) -> Estimate:
    """Estimate of ``E[f(x) h_{k,sigma}(v . x)]`` for unit ``v``."""
    v = np.asarray(v, dtype=float)
    if abs(np.linalg.norm(v) - 1.0) > 1e-9:
        raise ValueError(f"direction must be a unit vector, |v| = {np.linalg.norm(v)!r}")
    _check_degree(k)
    f = _as_batch_function(f)

    def integrand(X):
        return f(X) * hermite_eval(k, (X @ v) / sigma)

    return mc_expectation(integrand, Gaussian(v.size, sigma), plan)
