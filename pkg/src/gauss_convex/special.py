"""Scalar special functions used across the package.

Thin wrappers over :mod:`scipy.special` so callers can pass floats or arrays
and get the same dtype back.
"""
from __future__ import annotations

import math

import numpy as np
from scipy import special as _sp

SQRT2 = math.sqrt(2.0)
SQRT2PI = math.sqrt(2.0 * math.pi)


def normal_pdf(x):
    """Standard normal density."""
    return np.exp(-0.5 * np.square(x)) / SQRT2PI


def normal_cdf(x):
    """Standard normal CDF."""
    return _sp.ndtr(x)


def normal_ppf(p):
    """Inverse of :func:`normal_cdf`."""
    return _sp.ndtri(p)


def chi2_cdf(x, n):
    """CDF of the chi-square distribution with ``n`` degrees of freedom."""
    x = np.maximum(x, 0.0)
    return _sp.gammainc(0.5 * n, 0.5 * x)


def chi_pdf(r: float, n: int) -> float:
    """Density of the chi distribution with ``n`` degrees of freedom at ``r``."""
    if r < 0:
        return 0.0
    if r == 0.0:
        return math.sqrt(2.0 / math.pi) if n == 1 else 0.0
    logp = (n - 1) * math.log(r) - 0.5 * r * r - (0.5 * n - 1.0) * math.log(2.0) - math.lgamma(0.5 * n)
    return math.exp(logp)


def isoperimetric_profile(alpha):
    """Gaussian isoperimetric function ``phi(Phi^{-1}(alpha))``.

    Returns 0 at ``alpha`` in {0, 1}.
    """
    alpha = np.asarray(alpha, dtype=float)
    with np.errstate(invalid="ignore"):
        out = normal_pdf(normal_ppf(alpha))
    out = np.where((alpha <= 0.0) | (alpha >= 1.0), 0.0, out)
    return out if out.ndim else float(out)


def chi2_pdf(x, n):
    """Density of the chi-square distribution with ``n`` degrees of freedom."""
    logp = _sp.xlogy(0.5 * n - 1.0, x) - 0.5 * x - 0.5 * n * math.log(2.0) - _sp.gammaln(0.5 * n)
    return np.exp(logp)


def chi2_ppf(p, n):
    """Inverse of :func:`chi2_cdf`."""
    return 2.0 * _sp.gammaincinv(0.5 * n, p)
