"""Seeded random sources, Monte Carlo estimators and 1-D adaptive quadrature.

Every random quantity in the package is drawn through a :class:`SamplingPlan`.
A plan's ``N`` samples are cut into fixed-size blocks, and block ``b`` is
drawn from its own Philox generator keyed by ``(seed, *stream, b)``.  The
number of workers only decides which thread evaluates which block; partial
moments are merged in block order, so results are bit-identical for any
worker count.
"""
from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Iterator, Sequence

import numpy as np

from .special import chi_pdf

BLOCK_SIZE = 1 << 14
_SEED_LIMIT = 1 << 64


class QuadratureWarning(RuntimeWarning):
    """Adaptive quadrature hit its depth cap before meeting the tolerance."""


@dataclass(frozen=True)
class SamplingPlan:
    """Seed, sample count and worker count for one Monte Carlo estimate.

    ``stream`` is a tuple of integers that distinguishes independent
    substreams derived from the same seed; use :meth:`substream` rather than
    setting it directly.
    """

    seed: int
    samples: int = 1 << 20
    workers: int = 1
    stream: tuple[int, ...] = field(default=())

    def __post_init__(self):
        if not isinstance(self.seed, (int, np.integer)) or not 0 <= int(self.seed) < _SEED_LIMIT:
            raise ValueError(f"seed must be an integer in [0, 2**64), got {self.seed!r}")
        if int(self.samples) < 1:
            raise ValueError(f"samples must be >= 1, got {self.samples}")
        if int(self.workers) < 1:
            raise ValueError(f"workers must be >= 1, got {self.workers}")

    def substream(self, *keys: int) -> "SamplingPlan":
        """Independent plan with the same seed, keyed by ``keys``."""
        return replace(self, stream=self.stream + tuple(int(k) for k in keys))

    def with_samples(self, samples: int) -> "SamplingPlan":
        return replace(self, samples=int(samples))

    def generator(self, block: int) -> np.random.Generator:
        ss = np.random.SeedSequence(int(self.seed), spawn_key=self.stream + (int(block),))
        return np.random.Generator(np.random.Philox(ss))

    def blocks(self) -> Iterator[tuple[int, int]]:
        """Yield ``(block_index, block_size)`` covering ``samples`` points."""
        full, rest = divmod(int(self.samples), BLOCK_SIZE)
        for b in range(full):
            yield b, BLOCK_SIZE
        if rest:
            yield full, rest


@dataclass(frozen=True)
class Estimate:
    """A Monte Carlo or exact value with its standard error."""

    value: float
    std_error: float = 0.0
    samples: int = 0
    seed: int | None = None

    @classmethod
    def exact(cls, value: float) -> "Estimate":
        return cls(float(value), 0.0, 0, None)

    def __float__(self):
        return float(self.value)

    def __str__(self):
        return f"{self.value:.6g} ± {self.std_error:.2g}"


def standard_normals(gen: np.random.Generator, count: int) -> np.ndarray:
    """``count`` standard normals by Box-Muller on the generator's uniforms."""
    half = (count + 1) // 2
    u = gen.random((2, half))
    radius = np.sqrt(-2.0 * np.log1p(-u[0]))
    angle = 2.0 * np.pi * u[1]
    z = np.empty(2 * half)
    z[0::2] = radius * np.cos(angle)
    z[1::2] = radius * np.sin(angle)
    return z[:count]


@dataclass(frozen=True)
class Gaussian:
    """``N(0, sigma^2 I_n)``."""

    n: int
    sigma: float = 1.0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("dimension must be >= 1")
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")

    def draw(self, gen: np.random.Generator, m: int) -> np.ndarray:
        return self.sigma * standard_normals(gen, m * self.n).reshape(m, self.n)


@dataclass(frozen=True)
class Sphere:
    """Uniform (Haar) measure on the radius-``radius`` sphere in R^n."""

    n: int
    radius: float = 1.0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("dimension must be >= 1")
        if self.radius < 0:
            raise ValueError("radius must be non-negative")

    def draw(self, gen: np.random.Generator, m: int) -> np.ndarray:
        g = standard_normals(gen, m * self.n).reshape(m, self.n)
        return self.radius * g / np.linalg.norm(g, axis=1, keepdims=True)


def _draw_all(dist, plan: SamplingPlan) -> np.ndarray:
    return np.concatenate([dist.draw(plan.generator(b), m) for b, m in plan.blocks()])


def gaussian_sample(n: int, sigma: float, plan: SamplingPlan) -> np.ndarray:
    """``plan.samples`` draws from ``N(0, sigma^2)^n`` as an ``(N, n)`` array."""
    return _draw_all(Gaussian(n, sigma), plan)


def sphere_sample(n: int, r: float, plan: SamplingPlan) -> np.ndarray:
    """``plan.samples`` uniform points on the radius-``r`` sphere."""
    return _draw_all(Sphere(n, r), plan)


def chi_sample(n: int, plan: SamplingPlan) -> np.ndarray:
    """``plan.samples`` draws from the chi distribution with ``n`` degrees of freedom."""
    return np.linalg.norm(_draw_all(Gaussian(n, 1.0), plan), axis=1)


def _block_moments(block_fn, plan, b, m):
    values = np.asarray(block_fn(plan.generator(b), m), dtype=float)
    if values.shape[0] != m:
        raise ValueError(f"integrand returned {values.shape[0]} rows for {m} points")
    scalar = values.ndim == 1
    values = values.reshape(m, -1)
    mean = values.mean(axis=0)
    m2 = np.square(values - mean).sum(axis=0)
    return m, mean, m2, scalar


def block_moments(block_fn: Callable[[np.random.Generator, int], np.ndarray], plan: SamplingPlan):
    """Sample mean and variance of per-point values produced block by block.

    ``block_fn(gen, m)`` draws whatever it needs from ``gen`` and returns
    ``m`` values (or an ``(m, k)`` array).  Returns ``(mean, variance, N,
    scalar)``; ``scalar`` tells whether ``block_fn`` returned a 1-D array.
    Block moments are merged with Chan's update in block order, so the
    result does not depend on ``plan.workers``.
    """
    jobs = list(plan.blocks())
    if plan.workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=plan.workers) as pool:
            parts = list(pool.map(lambda job: _block_moments(block_fn, plan, *job), jobs))
    else:
        parts = [_block_moments(block_fn, plan, b, m) for b, m in jobs]

    count, mean, m2, scalar = parts[0]
    mean = mean.copy()
    m2 = m2.copy()
    for nb, mean_b, m2_b, _ in parts[1:]:
        total = count + nb
        delta = mean_b - mean
        mean += delta * (nb / total)
        m2 += m2_b + np.square(delta) * (count * nb / total)
        count = total
    var = m2 / (count - 1) if count > 1 else np.full_like(m2, np.inf)
    return mean, var, count, scalar


def mc_moments(f: Callable[[np.ndarray], np.ndarray], dist, plan: SamplingPlan):
    """Sample mean and sample variance of ``f`` under ``dist``.

    ``f`` maps an ``(m, n)`` batch of points to an ``(m,)`` or ``(m, k)``
    array.  See :func:`block_moments` for the return value.
    """
    return block_moments(lambda gen, m: f(dist.draw(gen, m)), plan)


def _to_estimates(mean, var, count, scalar, plan):
    se = np.sqrt(np.maximum(var, 0.0) / count)
    ests = [Estimate(float(mu), float(s), count, plan.seed) for mu, s in zip(mean, se)]
    return ests[0] if scalar else ests


def mc_expectation(f, dist, plan: SamplingPlan):
    """Monte Carlo estimate of ``E[f(x)]`` for ``x ~ dist``.

    Returns an :class:`Estimate` for a scalar integrand, or a list of them
    when ``f`` returns one column per integrand.  All columns are evaluated on
    the same points.
    """
    return _to_estimates(*mc_moments(f, dist, plan), plan)


def mc_expectation_blocks(block_fn, plan: SamplingPlan):
    """Like :func:`mc_expectation` for a ``block_fn(gen, m)`` that draws its own points."""
    return _to_estimates(*block_moments(block_fn, plan), plan)


def quadrature_1d(
    f: Callable[[float], float],
    a: float,
    b: float,
    tol: float = 1e-10,
    *,
    points: Sequence[float] = (),
    panels: int = 8,
    max_depth: int = 50,
    full_output: bool = False,
):
    """Adaptive Simpson integral of ``f`` over ``[a, b]``.

    ``points`` are interior breakpoints (jumps, kinks) that always become
    panel edges.  If a panel reaches ``max_depth`` without meeting its share
    of ``tol`` a :class:`QuadratureWarning` reports the achieved error.  With
    ``full_output`` the return value is ``(value, error_estimate)``.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    if a == b:
        return (0.0, 0.0) if full_output else 0.0
    if a > b:
        out = quadrature_1d(f, b, a, tol, points=points, panels=panels, max_depth=max_depth, full_output=True)
        return (-out[0], out[1]) if full_output else -out[0]

    edges = sorted({float(a), float(b), *(float(p) for p in points if a < p < b)})
    grid = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        grid.extend(np.linspace(lo, hi, panels + 1)[:-1].tolist())
    grid.append(float(b))

    length = b - a
    pieces, errors = [], []
    capped = False
    for lo, hi in zip(grid[:-1], grid[1:]):
        flo, fhi = f(lo), f(hi)
        mid = 0.5 * (lo + hi)
        fmid = f(mid)
        whole = (hi - lo) * (flo + 4.0 * fmid + fhi) / 6.0
        stack = [(lo, hi, flo, fmid, fhi, whole, tol * (hi - lo) / length, 0)]
        while stack:
            l, r, fl, fm, fr, s, eps, depth = stack.pop()
            m = 0.5 * (l + r)
            lm, rm = 0.5 * (l + m), 0.5 * (m + r)
            flm, frm = f(lm), f(rm)
            left = (m - l) * (fl + 4.0 * flm + fm) / 6.0
            right = (r - m) * (fm + 4.0 * frm + fr) / 6.0
            diff = left + right - s
            if abs(diff) <= 15.0 * eps or depth >= max_depth:
                if depth >= max_depth and abs(diff) > 15.0 * eps:
                    capped = True
                pieces.append(left + right + diff / 15.0)
                errors.append(abs(diff) / 15.0)
            else:
                stack.append((m, r, fm, frm, fr, right, 0.5 * eps, depth + 1))
                stack.append((l, m, fl, flm, fm, left, 0.5 * eps, depth + 1))
    value = math.fsum(pieces)
    err = math.fsum(errors)
    if capped:
        warnings.warn(
            f"quadrature depth cap {max_depth} reached on [{a}, {b}]; achieved error ~{err:.3g} (tol {tol:.3g})",
            QuadratureWarning,
            stacklevel=2,
        )
    return (value, err) if full_output else value


def radial_quadrature(g: Callable[[float], float], n: int, tol: float = 1e-10, *, points: Sequence[float] = ()):
    """``E[g(r)]`` for ``r ~ chi(n)``, integrated on ``[0, sqrt(n) + 12]``."""
    upper = math.sqrt(n) + 12.0
    return quadrature_1d(lambda r: g(r) * chi_pdf(r, n), 0.0, upper, tol, points=points)
