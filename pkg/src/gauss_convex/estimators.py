"""scikit-learn style wrappers around the functional API.

``fit`` takes a :class:`~gauss_convex.bodies.ConvexBody` rather than a data
matrix, because the "data" here is an oracle, not a sample.  ``transform``
takes ordinary arrays: directions for :class:`InfluenceEstimator` and
points for :class:`FriedgutAveraging`.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .bodies import ConvexBody
from .influence import bottom_direction, second_moment_matrix, total_influence
from .sampling import SamplingPlan
from .verify import constants as C
from .verify.friedgut import friedgut_average


def _check_body(body) -> ConvexBody:
    if not isinstance(body, ConvexBody):
        raise TypeError(f"fit expects a ConvexBody, got {type(body).__name__}")
    return body


class InfluenceEstimator(TransformerMixin, BaseEstimator):
    """Estimate a body's second-moment matrix once, then score any direction.

    Parameters
    ----------
    sigma : float
        Gaussian scale.
    seed : int
        Seed for the sampling plan.
    samples : int
        Monte Carlo sample count.
    workers : int
        Worker threads; results do not depend on it.

    Attributes
    ----------
    second_moment_ : SecondMomentMatrix
    total_influence_ : Estimate
    max_direction_ : ndarray of shape (n,)
    max_influence_ : Estimate
    n_features_in_ : int
    """

    def __init__(self, sigma=1.0, seed=0, samples=1 << 20, workers=1):
        self.sigma = sigma
        self.seed = seed
        self.samples = samples
        self.workers = workers

    def fit(self, body, y=None):
        body = _check_body(body)
        plan = SamplingPlan(self.seed, self.samples, self.workers)
        self.second_moment_ = second_moment_matrix(body, self.sigma, plan)
        self.total_influence_ = total_influence(body, self.sigma, plan)
        self.max_direction_ = bottom_direction(self.second_moment_)
        self.max_influence_ = self.second_moment_.influence(self.max_direction_)
        self.n_features_in_ = body.n
        return self

    def transform(self, directions):
        """Influence of each row of ``directions`` (rows are normalised first)."""
        check_is_fitted(self, "second_moment_")
        V = check_array(directions, ensure_2d=True)
        if V.shape[1] != self.n_features_in_:
            raise ValueError(f"directions have {V.shape[1]} columns, body dimension is {self.n_features_in_}")
        norms = np.linalg.norm(V, axis=1)
        if np.any(norms == 0):
            raise ValueError("zero direction")
        V = V / norms[:, None]
        return np.array([self.second_moment_.influence(v).value for v in V])


class FriedgutAveraging(TransformerMixin, BaseEstimator):
    """Pick orthonormal directions until averaging over them leaves variance ``<= eps``.

    After ``fit``, ``transform`` returns the coordinates of points along the
    chosen directions, like a projection onto principal components.

    Attributes
    ----------
    trace_ : AveragingTrace
    components_ : ndarray of shape (k, n)
    n_components_ : int
    """

    def __init__(self, eps=0.01, seed=0, outer=C.FRIEDGUT_OUTER, inner=C.FRIEDGUT_INNER, step_cap=None):
        self.eps = eps
        self.seed = seed
        self.outer = outer
        self.inner = inner
        self.step_cap = step_cap

    def fit(self, body, y=None):
        body = _check_body(body)
        plan = SamplingPlan(self.seed, self.outer)
        self.trace_ = friedgut_average(body, self.eps, plan, step_cap=self.step_cap, inner=self.inner)
        self.components_ = self.trace_.directions.reshape(-1, body.n)
        self.n_components_ = self.components_.shape[0]
        self.n_features_in_ = body.n
        return self

    def transform(self, X):
        check_is_fitted(self, "components_")
        X = check_array(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"X has {X.shape[1]} columns, body dimension is {self.n_features_in_}")
        return X @ self.components_.T
