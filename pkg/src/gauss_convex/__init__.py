"""Convex influences of symmetric convex bodies in Gaussian space."""
__version__ = "0.1.0"

from .bodies import (
    ConvexBody,
    coordinate_slab,
    fiber_interval,
    in_radius,
    intersect,
    linear_image,
    make_ball,
    make_cube,
    make_ellipsoid,
    make_oracle_body,
    make_slab,
    random_orthogonal,
    rotate,
    rotation_matrix,
)
from .bodyspec import BodySpecError, load_body_spec, parse_body_spec
from .hermite import HermiteParams, MultiIndex, biased_hermite_eval, directional_coefficient, hermite_coefficient, hermite_eval, multi_hermite_eval
from .influence import (
    SecondMomentMatrix,
    ShellDensity,
    analytic_cube_influence,
    density_increment,
    fiber_variance_influence,
    geometric_influence,
    influence_along,
    max_influence_direction,
    second_moment_matrix,
    shell_density,
    total_influence,
)
from .sampling import Estimate, SamplingPlan, mc_expectation, quadrature_1d, radial_quadrature

__all__ = [
    "__version__",
    "ConvexBody", "coordinate_slab", "fiber_interval", "in_radius", "intersect", "linear_image", "make_ball",
    "make_cube", "make_ellipsoid", "make_oracle_body", "make_slab", "random_orthogonal", "rotate", "rotation_matrix",
    "BodySpecError", "load_body_spec", "parse_body_spec",
    "HermiteParams", "MultiIndex", "biased_hermite_eval", "directional_coefficient", "hermite_coefficient",
    "hermite_eval", "multi_hermite_eval",
    "SecondMomentMatrix", "ShellDensity", "analytic_cube_influence", "density_increment",
    "fiber_variance_influence", "geometric_influence", "influence_along", "max_influence_direction",
    "second_moment_matrix", "shell_density", "total_influence",
    "Estimate", "SamplingPlan", "mc_expectation", "quadrature_1d", "radial_quadrature",
]
