"""Statistical verification of convex-influence identities and inequalities."""
from .checks import (
    FAIL,
    INCONCLUSIVE,
    PASS,
    CheckResult,
    check_dilation_form,
    check_isoperimetric_estimate,
    check_kkl_chain,
    check_kruskal_katona,
    check_margulis_russo,
    check_nonnegativity,
    check_poincare,
    check_rotation_invariance,
    check_s_inequality_spot,
    check_slab_lower_bound,
    compare,
)
from .friedgut import AveragingStep, AveragingTrace, friedgut_average, residual_variance
from .suite import CHECK_NAMES, builtin_suite, run_suite
from .threshold import ThresholdCurve, check_sharp_threshold, parse_grid, threshold_curve, transition_grid

__all__ = [
    "FAIL", "INCONCLUSIVE", "PASS", "CheckResult", "compare",
    "check_dilation_form", "check_isoperimetric_estimate", "check_kkl_chain", "check_kruskal_katona",
    "check_margulis_russo", "check_nonnegativity", "check_poincare", "check_rotation_invariance",
    "check_s_inequality_spot", "check_slab_lower_bound",
    "AveragingStep", "AveragingTrace", "friedgut_average", "residual_variance",
    "CHECK_NAMES", "builtin_suite", "run_suite",
    "ThresholdCurve", "check_sharp_threshold", "parse_grid", "threshold_curve", "transition_grid",
]
