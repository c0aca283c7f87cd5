"""1D scattered-data approximation with a discontinuity-adaptive
partition-of-unity blend of local moving least squares fits."""

from .estimator import AdaptiveMLSRegressor
from .kernels import WeightKernel, kernel_from_name
from .mls import (LocalPolynomial, NodeSet, RankDeficientError, Samples,
                  determinant_coefficients_oracle, fill_distance,
                  mls_coefficients, unweighted_ls_fit, weighted_mls_fit)
from .partition import (Cover, CoverageGapError, EvalBreakdown, PUConfig,
                        Subdomain, TooFewMembersError, UncoveredPointError,
                        build_cover, convergence_guard, weno_weights)

__version__ = "0.1.0"

__all__ = [
    "AdaptiveMLSRegressor",
    "WeightKernel",
    "kernel_from_name",
    "NodeSet",
    "Samples",
    "LocalPolynomial",
    "fill_distance",
    "mls_coefficients",
    "determinant_coefficients_oracle",
    "weighted_mls_fit",
    "unweighted_ls_fit",
    "RankDeficientError",
    "PUConfig",
    "Subdomain",
    "EvalBreakdown",
    "Cover",
    "build_cover",
    "weno_weights",
    "convergence_guard",
    "CoverageGapError",
    "TooFewMembersError",
    "UncoveredPointError",
    "__version__",
]
