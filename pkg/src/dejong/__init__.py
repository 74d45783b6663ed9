"""Exact Hoeffding decompositions, exchangeable-pair identities and normal-approximation bounds
for degenerate U-statistics of independent discrete random variables."""

from .bounds import (
    MultivariateBoundReport,
    Smoothness,
    UnivariateBoundReport,
    min_eigenvalue_sym,
    multivariate_A,
    multivariate_bound,
    plugin_multivariate,
    plugin_univariate,
    univariate_bound,
)
from .errors import (
    BudgetError,
    CapabilityError,
    ContractError,
    DeJongError,
    ModelError,
    NormalizationError,
    PositiveDefinitenessError,
)
from .generators import homogeneous_sum, symmetric_ustat, weighted_ustat
from .hoeffding import (
    DegenerateUStatistic,
    HoeffdingDecomposition,
    VectorModel,
    check_degenerate,
    decompose,
    normalize,
    rho_squared,
)
from .mc import (
    bound_validation,
    normal_cdf,
    normal_pdf,
    normal_quantile,
    sample,
    wasserstein1_to_normal,
)
from .moments import classify_quadruple, cross_moments, fourth_moment, s0, tau
from .pair import (
    PairQuantities,
    fourth_increment,
    pair_quantities,
    regression_check,
    squared_increment_decomposition,
)
from .product import hoeffding_product, product_oracle
from .shadows import ShadowClass, compute_Cd, enumerate_mixed_shadow_classes, enumerate_shadow_classes
from .space import (
    Coordinate,
    FiniteProductSpace,
    SubsetKernel,
    conditional_expectation,
    expectation,
    joint_moment,
)

__version__ = "0.1.0"

__all__ = [
    "BudgetError",
    "CapabilityError",
    "ContractError",
    "Coordinate",
    "DeJongError",
    "DegenerateUStatistic",
    "FiniteProductSpace",
    "HoeffdingDecomposition",
    "ModelError",
    "MultivariateBoundReport",
    "NormalizationError",
    "PairQuantities",
    "PositiveDefinitenessError",
    "ShadowClass",
    "Smoothness",
    "SubsetKernel",
    "UnivariateBoundReport",
    "VectorModel",
    "bound_validation",
    "check_degenerate",
    "classify_quadruple",
    "compute_Cd",
    "conditional_expectation",
    "cross_moments",
    "decompose",
    "enumerate_mixed_shadow_classes",
    "enumerate_shadow_classes",
    "expectation",
    "fourth_increment",
    "fourth_moment",
    "hoeffding_product",
    "homogeneous_sum",
    "joint_moment",
    "min_eigenvalue_sym",
    "multivariate_A",
    "multivariate_bound",
    "normal_cdf",
    "normal_pdf",
    "normal_quantile",
    "normalize",
    "pair_quantities",
    "plugin_multivariate",
    "plugin_univariate",
    "product_oracle",
    "regression_check",
    "rho_squared",
    "s0",
    "sample",
    "squared_increment_decomposition",
    "symmetric_ustat",
    "tau",
    "univariate_bound",
    "wasserstein1_to_normal",
    "weighted_ustat",
]
