"""Nonparametric two-sample tests built around the Wasserstein distance.

One-dimensional CDF, quantile and ODC statistics, exact and entropic
optimal transport, energy distance and kernel MMD, with permutation and
Brownian-bridge calibration.
"""

from .calibration import (
    NullKind,
    NullModel,
    QuantileTable,
    TestReport,
    asymptotic_pvalue,
    distribution_free_check,
    permutation_pvalue,
    simulate_bridge_functional,
)
from .empirical import (
    EmpiricalDistribution,
    Sample,
    StepFunction,
    auc,
    build_empirical,
    cdf,
    odc_curve,
    quantile,
    roc_curve,
)
from .multivariate import (
    KernelSpec,
    energy_distance,
    generalized_energy_distance,
    kernel_to_distance,
    mmd2,
    smoothed_wasserstein_statistic,
)
from .registry import Statistic, get_statistic
from .transport import (
    CostMatrix,
    SinkhornSolution,
    TransportPlan,
    cost_matrix,
    exact_wasserstein_lp,
    sinkhorn,
    sinkhorn_divergence,
)
from .univariate import (
    StatKind,
    UnivariateStatistic,
    ks_statistic,
    odc_linf_statistic,
    odc_w2_statistic,
    pp_l2_statistic,
    qq_l2_statistic,
    qq_linf_statistic,
    wasserstein_1d,
    wasserstein_inf_1d,
)

__version__ = "0.1.0"

__all__ = [
    "CostMatrix",
    "EmpiricalDistribution",
    "KernelSpec",
    "NullKind",
    "NullModel",
    "QuantileTable",
    "Sample",
    "SinkhornSolution",
    "StatKind",
    "Statistic",
    "StepFunction",
    "TestReport",
    "TransportPlan",
    "UnivariateStatistic",
    "asymptotic_pvalue",
    "auc",
    "build_empirical",
    "cdf",
    "cost_matrix",
    "distribution_free_check",
    "energy_distance",
    "exact_wasserstein_lp",
    "generalized_energy_distance",
    "get_statistic",
    "kernel_to_distance",
    "ks_statistic",
    "mmd2",
    "odc_curve",
    "odc_linf_statistic",
    "odc_w2_statistic",
    "permutation_pvalue",
    "pp_l2_statistic",
    "qq_l2_statistic",
    "qq_linf_statistic",
    "quantile",
    "roc_curve",
    "simulate_bridge_functional",
    "sinkhorn",
    "sinkhorn_divergence",
    "smoothed_wasserstein_statistic",
    "wasserstein_1d",
    "wasserstein_inf_1d",
]
