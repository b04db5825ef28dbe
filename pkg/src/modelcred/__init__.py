"""Model credibility index estimation via resampling power curves.

The credibility index N* of a model for a dataset is the sample size at
which a chosen size-alpha goodness-of-fit test attains power 0.5 against
the data-generating mechanism.  This package estimates N* by subsampling
or bootstrap power curves, provides closed-form asymptotic approximations
for multinomial models, and quantifies the reliability of the estimate
through U-statistic variance theory (the equivalent independent sample
size, EISS).
"""
from .distributions import (
    ChiSquare,
    DistributionFamily,
    Logistic,
    Normal,
    NoncentralChiSquare,
    SeedSpec,
    cdf,
    overlap_pmf,
    quantile,
    sample,
    survival,
)
from .goftests import (
    ESTIMATED_NORMAL,
    KS_ONE_SAMPLE,
    KS_TWO_SAMPLE,
    MULTINOMIAL_LRT,
    PEARSON_CHISQ_NORMAL,
    SHAPIRO_WILK,
    SampleError,
    TestResult,
    TestSpec,
    default_cells,
    ks_one_sample,
    ks_two_sample,
    lilliefors_critical,
    pearson_chisq_normal,
    run_test,
    shapiro_wilk,
)
from .resampling import (
    BOOTSTRAP,
    SUBSAMPLE,
    PowerCurve,
    PowerEstimationError,
    PowerPoint,
    draw_bootstrap,
    draw_subsample,
    estimate_power,
    power_curve,
)
from .search import (
    CredibilityEstimate,
    SearchBudgetError,
    SearchConfig,
    find_nstar,
    nstar_beta,
    reliability,
)
from .categorical import (
    ContingencyTable,
    MultinomialFit,
    bootstrap_ci_nstar_asy,
    estimate_power_categorical,
    find_nstar_categorical,
    fit_independence,
    lrt_test,
    multinomial_resample,
    nstar_asy,
    nstar_asy2,
    solve_delta_star,
    subsample_individuals,
)
from .ustat import (
    EstimatorDistribution,
    LocalAltSpec,
    MonteCarloValue,
    VarianceReport,
    eiss_local,
    local_alt_A,
    simulate_estimator_distribution,
    ucomp_small_oracle,
    ucomp_variance_exact,
    variance_bound,
)
from .estimators import CredibilityIndex, TableCredibilityIndex

__version__ = "0.1.0"

__all__ = [
    "Normal", "Logistic", "ChiSquare", "NoncentralChiSquare",
    "DistributionFamily", "SeedSpec",
    "cdf", "quantile", "sample", "survival", "overlap_pmf",
    "KS_ONE_SAMPLE", "KS_TWO_SAMPLE", "SHAPIRO_WILK",
    "PEARSON_CHISQ_NORMAL", "MULTINOMIAL_LRT", "ESTIMATED_NORMAL",
    "TestSpec", "TestResult", "SampleError",
    "ks_one_sample", "ks_two_sample", "shapiro_wilk",
    "pearson_chisq_normal", "run_test", "default_cells",
    "lilliefors_critical",
    "SUBSAMPLE", "BOOTSTRAP", "PowerPoint", "PowerCurve",
    "PowerEstimationError",
    "draw_subsample", "draw_bootstrap", "estimate_power", "power_curve",
    "SearchConfig", "CredibilityEstimate", "SearchBudgetError",
    "find_nstar", "nstar_beta", "reliability",
    "ContingencyTable", "MultinomialFit",
    "fit_independence", "lrt_test", "solve_delta_star",
    "nstar_asy", "nstar_asy2", "multinomial_resample",
    "subsample_individuals", "estimate_power_categorical",
    "find_nstar_categorical", "bootstrap_ci_nstar_asy",
    "LocalAltSpec", "VarianceReport", "MonteCarloValue",
    "EstimatorDistribution",
    "ucomp_variance_exact", "ucomp_small_oracle", "variance_bound",
    "local_alt_A", "eiss_local", "simulate_estimator_distribution",
    "CredibilityIndex", "TableCredibilityIndex",
    "__version__",
]
