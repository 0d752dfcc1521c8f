"""Tail-index regression and imputation for top-coded outcomes.

Estimate how the Pareto tail of an outcome varies with covariates when
large values are recorded at a cap, translate coefficients into
effects on extreme-event probabilities, impute the capped values, and
validate everything by simulation.
"""
from .distributions import (
    BurrLaw,
    ParetoLaw,
    burr_cdf,
    burr_pdf,
    burr_quantile,
    burr_sample,
    pareto_quantile,
    pareto_sample,
    pareto_survival,
)
from .estimators import (
    CensoredSample,
    apply_top_code,
    censored_hill_estimate,
    censored_pareto_loglik,
    hill_estimate,
)
from .regression import (
    DesignMatrix,
    FitOptions,
    TailRegressionFit,
    covariance_and_tests,
    fit_censored,
    fit_uncensored,
    neg_loglik_censored,
    neg_loglik_gradient,
    neg_loglik_hessian,
    score_residuals,
    select_threshold,
    tail_members,
)
from .effects import (
    PartialEffect,
    average_tail_index,
    effects_table,
    partial_effect_continuous,
    partial_effect_discrete,
    unconditional_quantile_order,
)
from .impute import (
    FactorRow,
    ImputationResult,
    adjustment_factor_series,
    impute_topcoded,
    mean_above,
    tau1,
    tau2,
    tau3,
    tau4,
)
from .simulate import (
    CASES,
    EstimatorStats,
    ImputationStudy,
    McCase,
    McReport,
    run_case,
    run_imputation_experiment,
    run_table,
    standard_case,
    summarize,
)
from .dataio import DatasetSpec, PeriodData, load_dataset

__version__ = "0.1.0"
