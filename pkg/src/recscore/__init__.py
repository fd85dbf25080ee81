"""Robust inference for high-dimensional linear models.

Penalized M-estimation with bounded-influence losses, recursive marginal
screening, and decorrelated-score confidence intervals, plus a Monte Carlo
harness and a CLI. Heavy kernels run in a compiled extension when available;
BACKEND names the implementation in use ("cython" or "python"), selectable
via the RECSCORE_BACKEND environment variable (auto, cython, python).
"""

from ._backend import BACKEND
from .core import (
    Dataset,
    SeedSpec,
    SolverConfig,
    StandardizeRecord,
    SupportSet,
    derive_seed,
    rng_from_spec,
    standardize,
    validate_dataset,
)
from .losses import (
    FAMILIES,
    HUBER,
    PSEUDO_HUBER,
    SQUARED,
    TUKEY,
    LossAuditReport,
    LossSpec,
    assumption_audit,
    loss_d1,
    loss_d2,
    loss_d3,
    loss_value,
)
from .solver import (
    SolveResult,
    composite_gd,
    default_step_size,
    empirical_risk,
    empirical_risk_grad,
    project_l2,
    soft_threshold,
    stationarity_gap,
)
from .screening import (
    SIRS,
    SIS,
    ScreenerConfig,
    default_keep,
    screening_schedule,
    select_support,
    sirs_stats,
    sis_stats,
    stats_schedule,
    supports_from_stats,
)
from .inference import (
    InferenceConfig,
    InferenceResult,
    TargetInference,
    bonferroni_infer,
    cv_lambda,
    default_lambda_grid,
    default_split,
    empirical_hessian_sub,
    initial_estimator,
    normal_quantile,
    omega_hat,
    recursive_score_fit,
    sigma_hat_sq,
)
from .simgen import (
    CONTAMINATED,
    LOGNORMAL_SIGN,
    EcpAlRow,
    ErrorModel,
    RepRecord,
    SimDesign,
    gen_ar1_covariates,
    gen_errors,
    run_replications,
)
from . import errors

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "__version__",
    "errors",
    # core
    "Dataset", "SupportSet", "SolverConfig", "SeedSpec", "StandardizeRecord",
    "validate_dataset", "standardize", "derive_seed", "rng_from_spec",
    # losses
    "LossSpec", "LossAuditReport", "loss_value", "loss_d1", "loss_d2", "loss_d3",
    "assumption_audit", "TUKEY", "PSEUDO_HUBER", "HUBER", "SQUARED", "FAMILIES",
    # solver
    "SolveResult", "composite_gd", "empirical_risk", "empirical_risk_grad",
    "soft_threshold", "project_l2", "stationarity_gap", "default_step_size",
    # screening
    "ScreenerConfig", "sirs_stats", "sis_stats", "select_support",
    "stats_schedule", "screening_schedule", "supports_from_stats",
    "default_keep", "SIRS", "SIS",
    # inference
    "InferenceConfig", "InferenceResult", "TargetInference", "recursive_score_fit",
    "bonferroni_infer", "initial_estimator", "cv_lambda", "default_lambda_grid",
    "default_split", "empirical_hessian_sub", "omega_hat", "sigma_hat_sq",
    "normal_quantile",
    # simulation harness
    "SimDesign", "ErrorModel", "EcpAlRow", "RepRecord", "gen_ar1_covariates",
    "gen_errors", "run_replications", "CONTAMINATED", "LOGNORMAL_SIGN",
]
