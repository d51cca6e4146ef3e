"""Finite-mixture centred skew-probit IRT models for dichotomous responses."""

from .csn import (
    GAMMA_MAX,
    DirectParams,
    Skewness,
    cdf,
    owen_t,
    pdf,
    sample,
    shape_g,
    to_direct,
)
from .model import (
    Abilities,
    AuxIndicators,
    ItemState,
    PriorConfig,
    ResponseMatrix,
    icc,
    log_prior,
    loglik,
    mixture_icc,
    predictor,
)
from .sampler import (
    ChainState,
    DrawStore,
    NumericalError,
    TuningConfig,
    run_chain,
    run_chains,
)
from .synth import Scenario, generate, preset
from .summary import (
    ChainDiagnostics,
    FitSummary,
    ItemSummary,
    RecoveryReport,
    diagnostics,
    recovery_report,
    summarize,
    summarize_items,
)

__version__ = "0.1.0"
