"""Desk-scale laboratory for the all-or-nothing transition in sparse linear regression."""

from aonlab.combinatorics import (
    OverlapLaw,
    SupportEnumerator,
    colex_rank,
    colex_unrank,
    enumerate_supports,
    hyp_log_pmf,
    hyp_pmf_upper_bound,
    overlap,
    overlap_law,
)
from aonlab.detection import (
    RiskReport,
    Rule,
    TestOutcome,
    decide,
    detection_risk_mc,
    detection_sample_condition,
    linear_stat,
    residual_ratio_stat,
    residual_threshold,
)
from aonlab.divergence import (
    BoundCheck,
    ConditioningParams,
    DivergenceReport,
    check_large_overlap_moment,
    chi2_blowup_lower_bound,
    chi2_exact,
    conditioning_prob_bound,
    event_holds,
    kl_tail_bound,
    log_likelihood_ratio,
    make_theorem_params,
    mc_divergences,
    pinsker_chain,
    truncated_moment,
)
from aonlab.errors import (
    BudgetExceeded,
    LambdaTooSmall,
    PreconditionError,
    RejectionBudgetExhausted,
    ZeroObservation,
)
from aonlab.estimators import (
    PosteriorTable,
    RecoveryResult,
    bayes_mean,
    mle,
    mle_tail_bound,
    mmse_mc,
    mse_lower_bound,
    pairwise_error_bound,
    posterior,
    recover,
)
from aonlab.model import (
    Instance,
    ModelParams,
    Origin,
    Seed,
    SupportVector,
    critical_sample_size,
    sample_conditioned_planted,
    sample_null,
    sample_planted,
)
from aonlab.sweep import SweepConfig, SweepResult, Task, emit, run_sweep

__version__ = "0.1.0"
