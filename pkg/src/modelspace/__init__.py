"""Model-space priors and posterior exploration for Bayesian variable selection.

Modules
-------
priors         closed-form size/model priors and the children-set ratio
stepwise       forward-stepwise prior calculus (paths, stopping schedules)
bayes_factor   Zellner-Siow Bayes factors with rank-deficient design handling
simulate       synthetic regression data generation with SNR calibration
sampler        Metropolis-Hastings over the subset lattice
cli            command-line front end (prior tables, experiments, sweeps)
"""

from .priors import (
    CMG,
    BetaBinomial,
    MatryoshkaDoll,
    Model,
    PathHolm,
    PowerSeries,
    PriorFamily,
    ScaledBetaBinomial,
    SubsetHolm,
    children_ratio,
    from_descriptor,
    log_model_prior,
    log_size_prior,
    normal_even_moment,
    size_log_pmf,
)
from .stepwise import (
    Path,
    ScheduleInversionError,
    StoppingSchedule,
    induced_size_log_pmf,
    model_log_prob_bruteforce,
    model_log_prob_closed,
    path_log_prob,
    sample_model,
    stopping_schedule,
)
from .bayes_factor import (
    Dataset,
    DegenerateDataError,
    FitStats,
    fit_stats,
    log_bf_mc_oracle,
    log_bf_zellner_siow,
)
from .simulate import generate_dataset, load_dataset, save_dataset, snr_to_r2
from .sampler import (
    KERNELS,
    ChainConfig,
    ChainState,
    FitCache,
    PosteriorMetrics,
    PosteriorSummary,
    make_chain_state,
    mh_step,
    propose,
    run_chain,
    summarize,
)

__version__ = "0.1.0"

__all__ = [
    "CMG",
    "KERNELS",
    "BetaBinomial",
    "ChainConfig",
    "ChainState",
    "Dataset",
    "DegenerateDataError",
    "FitCache",
    "FitStats",
    "MatryoshkaDoll",
    "Model",
    "Path",
    "PathHolm",
    "PosteriorMetrics",
    "PosteriorSummary",
    "PowerSeries",
    "PriorFamily",
    "ScaledBetaBinomial",
    "ScheduleInversionError",
    "StoppingSchedule",
    "SubsetHolm",
    "children_ratio",
    "fit_stats",
    "from_descriptor",
    "generate_dataset",
    "induced_size_log_pmf",
    "load_dataset",
    "log_bf_mc_oracle",
    "log_bf_zellner_siow",
    "log_model_prior",
    "log_size_prior",
    "make_chain_state",
    "mh_step",
    "model_log_prob_bruteforce",
    "model_log_prob_closed",
    "normal_even_moment",
    "path_log_prob",
    "propose",
    "run_chain",
    "sample_model",
    "save_dataset",
    "size_log_pmf",
    "snr_to_r2",
    "stopping_schedule",
    "summarize",
]
