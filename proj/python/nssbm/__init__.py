"""Non-stationary stochastic block model.

Joint clustering of network nodes and time bins by exact maximization of the
integrated classification likelihood, with a Poisson emission model collapsed
under conjugate Gamma/Dirichlet priors.
"""

from ._core import (
    BlockStats,
    EmptyClusterError,
    FitResult,
    Hyperparameters,
    IclValue,
    InteractionTensor,
    Mode,
    SearchConfig,
    __version__,
    additive_rates,
    adjusted_rand_index,
    aggregate_contact_log,
    build_tensor,
    compute_block_stats,
    greedy_fit,
    icl,
    log_emission,
    log_label_prior,
    parse_contact_log,
    posterior_rates,
    sample_partition,
    simulate,
    simulate_tensor,
)

__all__ = [
    "BlockStats",
    "EmptyClusterError",
    "FitResult",
    "Hyperparameters",
    "IclValue",
    "InteractionTensor",
    "Mode",
    "SearchConfig",
    "__version__",
    "additive_rates",
    "adjusted_rand_index",
    "aggregate_contact_log",
    "build_tensor",
    "compute_block_stats",
    "greedy_fit",
    "icl",
    "log_emission",
    "log_label_prior",
    "parse_contact_log",
    "posterior_rates",
    "sample_partition",
    "simulate",
    "simulate_tensor",
]
