"""Bayesian structure learning for Gaussian graphical models with
multiplicative graph priors and a tempered sequential Monte Carlo sampler."""

__version__ = "0.1.0"

from .graphs import (
    Decomposition,
    Graph,
    betweenness,
    degree_sequence,
    flip_edge,
    new_graph,
    prime_components,
)
from .random_graphs import (
    BetaHyper,
    analytic_degree_moments,
    clustering_coefficient,
    degree_pmf,
    dispersion_index,
    factorial_moment,
    match_hyperparameters,
    neighbour_mean_degree,
    sample_barabasi_albert,
    sample_community,
    sample_connectivities,
    sample_erdos_renyi,
    sample_multiplicative,
    skewness_index,
)
from .gwishart import (
    ConstantEstimate,
    GroupData,
    GWishartParams,
    log_constant,
    log_constant_complete,
    log_constant_laplace,
    log_constant_mc,
    log_marginal_likelihood,
    sample_gwishart,
)
from .priors import (
    BernoulliPrior,
    GraphPrior,
    JointMultiplicativePrior,
    LaplaceReport,
    MultiplicativePrior,
    SizeBasedPrior,
    UniformPrior,
    exact_log_prior_small_p,
    laplace_log_prior_joint,
    laplace_log_prior_k1,
    log_prior,
    sample_beta_given_graphs,
    sample_pi_given_graph,
    two_group_covariates,
)
from .smc import (
    Particle,
    ParticleEnsemble,
    PosteriorTarget,
    SmcConfig,
    SmcDiagnostics,
    ess,
    init_particles,
    linear_schedule,
    log_target,
    mcmc_sweep,
    resample_multinomial,
    reweight,
    run_mcmc_baseline,
    run_smc,
    run_smc_adaptive,
)
from .analysis import (
    Dataset,
    DifferentialEdge,
    PosteriorSummary,
    Replicate,
    SummaryOptions,
    auc,
    differential_network,
    edge_probabilities,
    make_precision,
    simulate_study,
    summarize,
)

__all__ = [
    "Graph",
    "Decomposition",
    "new_graph",
    "flip_edge",
    "degree_sequence",
    "betweenness",
    "prime_components",
    "BetaHyper",
    "sample_connectivities",
    "sample_multiplicative",
    "sample_erdos_renyi",
    "sample_barabasi_albert",
    "sample_community",
    "analytic_degree_moments",
    "degree_pmf",
    "factorial_moment",
    "dispersion_index",
    "skewness_index",
    "neighbour_mean_degree",
    "clustering_coefficient",
    "match_hyperparameters",
    "GWishartParams",
    "GroupData",
    "ConstantEstimate",
    "log_constant",
    "log_constant_complete",
    "log_constant_mc",
    "log_constant_laplace",
    "log_marginal_likelihood",
    "sample_gwishart",
    "UniformPrior",
    "BernoulliPrior",
    "SizeBasedPrior",
    "MultiplicativePrior",
    "JointMultiplicativePrior",
    "GraphPrior",
    "LaplaceReport",
    "two_group_covariates",
    "log_prior",
    "exact_log_prior_small_p",
    "laplace_log_prior_k1",
    "laplace_log_prior_joint",
    "sample_pi_given_graph",
    "sample_beta_given_graphs",
    "SmcConfig",
    "Particle",
    "ParticleEnsemble",
    "SmcDiagnostics",
    "PosteriorTarget",
    "linear_schedule",
    "log_target",
    "ess",
    "init_particles",
    "reweight",
    "resample_multinomial",
    "mcmc_sweep",
    "run_smc",
    "run_mcmc_baseline",
    "run_smc_adaptive",
    "Dataset",
    "Replicate",
    "DifferentialEdge",
    "PosteriorSummary",
    "SummaryOptions",
    "make_precision",
    "simulate_study",
    "edge_probabilities",
    "differential_network",
    "auc",
    "summarize",
    "__version__",
]
