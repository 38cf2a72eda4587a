"""Network tomography for first-order diffusion dynamics.

Simulate w_i = A w_{i-1} + z_i over a random graph, estimate the probed
block of A from lag-0/lag-1 correlations, and decide which probed agents
interact. See the README for the pipeline and the file formats.
"""

__version__ = "0.1.0"

from .combination import (ClassReport, CombinationMatrix, SupportError,
                          build_laplacian, build_metropolis, check_class,
                          doubly_stochastic_metropolis, read_coordinate,
                          read_matrix, write_coordinate, write_matrix)
from .dynamics import (BeliefError, CorrelationError, CorrelationPair,
                       DivergenceError, SourceSpec, TrajectoryStats,
                       analytic_correlations, analytic_submatrices,
                       bayes_update, correlations_from_samples, default_burn_in,
                       detection_kl, detection_llr, detection_step,
                       empirical_correlations, simulate, social_learning_step)
from .estimators import (EstimatedSubmatrix, IllConditionedError, SeriesOracle,
                         error_oracle_granger, error_oracle_series, granger,
                         one_lag, read_estimate, residual, write_estimate)
from .experiment import (ConfigError, ExperimentConfig, TrialResult,
                         read_results, run_experiment, summarize, trial_seed,
                         write_results, write_summary)
from .graphs import (DegreeStats, Graph, ObservationSet, RegimeSpec,
                     degree_stats, gen_er, gen_partial_er, read_edge_list,
                     regime_probability, write_edge_list)
from .inference import (AdjacencyEstimate, ClusterSummary, CoverageError,
                        DegenerateEntriesError, ErrorRates, MarginReport,
                        PatchResult, TheoryPrediction, classify_threshold,
                        cluster_classify, error_rates, estimate_from_pair,
                        margins, patch_reconstruct, read_decisions,
                        theory_bias_gap, write_decisions)
from .tomography import NetworkTomography

__all__ = [
    "__version__",
    # graphs
    "Graph", "RegimeSpec", "ObservationSet", "DegreeStats", "gen_er",
    "gen_partial_er", "regime_probability", "degree_stats",
    "write_edge_list", "read_edge_list",
    # combination matrices
    "CombinationMatrix", "ClassReport", "SupportError", "build_metropolis",
    "build_laplacian", "doubly_stochastic_metropolis", "check_class",
    "write_matrix", "read_matrix", "write_coordinate", "read_coordinate",
    # dynamics
    "CorrelationPair", "TrajectoryStats", "SourceSpec", "DivergenceError",
    "CorrelationError", "BeliefError", "analytic_correlations",
    "analytic_submatrices", "default_burn_in", "simulate",
    "empirical_correlations", "correlations_from_samples", "detection_llr",
    "detection_kl", "detection_step", "bayes_update", "social_learning_step",
    # estimators
    "EstimatedSubmatrix", "SeriesOracle", "IllConditionedError", "granger",
    "one_lag", "residual", "error_oracle_granger", "error_oracle_series",
    "write_estimate", "read_estimate",
    # inference
    "AdjacencyEstimate", "ErrorRates", "MarginReport", "ClusterSummary",
    "TheoryPrediction", "PatchResult", "DegenerateEntriesError",
    "CoverageError", "classify_threshold", "error_rates", "margins",
    "cluster_classify", "theory_bias_gap", "estimate_from_pair",
    "patch_reconstruct", "write_decisions", "read_decisions",
    # experiments
    "ExperimentConfig", "TrialResult", "ConfigError", "trial_seed",
    "run_experiment", "write_results", "read_results", "summarize",
    "write_summary",
    # estimator front end
    "NetworkTomography",
]
