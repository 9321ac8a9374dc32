"""Joint inference of multiple graph topologies from stationary signals,
tied together by a shared generative model (a common probability matrix or a
discretized graphon), via a nonconvex ADMM."""

from .graphons import (DEFAULT_EPS, GraphonSpec, build_block_averager,
                       default_block_size, eval_graphon, grid_graphon,
                       histogram_estimate, latent_to_grid, sample_graph,
                       sample_latent)
from .operators import (OperatorBundle, TriIndexMap, assemble_bundle,
                        build_commutator_op, build_difference_matrices,
                        build_graphon_selector, build_histogram_op,
                        build_mean_op, build_tps_op, graphon_unvec,
                        graphon_vec, tri_pair_count, tri_pairs, tri_unvec,
                        tri_vec)
from .prox import (bernoulli_nll, bernoulli_nll_grad_s, bernoulli_nll_grad_t,
                   gamma_logit, likelihood_prox, scalar_likelihood_prox,
                   shared_probability_prox)
from .signals import (FilterSpec, generate_stationary_signals,
                      pairwise_similarity_penalty, polynomial_filter,
                      random_filter, sample_covariance, sparsity_penalty,
                      stationarity_penalty)
from .solver import (MODE_BASE, MODE_ROBUST, MODE_SHARED_GRAPHON,
                     MODE_SHARED_PROB, MODES, STATUS_CONVERGED,
                     STATUS_MAX_ITERATIONS, AdmmState, HyperParams,
                     IterationDiagnostics, SolveResult, SolverConfig,
                     baseline_graphs, canonical_mode, check_convergence,
                     descent_hyperparams, evaluate_lagrangian,
                     relaxed_baseline, solve, solve_base,
                     update_adjacency, update_binary_aux, update_box_aux,
                     update_duals, update_graphon, update_grid_indices,
                     update_probability, update_probability_shared)
from .experiments import (ExperimentConfig, Method, RobustSweepConfig,
                          SenateConfig, SweepResult, TrialRecord,
                          export_results, graphon_recovery_error,
                          recovery_error, run_robust_sweep,
                          run_senate_experiment, run_synthetic_sweep,
                          summarize)
from .voteview import SenateDataset, load_voteview, make_senate_fixture

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
