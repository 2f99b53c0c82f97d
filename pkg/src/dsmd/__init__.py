"""Distributed stochastic mirror descent for two-network zero-sum
matrix games: geometry primitives, consensus topologies, game oracles,
the iteration engine, convergence metrics with theoretical envelopes,
and a seeded experiment harness."""

from .geometry import (Regularizer, SimplexPoint, DualVector,
                       bregman_divergence, prox_map, project_simplex,
                       primal_norm, dual_norm)
from .topology import (GraphSpec, Graph, MixingMatrix, BipartiteWeights,
                       DecayConstants, MixingSchedule, build_graph,
                       metropolis_weights, uniform_bipartite,
                       decay_constants, transition_matrix, bfs_distances)
from .games import (MatrixGameSpec, LipschitzProfile, make_matrix_game,
                    mean_matrix, expected_cost, sample_cost_matrix,
                    assign_network2_costs, subgradient_oracle,
                    lipschitz_profile)
from .engine import (StepSchedule, TopologyBundle, AgentState, Trajectory,
                     dsmd_round, run_dsmd, time_averaged_iterate,
                     network_average)
from .metrics import (BoundParams, MetricSeries, NonConvergenceError,
                      bound_params, consensus_envelope,
                      consensus_envelope_series, regret_bound_cc,
                      regret_bound_cc_series, regret_bound_sc,
                      ergodic_gap_bound, ergodic_gap_bound_series,
                      mse_bound_sc, best_response_value, gap, mean_gap,
                      pseudo_regret, pseudo_regret_series, ne_reference,
                      absolute_error)
from .harness import (ConfigError, ExperimentConfig, RunReport,
                      default_config, parse_config, load_config,
                      config_hash, run_experiment, sweep, verify_bounds,
                      dump_topology)

__version__ = "0.1.0"
