"""Minimum-power gain allocation for analog amplify-and-forward sensor fusion.

Library layout:

- ``model``: sensor/network data types, unit conversions, the linear
  fusion estimator and its variance, power bookkeeping.
- ``alloc_l1``: closed-form minimum-total-power allocator with channel
  ranking and sensor shut-off.
- ``alloc_l2``: barrier interior-point solver for the squared power norm.
- ``oracles``: independent cross-check solvers (multiplier bisection,
  projected descent, grid search, uniform baseline) and derived metrics.
- ``experiments``: random topologies, Monte-Carlo validation, sweeps.
- ``cli``: the ``wsnpl`` command-line front end.
"""

from .alloc_l1 import (RankedNetwork, ThresholdState, find_active_count,
                       rank_by_channel, solve_l1, threshold_f, threshold_state)
from .alloc_l2 import L2SolverOptions, kkt_residual_l2, solve_l2
from .errors import (ConfigError, ConsistencyError, ConvergenceError,
                     InfeasibleError, NoEstimatorError)
from .experiments import (McEstimationReport, SweepResult, SweepRow,
                          TopologyParams, default_sweep_d0, generate_topology,
                          simulate_estimation, sweep_r)
from .model import (L1, L2, Allocation, NetworkInstance, ProblemSpec,
                    SensorSpec, alpha_from_precision, analytic_mse,
                    blue_estimate, blue_weights, channel_gain, db_to_linear,
                    dbm_to_watts, distortion_floor, make_allocation,
                    power_metrics, precision_from_alpha)
from .oracles import (ANALOG_SSB_FDMA, DIGITAL_TDMA, OracleReport,
                      average_node_lifetime, bandwidth_requirement,
                      grid_search, project_capped_simplex, projected_descent,
                      relative_power_savings, solve_l1_bisection,
                      solve_uniform)

__version__ = "0.1.0"

__all__ = [
    "ANALOG_SSB_FDMA", "Allocation", "ConfigError", "ConsistencyError",
    "ConvergenceError", "DIGITAL_TDMA", "InfeasibleError", "L1", "L2",
    "L2SolverOptions", "McEstimationReport", "NetworkInstance",
    "NoEstimatorError", "OracleReport", "ProblemSpec", "RankedNetwork",
    "SensorSpec", "SweepResult", "SweepRow", "ThresholdState",
    "TopologyParams", "alpha_from_precision", "analytic_mse",
    "average_node_lifetime", "bandwidth_requirement", "blue_estimate",
    "blue_weights", "channel_gain", "db_to_linear", "dbm_to_watts",
    "default_sweep_d0", "distortion_floor", "find_active_count",
    "generate_topology", "grid_search", "kkt_residual_l2", "make_allocation",
    "power_metrics", "precision_from_alpha", "project_capped_simplex",
    "projected_descent", "rank_by_channel", "relative_power_savings",
    "simulate_estimation", "solve_l1", "solve_l1_bisection", "solve_l2",
    "solve_uniform", "sweep_r", "threshold_f", "threshold_state",
]
