"""Wasserstein-metric dataset distillation on point clouds.

Exact discrete optimal transport with dual potentials, free-support
barycenters, per-class BatchNorm-statistic regularization, distribution
discrepancies (W_p, sliced Wasserstein, MMD) and risk-gap bound checks.
"""

__version__ = "0.1.0"

from .core import (DiscreteDistribution, OtDistillError, make_blob_dataset,
                   project_to_simplex, uniform_distribution, validate_distribution)
from .ot import (CostMatrix, TransportSolution, brute_force_assignment, build_cost_matrix,
                 solve_exact, wasserstein_distance)
from .barycenter import (BarycenterConfig, BarycenterResult, GridSpec, fixed_grid_barycenter,
                         free_support_barycenter, render_atoms_to_grid, update_positions,
                         update_weights)
from .metrics import (KernelSpec, kl_divergence_grid, mmd_linear_mean_gap, mmd_squared,
                      sliced_wasserstein)
from .pcbn import (ClassBNStats, FeatureTensor, bn_regularization_loss, compute_class_bn_stats,
                   weighted_channel_mean, weighted_channel_var)
from .distill import (DistillConfig, DistillResult, ToyEncoder, distill_class, distill_dataset,
                      encoder_forward, feature_loss, total_loss)
from .bounds import (LipschitzFunction, RkhsFunction, bound_comparison_sweep,
                     check_mmd_bound, check_wasserstein_bound, expected_gap)
