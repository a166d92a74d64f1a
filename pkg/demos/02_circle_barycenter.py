"""
Compressing a circle into a few weighted atoms
==============================================

The free-support barycenter of a single point cloud is its best m-atom
approximation in W_2. Each outer step moves the weights along the dual
potentials and then snaps every atom onto the mean of the mass it receives.
"""

import numpy as np

from otdistill import BarycenterConfig, free_support_barycenter, make_blob_dataset

(circle,) = make_blob_dataset(seed=1, classes=1, points_per_class=200, geometry="circle")

for m in (1, 4, 8, 16):
    res = free_support_barycenter(circle, BarycenterConfig(m=m, K=15), seed=2)
    radii = np.linalg.norm(res.atoms, axis=1)
    print(f"m={m:2d}  W2^2 {res.initial_objective:.4f} -> {res.objective_trace[-1]:.4f}"
          f"  atom radius {radii.mean():.3f}")

# The weighted atom mean never drifts from the source mean.
res = free_support_barycenter(circle, BarycenterConfig(m=8, K=15), seed=2)
print("largest mean drift over the run:", max(h.mean_error for h in res.history))

# Each Newton step can only lower the cost of the plan it was computed from.
for k, h in enumerate(res.history[:5], start=1):
    print(f"iter {k}: fixed plan {h.fixed_plan_cost_before:.5f} -> {h.fixed_plan_cost_after:.5f},"
          f" re-solved {h.resolved_objective:.5f}")
