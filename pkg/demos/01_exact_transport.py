"""
Exact transport between two small point clouds
==============================================

Solve one transportation problem, then read off the plan and the dual
potentials that certify it.
"""

import numpy as np

from otdistill import solve_exact, uniform_distribution, validate_distribution
from otdistill.ot import build_cost_matrix

rng = np.random.default_rng(0)
source = uniform_distribution(rng.normal(size=(5, 2)))
target = validate_distribution(rng.normal(size=(3, 2)) + 2.0, [0.5, 0.3, 0.2])

cost = build_cost_matrix(source, target, p=2)
sol = solve_exact(source, target, cost)

np.set_printoptions(precision=4, suppress=True)
print("plan (rows: source points, columns: targets)")
print(sol.plan)
print("row sums    ", sol.plan.sum(axis=1))
print("column sums ", sol.plan.sum(axis=0))

# Primal and dual values agree at the optimum.
dual = sol.source_potentials @ source.weights + sol.target_potentials @ target.weights
print(f"primal {sol.objective:.12f}  dual {dual:.12f}  pivots {sol.pivots}")

# Reduced costs are nonnegative everywhere and zero wherever mass moves.
reduced = cost.entries - sol.source_potentials[:, None] - sol.target_potentials[None, :]
print("min reduced cost", reduced.min())
print("max reduced cost on the support", np.abs(reduced[sol.plan > 1e-10]).max())
