"""
Checking the two risk-gap bounds
================================

For a surrogate g that is both Lipschitz and in a Gaussian RKHS, the gap
|E_P g - E_Q g| is bounded by L * W_1 and by |g|_H * MMD. The sweep shows
both bounds hold and how loose each one is.
"""

import numpy as np

from otdistill import bound_comparison_sweep
from otdistill.bounds import LipschitzFunction, check_wasserstein_bound
from otdistill.core import uniform_distribution

rows = bound_comparison_sweep(seed=0, trials=200)
gap = np.array([r["gap"] for r in rows])
lb = np.array([r["L_bound"] for r in rows])
kb = np.array([r["rkhs_bound"] for r in rows])
print("W1 bound holds on every trial: ", bool(np.all(gap <= lb + 1e-9)))
print("MMD bound holds on every trial:", bool(np.all(gap <= kb + 1e-9)))
print("median gap / W1 bound  ", np.median(gap / lb))
print("median gap / MMD bound ", np.median(gap / kb))

# A tilted distance function is exactly tight against W_1.
g = LipschitzFunction(np.array([[-1e3]]), scale=2.0)
rep = check_wasserstein_bound(g, uniform_distribution([[0.0]]), uniform_distribution([[1.0]]))
print(f"tight case: gap {rep.gap:.9f}, bound {rep.bound}, slack {rep.slack:.1e}")
