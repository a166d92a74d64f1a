"""
KL, MMD and Wasserstein barycenters of a circle and a cross
===========================================================

On a fixed grid the forward-KL and MMD barycenters are both the mixture of
the inputs: two ghosts side by side. The Wasserstein barycenter moves mass
instead and lands halfway, as a shape between a circle and a cross.
Writes CSV grids to ./fig1_grids for plotting.
"""

import numpy as np

from otdistill import io
from otdistill.cli import main

main(["gen-data", "--geometry", "circles-crosses", "--n", "400", "--seed", "0", "--out", "fig1_points.csv"])
main(["compare-metrics", "--input", "fig1_points.csv", "--grid", "48", "--out", "fig1_grids"])

groups = io.read_labeled_csv("fig1_points.csv")
for name in ("kl_forward", "mmd_mixture", "wasserstein"):
    raw = np.loadtxt(f"fig1_grids/{name}.csv", delimiter=",", skiprows=1)
    centroid = raw[:, 2] @ raw[:, :2]
    # Fraction of mass near the two input centers: high for mixtures.
    near = np.minimum(np.linalg.norm(raw[:, :2] - groups[0].mean(), axis=1),
                      np.linalg.norm(raw[:, :2] - groups[1].mean(), axis=1)) < 1.5
    print(f"{name:12s} centroid {np.round(centroid, 3)}  mass near inputs {raw[near, 2].sum():.3f}")
print("midpoint of input centroids", np.round(0.5 * (groups[0].mean() + groups[1].mean()), 3))
