"""
Distilling three Gaussian blobs
===============================

A small frozen encoder embeds each class. Per class we compute a 5-atom
barycenter in feature space and optimize 5 synthetic inputs so that their
features land on the atoms while their weighted pre-activation statistics
track those of the real class. lam trades the two terms.
"""

import numpy as np

from otdistill import DistillConfig, ToyEncoder, distill_dataset, make_blob_dataset

data = make_blob_dataset(seed=4, classes=3, points_per_class=100)
enc = ToyEncoder.random(d=2, d_f=4, activation="tanh", seed=0)

for lam in (0.0, 0.1, 1.0):
    res = distill_dataset(data, enc, DistillConfig(lam=lam, lr=0.05, steps=300, m_per_class=5))
    for c in res.classes:
        print(f"lam={lam:3.1f} class {c.label}: feature loss {c.feature_loss:.2e}"
              f"  BN loss {c.bn_loss:.2e}")

# The synthetic set is a weighted summary of each class.
c = res.classes[0]
np.set_printoptions(precision=3, suppress=True)
print("class 0 synthetic points\n", c.synthetic)
print("weights", c.weights)
print("weighted mean", c.weights @ c.synthetic, " real mean", data[0].mean())
