"""
Loss arithmetic
===============
"""

# %%
import numpy as np

from textgeom.losses import LossTerms, cross_entropy, ohem_select, smooth_l1, total_loss

x = np.array([0.0, 0.05, 1 / 9, 0.5, 1.0, 3.0])
print(np.round(smooth_l1(x), 5))  # quadratic inside |x| < 1/9, linear outside

# %%
print(cross_entropy([0.5, 0.5], 1), cross_entropy([0.0, 1.0], 0))

# %% weights 0.2 (RPN box), 2 (mask), 0.2 (box)
print(total_loss(LossTerms(1, 1, 1, 1, 1)), total_loss(LossTerms(mask=1)))

# %% hard negatives: 2 positives keep the 6 hardest of 10 negatives
rng = np.random.default_rng(0)
loss = rng.random(12)
labels = ["pos", "pos"] + ["neg"] * 10
print(ohem_select(loss, labels), np.argsort(-loss[2:])[:6] + 2)
