"""
Anchor grid and box deltas
==========================

28 anchors per location (4 areas x 7 aspect ratios, tall ones included
for vertical text) on a stride-16 grid.
"""

# %%
import numpy as np

from textgeom.anchors import (AnchorConfig, assign_anchor_labels, base_anchor_sizes,
                              decode_deltas, encode_deltas, fusion_stride_plan,
                              generate_anchor_grid)
from textgeom.geom import AABox

plan = fusion_stride_plan()
print(plan)
cfg = AnchorConfig()
print(cfg.per_location, "anchors per location")
print(np.round(base_anchor_sizes(cfg)[:7], 1))  # the 32x32-area family, w and h

# %% at 1500 x 848 the grid is 53 x 94 cells
grid = generate_anchor_grid(1500, 848)
print(plan.grid_shape(1500, 848), grid.shape)

# %% regression targets and their inverse
anchor, target = AABox(100, 100, 164, 132), AABox(110, 96, 190, 140)
d = encode_deltas(anchor, target)
print(d)
print(decode_deltas(anchor, d))

# %% labels: gt index for positives, -1 negative, -2 ignored
labels = assign_anchor_labels(grid, [target])
print({k: int((labels == k).sum()) for k in (0, -1, -2)})
