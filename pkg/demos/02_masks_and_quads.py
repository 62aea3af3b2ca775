"""
From quadrilaterals to masks and back
=====================================

Ground truth is a quadrilateral; training targets are the pixel mask and
its bounding box; at test time the kept mask is turned back into the
smallest enclosing rotated rectangle.
"""

# %%
import math

from textgeom.geom import (RotatedRect, mask_bounding_box, min_area_quad, rasterize_quad,
                           rotated_rect_to_quad)

quad = rotated_rect_to_quad(RotatedRect((60.0, 40.0), 80.0, 14.0, math.radians(25)))
mask = rasterize_quad(quad)
print("quad area", round(quad.area, 1), " mask pixels", mask.area)
print("bounding box", mask_bounding_box(mask))

# %% a small picture of the mask, one character per pixel
for row in mask.bits[::3, ::2]:
    print("".join("#" if v else "." for v in row))

# %% fit the minimum-area rectangle back to the pixels
fit = min_area_quad(mask)
print("fitted quad", [tuple(round(c, 1) for c in p) for p in fit.vertices])
print("refit covers every pixel:", mask.pixel_set() <= rasterize_quad(fit).pixel_set())
