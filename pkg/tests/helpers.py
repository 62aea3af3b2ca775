"""Builders shared by the test modules."""
import math

import numpy as np
from shapely.geometry import Polygon

from textgeom.geom import BitMask, Quad
from textgeom.nms import Detection


def random_simple_quad(rng, cx=40.0, cy=40.0, r_lo=3.0, r_hi=30.0):
    """Random simple (possibly concave) quad: 4 points sorted by angle
    around a center, redrawn until GEOS calls the polygon valid."""
    while True:
        angles = sorted(rng.uniform(0, 2 * math.pi) for _ in range(4))
        pts = []
        for a in angles:
            r = rng.uniform(r_lo, r_hi)
            pts.append((cx + r * math.cos(a), cy + r * math.sin(a)))
        poly = Polygon(pts)
        if poly.is_valid and poly.area > 0:
            return Quad(tuple(pts))


def full_mask(x, y, w, h):
    return BitMask(x, y, np.ones((h, w), bool))


def det(mask, score, image_id="img"):
    return Detection(image_id, score, mask)
