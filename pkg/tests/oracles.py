"""Independent reference computations used as test oracles.

Nothing here calls into the code paths under test, except plain data
types (BitMask) used to carry pixels around.
"""

import numpy as np
import shapely
from shapely.geometry import Polygon


def pixels_inside_polygon(vertices, x_range, y_range):
    """Pixels whose center is covered (interior or boundary) by the polygon,
    decided point by point with GEOS predicates."""
    poly = Polygon(vertices)
    xs, ys = np.meshgrid(np.arange(*x_range), np.arange(*y_range))
    centers = shapely.points(xs.ravel() + 0.5, ys.ravel() + 0.5)
    inside = shapely.covers(poly, centers)
    return set(zip(xs.ravel()[inside].tolist(), ys.ravel()[inside].tolist()))


def enumerate_rect_pixels(x0, y0, x1, y1):
    return {(x, y) for x in range(x0, x1) for y in range(y0, y1)}


def sweep_min_rect_area(points, step_deg=0.25):
    """Smallest axis-aligned bounding area of ``points`` over rotations
    0, step, 2*step, ... < 90 degrees."""
    pts = np.asarray(points, dtype=float)
    angles = np.arange(int(round(90 / step_deg))) * step_deg
    t = np.radians(angles)[:, None]
    u = pts[:, 0] * np.cos(t) + pts[:, 1] * np.sin(t)
    v = -pts[:, 0] * np.sin(t) + pts[:, 1] * np.cos(t)
    areas = np.ptp(u, axis=1) * np.ptp(v, axis=1)
    k = int(np.argmin(areas))
    return float(areas[k]), float(angles[k])


def set_pixel_centers(mask):
    ys, xs = np.nonzero(mask.bits)
    return np.column_stack([xs + mask.x + 0.5, ys + mask.y + 0.5])


def brute_iou(pix_a, pix_b):
    union = len(pix_a | pix_b)
    return len(pix_a & pix_b) / union if union else 0.0


def hand_smooth_l1(x, sigma):
    if abs(x) < 1 / sigma ** 2:
        return 0.5 * (sigma * x) ** 2
    return abs(x) - 0.5 / sigma ** 2
