"""2-D geometry for text instances: boxes, quadrilaterals and bit-masks.

Image coordinates throughout: x grows to the right, y grows downwards, and
pixel ``(px, py)`` covers the unit square ``[px, px+1) x [py, py+1)`` with
its center at ``(px + 0.5, py + 0.5)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Optional, Sequence

import numpy as np

from .errors import EmptyMaskError, InvalidBoxError, InvalidGeometryError


class Point(NamedTuple):
    x: float
    y: float


def _signed_area2(pts: np.ndarray) -> float:
    # twice the shoelace area; positive means clockwise on screen (y down)
    x, y = pts[:, 0], pts[:, 1]
    return float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def _orient(a, b, c) -> float:
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])


def _segments_cross(p1, p2, p3, p4) -> bool:
    """True when the two segments cross at a single interior point."""
    d1 = _orient(p3, p4, p1)
    d2 = _orient(p3, p4, p2)
    d3 = _orient(p1, p2, p3)
    d4 = _orient(p1, p2, p4)
    return d1 * d2 < 0 and d3 * d4 < 0


@dataclass(frozen=True)
class Quad:
    """Four-vertex polygon with a canonical vertex order.

    On construction the vertices are reordered clockwise (in image
    coordinates) starting from the vertex with the smallest ``(y, x)``.
    Degenerate quads (zero area) keep their cyclic order.
    """

    vertices: tuple

    def __post_init__(self):
        pts = np.asarray(self.vertices, dtype=float)
        if pts.shape != (4, 2):
            raise InvalidGeometryError(f"a quad needs exactly 4 (x, y) vertices, got shape {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise InvalidGeometryError("quad vertices must be finite")
        if _signed_area2(pts) < 0:
            pts = pts[::-1]
        start = min(range(4), key=lambda i: (pts[i, 1], pts[i, 0]))
        pts = np.roll(pts, -start, axis=0)
        object.__setattr__(self, "vertices", tuple(Point(float(x), float(y)) for x, y in pts))

    @classmethod
    def from_flat(cls, coords: Sequence[float]) -> "Quad":
        if len(coords) != 8:
            raise InvalidGeometryError(f"expected 8 coordinates, got {len(coords)}")
        return cls(tuple((coords[2 * i], coords[2 * i + 1]) for i in range(4)))

    @property
    def array(self) -> np.ndarray:
        return np.array(self.vertices, dtype=float)

    @property
    def area(self) -> float:
        return abs(_signed_area2(self.array)) / 2.0

    def is_simple(self) -> bool:
        v = self.vertices
        return not (_segments_cross(v[0], v[1], v[2], v[3]) or _segments_cross(v[1], v[2], v[3], v[0]))

    def flat(self) -> list:
        return [c for p in self.vertices for c in p]

    def bounds(self) -> "AABox":
        a = self.array
        return AABox(a[:, 0].min(), a[:, 1].min(), a[:, 0].max(), a[:, 1].max())


@dataclass(frozen=True)
class AABox:
    x_min: float
    y_min: float
    x_max: float
    y_max: float

    def __post_init__(self):
        vals = (self.x_min, self.y_min, self.x_max, self.y_max)
        if not all(math.isfinite(v) for v in vals):
            raise InvalidBoxError(f"box coordinates must be finite: {vals}")
        if self.x_min > self.x_max or self.y_min > self.y_max:
            raise InvalidBoxError(f"inverted box: {vals}")
        for name, v in zip(("x_min", "y_min", "x_max", "y_max"), vals):
            object.__setattr__(self, name, float(v))

    @property
    def width(self) -> float:
        return self.x_max - self.x_min

    @property
    def height(self) -> float:
        return self.y_max - self.y_min

    @property
    def area(self) -> float:
        return self.width * self.height

    @property
    def center(self) -> Point:
        return Point((self.x_min + self.x_max) / 2, (self.y_min + self.y_max) / 2)

    def as_tuple(self) -> tuple:
        return (self.x_min, self.y_min, self.x_max, self.y_max)


def _normalize_angle(angle: float) -> float:
    # rectangles are symmetric under a half turn: fold into (-pi/2, pi/2]
    a = math.fmod(angle, math.pi)
    if a > math.pi / 2:
        a -= math.pi
    elif a <= -math.pi / 2:
        a += math.pi
    return a


@dataclass(frozen=True)
class RotatedRect:
    """Rectangle of size ``width x height`` turned by ``angle`` radians about
    its center. Positive angles turn clockwise on screen."""

    center: Point
    width: float
    height: float
    angle: float = 0.0

    def __post_init__(self):
        if self.width < 0 or self.height < 0:
            raise InvalidGeometryError(f"negative rectangle size {self.width}x{self.height}")
        vals = (*self.center, self.width, self.height, self.angle)
        if not all(math.isfinite(v) for v in vals):
            raise InvalidGeometryError("rotated rectangle fields must be finite")
        object.__setattr__(self, "center", Point(float(self.center[0]), float(self.center[1])))
        object.__setattr__(self, "angle", _normalize_angle(float(self.angle)))


class BitMask:
    """Binary raster of one instance placed at ``(x, y)`` in the image.

    ``bits`` is a read-only boolean array of shape ``(height, width)``. An
    empty mask (no set pixel) may have zero width and height.
    """

    __slots__ = ("x", "y", "bits", "_area")

    def __init__(self, x: int, y: int, bits):
        bits = np.array(bits, dtype=bool, copy=True)
        if bits.ndim != 2:
            raise InvalidGeometryError(f"mask bits must be 2-D, got {bits.ndim}-D")
        bits.setflags(write=False)
        self.x = int(x)
        self.y = int(y)
        self.bits = bits
        self._area = None

    @property
    def width(self) -> int:
        return self.bits.shape[1]

    @property
    def height(self) -> int:
        return self.bits.shape[0]

    @property
    def area(self) -> int:
        if self._area is None:
            self._area = int(np.count_nonzero(self.bits))
        return self._area

    def extent(self) -> tuple:
        """``(x0, y0, x1, y1)`` of the raster window, exclusive on the right."""
        return (self.x, self.y, self.x + self.width, self.y + self.height)

    def cropped(self) -> "BitMask":
        """Same pixels, window shrunk to the set pixels."""
        if self.area == 0:
            return BitMask(self.x, self.y, np.zeros((0, 0), bool))
        rows = np.flatnonzero(self.bits.any(axis=1))
        cols = np.flatnonzero(self.bits.any(axis=0))
        r0, r1, c0, c1 = rows[0], rows[-1] + 1, cols[0], cols[-1] + 1
        return BitMask(self.x + c0, self.y + r0, self.bits[r0:r1, c0:c1])

    def to_image(self, width: int, height: int) -> np.ndarray:
        """Paste into a ``(height, width)`` canvas; out-of-frame pixels are dropped."""
        canvas = np.zeros((height, width), bool)
        x0, y0, x1, y1 = self.extent()
        cx0, cy0, cx1, cy1 = max(x0, 0), max(y0, 0), min(x1, width), min(y1, height)
        if cx0 < cx1 and cy0 < cy1:
            canvas[cy0:cy1, cx0:cx1] = self.bits[cy0 - y0:cy1 - y0, cx0 - x0:cx1 - x0]
        return canvas

    def pixel_set(self) -> set:
        ys, xs = np.nonzero(self.bits)
        return set(zip((xs + self.x).tolist(), (ys + self.y).tolist()))

    def __eq__(self, other):
        if not isinstance(other, BitMask):
            return NotImplemented
        return (self.x, self.y) == (other.x, other.y) and np.array_equal(self.bits, other.bits)

    __hash__ = None

    def __repr__(self):
        return f"BitMask(x={self.x}, y={self.y}, w={self.width}, h={self.height}, area={self.area})"


def empty_mask() -> BitMask:
    return BitMask(0, 0, np.zeros((0, 0), bool))


def points_in_polygon(px: np.ndarray, py: np.ndarray, poly: np.ndarray) -> np.ndarray:
    """Boundary-inclusive membership of the grid ``py[:, None] x px[None, :]``.

    Uses the crossing-number rule for the interior plus an explicit
    on-segment test so that points lying on an edge count as inside.
    """
    X = px[None, :]
    Y = py[:, None]
    inside = np.zeros((py.size, px.size), bool)
    on_edge = np.zeros_like(inside)
    n = len(poly)
    for k in range(n):
        ax, ay = poly[k]
        bx, by = poly[(k + 1) % n]
        straddle = (ay > Y) != (by > Y)
        if by != ay:
            xint = ax + (bx - ax) * (Y - ay) / (by - ay)
            inside ^= straddle & (X < xint)
        cross = (bx - ax) * (Y - ay) - (by - ay) * (X - ax)
        tol = 1e-9 * (abs(bx - ax) + abs(by - ay) + 1.0)
        on_edge |= (
            (np.abs(cross) <= tol)
            & (X >= min(ax, bx) - 1e-12) & (X <= max(ax, bx) + 1e-12)
            & (Y >= min(ay, by) - 1e-12) & (Y <= max(ay, by) + 1e-12)
        )
    return inside | on_edge


def rasterize_polygon(poly, clip: Optional[AABox] = None) -> BitMask:
    """Set every pixel whose center lies inside or on ``poly``.

    ``poly`` is any simple polygon given as an ``(n, 2)`` array. With
    ``clip`` only pixels whose centers fall inside the clip box are kept.
    """
    poly = np.asarray(poly, dtype=float)
    lo_x, lo_y = poly.min(axis=0)
    hi_x, hi_y = poly.max(axis=0)
    if clip is not None:
        lo_x, lo_y = max(lo_x, clip.x_min), max(lo_y, clip.y_min)
        hi_x, hi_y = min(hi_x, clip.x_max), min(hi_y, clip.y_max)
    c0, c1 = math.ceil(lo_x - 0.5), math.floor(hi_x - 0.5)
    r0, r1 = math.ceil(lo_y - 0.5), math.floor(hi_y - 0.5)
    if c1 < c0 or r1 < r0:
        return empty_mask()
    cols = np.arange(c0, c1 + 1)
    rows = np.arange(r0, r1 + 1)
    bits = points_in_polygon(cols + 0.5, rows + 0.5, poly)
    return BitMask(c0, r0, bits).cropped()


def rasterize_quad(q: Quad, clip: Optional[AABox] = None) -> BitMask:
    """Rasterize a quadrilateral with the pixel-center rule.

    Raises InvalidGeometryError for self-intersecting quads. Quads thinner
    than a pixel may produce an empty mask.
    """
    if not q.is_simple():
        raise InvalidGeometryError(f"self-intersecting quad: {q.vertices}")
    if clip is not None and (clip.width <= 0 or clip.height <= 0):
        raise InvalidGeometryError("clip box is degenerate")
    return rasterize_polygon(q.array, clip)


def mask_area(m: BitMask) -> int:
    return m.area


def _overlap_window(a: BitMask, b: BitMask):
    ax0, ay0, ax1, ay1 = a.extent()
    bx0, by0, bx1, by1 = b.extent()
    x0, y0 = max(ax0, bx0), max(ay0, by0)
    x1, y1 = min(ax1, bx1), min(ay1, by1)
    if x0 >= x1 or y0 >= y1:
        return None
    return x0, y0, x1, y1


def mask_intersection_area(a: BitMask, b: BitMask) -> int:
    win = _overlap_window(a, b)
    if win is None:
        return 0
    x0, y0, x1, y1 = win
    sa = a.bits[y0 - a.y:y1 - a.y, x0 - a.x:x1 - a.x]
    sb = b.bits[y0 - b.y:y1 - b.y, x0 - b.x:x1 - b.x]
    return int(np.count_nonzero(sa & sb))


def mask_iou(a: BitMask, b: BitMask) -> float:
    inter = mask_intersection_area(a, b)
    union = a.area + b.area - inter
    if union == 0:
        return 0.0
    return inter / union


def box_iou(a: AABox, b: AABox) -> float:
    iw = min(a.x_max, b.x_max) - max(a.x_min, b.x_min)
    ih = min(a.y_max, b.y_max) - max(a.y_min, b.y_min)
    inter = max(iw, 0.0) * max(ih, 0.0)
    union = a.area + b.area - inter
    if union <= 0:
        return 0.0
    return inter / union


def box_iou_matrix(a, b) -> np.ndarray:
    """Pairwise IoU between ``(N, 4)`` and ``(M, 4)`` arrays of xyxy boxes."""
    a = np.asarray(a, dtype=float).reshape(-1, 4)
    b = np.asarray(b, dtype=float).reshape(-1, 4)
    iw = np.minimum(a[:, None, 2], b[None, :, 2]) - np.maximum(a[:, None, 0], b[None, :, 0])
    ih = np.minimum(a[:, None, 3], b[None, :, 3]) - np.maximum(a[:, None, 1], b[None, :, 1])
    inter = np.clip(iw, 0, None) * np.clip(ih, 0, None)
    area_a = (a[:, 2] - a[:, 0]) * (a[:, 3] - a[:, 1])
    area_b = (b[:, 2] - b[:, 0]) * (b[:, 3] - b[:, 1])
    union = area_a[:, None] + area_b[None, :] - inter
    with np.errstate(invalid="ignore", divide="ignore"):
        iou = np.where(union > 0, inter / np.where(union > 0, union, 1.0), 0.0)
    return iou


def mask_bounding_box(m: BitMask) -> AABox:
    """Tightest axis-aligned box around the set pixels (pixel extents)."""
    if m.area == 0:
        raise EmptyMaskError("bounding box of an empty mask is undefined")
    rows = np.flatnonzero(m.bits.any(axis=1))
    cols = np.flatnonzero(m.bits.any(axis=0))
    return AABox(m.x + cols[0], m.y + rows[0], m.x + cols[-1] + 1, m.y + rows[-1] + 1)


def boundary_centers(m: BitMask) -> np.ndarray:
    """Centers of the leftmost and rightmost set pixel of every occupied row.

    Their convex hull equals the hull of all set-pixel centers.
    """
    bits = m.bits
    rows = np.flatnonzero(bits.any(axis=1))
    sub = bits[rows]
    left = sub.argmax(axis=1)
    right = sub.shape[1] - 1 - sub[:, ::-1].argmax(axis=1)
    ys = np.concatenate([rows, rows]) + m.y + 0.5
    xs = np.concatenate([left, right]) + m.x + 0.5
    return np.unique(np.column_stack([xs, ys]), axis=0)


def convex_hull(points) -> np.ndarray:
    """Andrew's monotone chain. Collinear points are dropped.

    Returns the hull vertices in counter-clockwise order of the math
    convention (clockwise on screen); fewer than 3 rows for degenerate input.
    """
    pts = sorted(set(map(tuple, np.asarray(points, dtype=float).tolist())))
    if len(pts) <= 2:
        return np.array(pts, dtype=float).reshape(-1, 2)

    def half(seq):
        out = []
        for p in seq:
            while len(out) >= 2 and _orient(out[-2], out[-1], p) <= 0:
                out.pop()
            out.append(p)
        return out

    lower = half(pts)
    upper = half(reversed(pts))
    return np.array(lower[:-1] + upper[:-1], dtype=float)


def min_area_rect(points):
    """Minimum-area enclosing rectangle of a point set.

    Returns ``(corners, area)`` where ``corners`` is a ``(4, 2)`` array. The
    optimal rectangle has a side collinear with a hull edge, so only hull
    edge directions are examined (the rotating-calipers candidates).
    """
    hull = convex_hull(points)
    if len(hull) == 1:
        return np.repeat(hull, 4, axis=0), 0.0
    edges = np.roll(hull, -1, axis=0) - hull
    lengths = np.hypot(edges[:, 0], edges[:, 1])
    keep = lengths > 0
    u = edges[keep] / lengths[keep, None]
    n = np.column_stack([-u[:, 1], u[:, 0]])
    pu = hull @ u.T  # (h, k)
    pn = hull @ n.T
    umin, umax = pu.min(axis=0), pu.max(axis=0)
    nmin, nmax = pn.min(axis=0), pn.max(axis=0)
    areas = (umax - umin) * (nmax - nmin)
    k = int(np.argmin(areas))
    uk, nk = u[k], n[k]
    corners = np.array([
        umin[k] * uk + nmin[k] * nk,
        umax[k] * uk + nmin[k] * nk,
        umax[k] * uk + nmax[k] * nk,
        umin[k] * uk + nmax[k] * nk,
    ])
    return corners, float(areas[k])


def min_area_quad(m: BitMask) -> Quad:
    """Minimum-area rotated rectangle around the set-pixel centers, as a Quad.

    Rasterizing the result with :func:`rasterize_quad` recovers at least
    every pixel of ``m`` since centers on the boundary count as inside.
    """
    if m.area == 0:
        raise EmptyMaskError("cannot fit a quadrilateral to an empty mask")
    corners, _ = min_area_rect(boundary_centers(m))
    return Quad(tuple(map(tuple, corners)))


def rotated_rect_corners(r: RotatedRect) -> np.ndarray:
    hw, hh = r.width / 2.0, r.height / 2.0
    local = np.array([[-hw, -hh], [hw, -hh], [hw, hh], [-hw, hh]])
    c, s = math.cos(r.angle), math.sin(r.angle)
    rot = np.array([[c, -s], [s, c]])
    return local @ rot.T + np.array(r.center)


def rotated_rect_to_quad(r: RotatedRect) -> Quad:
    corners = rotated_rect_corners(r)
    # snap float noise so axis-aligned inputs give exact corners
    corners = np.where(np.abs(corners - np.round(corners)) < 1e-9, np.round(corners), corners)
    return Quad(tuple(map(tuple, corners)))


def quad_from_points(points: Iterable) -> Quad:
    return Quad(tuple(tuple(p) for p in points))
