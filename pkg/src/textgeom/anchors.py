"""Region-proposal anchor geometry.

Anchors are given as ``(N, 4)`` float arrays of ``x_min, y_min, x_max,
y_max``. Scalar helpers accept :class:`~textgeom.geom.AABox` as well.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import InvalidBoxError
from .geom import AABox, box_iou_matrix

DEFAULT_SCALES = (32 ** 2, 64 ** 2, 128 ** 2, 256 ** 2)
DEFAULT_RATIOS = (1 / 3, 1 / 2, 1, 2, 3, 5, 7)
DELTA_CLAMP = math.log(1000.0)

NEGATIVE = -1
IGNORE = -2


@dataclass(frozen=True)
class FusionStridePlan:
    stage3_stride: int
    stage4_stride: int
    stage5_stride: int
    fused_a_stride: int
    fused_b_stride: int
    rpn_stride: int

    def __post_init__(self):
        assert self.fused_a_stride == self.stage3_stride
        assert self.fused_b_stride == self.fused_a_stride
        assert self.rpn_stride == 2 * self.fused_a_stride

    def grid_shape(self, image_w: int, image_h: int) -> tuple:
        return grid_shape(image_w, image_h, self.rpn_stride)


def fusion_stride_plan() -> FusionStridePlan:
    """Feature strides of the fused backbone.

    ResNet stage3 sits at stride 8 and stage4 at 16. Stage5 is dilated
    instead of downsampled, so it stays at 16. Stage4 and stage5 are both
    upsampled to stage3 resolution before the element-wise sums, and a
    stride-2 convolution in front of the RPN halves the anchor density.
    """
    stage3 = 8
    stage4 = 2 * stage3
    stage5 = stage4
    fused_a = stage3  # stage3 + up(stage4)
    fused_b = fused_a  # fused_a + up(stage5)
    return FusionStridePlan(stage3, stage4, stage5, fused_a, fused_b, 2 * fused_a)


@dataclass(frozen=True)
class AnchorConfig:
    scales: tuple = DEFAULT_SCALES
    ratios: tuple = DEFAULT_RATIOS
    stride: int = field(default_factory=lambda: fusion_stride_plan().rpn_stride)

    def __post_init__(self):
        if not self.scales or any(s <= 0 for s in self.scales):
            raise ValueError(f"anchor scales must be positive: {self.scales}")
        if not self.ratios or any(r <= 0 for r in self.ratios):
            raise ValueError(f"anchor ratios must be positive: {self.ratios}")
        if self.stride <= 0:
            raise ValueError(f"stride must be positive: {self.stride}")
        object.__setattr__(self, "scales", tuple(self.scales))
        object.__setattr__(self, "ratios", tuple(self.ratios))

    @property
    def per_location(self) -> int:
        return len(self.scales) * len(self.ratios)


@dataclass(frozen=True)
class BoxDelta:
    dx: float
    dy: float
    dw: float
    dh: float

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.dx, self.dy, self.dw, self.dh)):
            raise ValueError("box deltas must be finite")


def grid_shape(image_w: int, image_h: int, stride: int) -> tuple:
    """``(rows, cols)`` of the anchor grid; partial cells at the far edges count."""
    return (-(-image_h // stride), -(-image_w // stride))


def base_anchor_sizes(cfg: AnchorConfig) -> np.ndarray:
    """``(K, 2)`` widths and heights, scale-major then ratio. Ratio is h/w."""
    sizes = [(math.sqrt(s / r), math.sqrt(s * r)) for s in cfg.scales for r in cfg.ratios]
    return np.array(sizes, dtype=float)


def anchors_at(i: int, j: int, cfg: AnchorConfig) -> np.ndarray:
    """The anchors of grid column ``i``, row ``j``."""
    cx, cy = (i + 0.5) * cfg.stride, (j + 0.5) * cfg.stride
    wh = base_anchor_sizes(cfg)
    return np.column_stack([cx - wh[:, 0] / 2, cy - wh[:, 1] / 2, cx + wh[:, 0] / 2, cy + wh[:, 1] / 2])


def generate_anchor_grid(image_w: int, image_h: int, cfg: AnchorConfig = None) -> np.ndarray:
    """All anchors of an image as an ``(rows * cols * K, 4)`` array.

    Ordered row-major over cells, then by scale, then by ratio. Anchors are
    not clipped to the image.
    """
    if image_w <= 0 or image_h <= 0:
        raise ValueError(f"image size must be positive, got {image_w}x{image_h}")
    cfg = cfg or AnchorConfig()
    rows, cols = grid_shape(image_w, image_h, cfg.stride)
    wh = base_anchor_sizes(cfg)
    half = np.concatenate([-wh / 2, wh / 2], axis=1)  # (K, 4)
    cx = (np.arange(cols) + 0.5) * cfg.stride
    cy = (np.arange(rows) + 0.5) * cfg.stride
    gx, gy = np.meshgrid(cx, cy)  # (rows, cols), row-major
    centers = np.stack([gx.ravel(), gy.ravel(), gx.ravel(), gy.ravel()], axis=1)
    return (centers[:, None, :] + half[None, :, :]).reshape(-1, 4)


def _center_size(b) -> tuple:
    if isinstance(b, AABox):
        b = b.as_tuple()
    x0, y0, x1, y1 = b
    return (x0 + x1) / 2, (y0 + y1) / 2, x1 - x0, y1 - y0


def encode_deltas(anchor, target) -> BoxDelta:
    ax, ay, aw, ah = _center_size(anchor)
    tx, ty, tw, th = _center_size(target)
    if aw <= 0 or ah <= 0 or tw <= 0 or th <= 0:
        raise InvalidBoxError("delta encoding needs boxes with positive width and height")
    return BoxDelta((tx - ax) / aw, (ty - ay) / ah, math.log(tw / aw), math.log(th / ah))


def decode_deltas(anchor, d: BoxDelta) -> AABox:
    ax, ay, aw, ah = _center_size(anchor)
    if aw <= 0 or ah <= 0:
        raise InvalidBoxError("delta decoding needs an anchor with positive size")
    dw = min(max(d.dw, -DELTA_CLAMP), DELTA_CLAMP)
    dh = min(max(d.dh, -DELTA_CLAMP), DELTA_CLAMP)
    cx, cy = ax + d.dx * aw, ay + d.dy * ah
    w, h = aw * math.exp(dw), ah * math.exp(dh)
    return AABox(cx - w / 2, cy - h / 2, cx + w / 2, cy + h / 2)


def encode_deltas_array(anchors: np.ndarray, targets: np.ndarray) -> np.ndarray:
    """Vectorized :func:`encode_deltas` over rows; returns ``(N, 4)`` deltas."""
    a = np.asarray(anchors, float)
    t = np.asarray(targets, float)
    aw, ah = a[:, 2] - a[:, 0], a[:, 3] - a[:, 1]
    tw, th = t[:, 2] - t[:, 0], t[:, 3] - t[:, 1]
    if np.any(aw <= 0) or np.any(ah <= 0) or np.any(tw <= 0) or np.any(th <= 0):
        raise InvalidBoxError("delta encoding needs boxes with positive width and height")
    dx = ((t[:, 0] + t[:, 2]) - (a[:, 0] + a[:, 2])) / 2 / aw
    dy = ((t[:, 1] + t[:, 3]) - (a[:, 1] + a[:, 3])) / 2 / ah
    return np.column_stack([dx, dy, np.log(tw / aw), np.log(th / ah)])


def decode_deltas_array(anchors: np.ndarray, deltas: np.ndarray) -> np.ndarray:
    a = np.asarray(anchors, float)
    d = np.asarray(deltas, float)
    aw, ah = a[:, 2] - a[:, 0], a[:, 3] - a[:, 1]
    cx = (a[:, 0] + a[:, 2]) / 2 + d[:, 0] * aw
    cy = (a[:, 1] + a[:, 3]) / 2 + d[:, 1] * ah
    w = aw * np.exp(np.clip(d[:, 2], -DELTA_CLAMP, DELTA_CLAMP))
    h = ah * np.exp(np.clip(d[:, 3], -DELTA_CLAMP, DELTA_CLAMP))
    return np.column_stack([cx - w / 2, cy - h / 2, cx + w / 2, cy + h / 2])


def _as_box_array(boxes) -> np.ndarray:
    if len(boxes) and isinstance(boxes[0], AABox):
        return np.array([b.as_tuple() for b in boxes], dtype=float)
    return np.asarray(boxes, dtype=float).reshape(-1, 4)


def assign_anchor_labels(anchors, gt_boxes: Sequence, pos_iou: float = 0.7,
                         neg_iou: float = 0.3) -> np.ndarray:
    """Label every anchor against the ground-truth boxes.

    Returns an int array: a gt index (>= 0) for positives, ``NEGATIVE`` or
    ``IGNORE`` otherwise. Besides the IoU >= ``pos_iou`` rule, the anchor(s)
    with the best IoU for each gt are positive for that gt, so no gt goes
    unassigned unless two gts share the same best anchor.
    """
    if pos_iou <= neg_iou:
        raise ValueError(f"pos_iou ({pos_iou}) must exceed neg_iou ({neg_iou})")
    a = _as_box_array(anchors)
    g = _as_box_array(gt_boxes)
    labels = np.full(len(a), IGNORE, dtype=np.int64)
    if len(g) == 0:
        labels[:] = NEGATIVE
        return labels
    iou = box_iou_matrix(a, g)  # (N, M)
    best_gt = iou.argmax(axis=1)
    best_iou = iou[np.arange(len(a)), best_gt]
    labels[best_iou <= neg_iou] = NEGATIVE
    strong = best_iou >= pos_iou
    labels[strong] = best_gt[strong]
    # an anchor that is some gt's best match belongs to that gt
    gt_best = iou.max(axis=0)
    for m in np.flatnonzero(gt_best > 0):
        labels[iou[:, m] == gt_best[m]] = m
    return labels
