"""Suppression of overlapping text instances.

Two greedy variants share one sweep: standard NMS compares axis-aligned
boxes by IoU, Mask-NMS compares instance masks by mask-maximum-intersection
(MMI), the larger of the intersection divided by either mask area. MMI is 1
whenever one mask contains the other, which is what removes word-level
duplicates sitting inside a line-level detection.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import List, Optional, Sequence

import numpy as np

from .errors import EmptyMaskError
from .geom import (AABox, BitMask, Quad, mask_bounding_box,
                   mask_intersection_area, mask_iou)

STANDARD = "standard"
MASK = "mask"


@dataclass(frozen=True)
class Detection:
    image_id: str
    score: float
    mask: BitMask
    quad: Optional[Quad] = None
    box: AABox = field(init=False, compare=False)

    def __post_init__(self):
        if not 0.0 <= self.score <= 1.0:
            raise ValueError(f"score {self.score} outside [0, 1]")
        if self.mask.area == 0:
            raise EmptyMaskError(f"detection on image {self.image_id!r} has an empty mask")
        object.__setattr__(self, "box", mask_bounding_box(self.mask))


@dataclass(frozen=True)
class NmsConfig:
    mode: str = MASK
    threshold: float = 0.5
    score_floor: float = 0.05

    def __post_init__(self):
        if self.mode not in (STANDARD, MASK):
            raise ValueError(f"unknown NMS mode {self.mode!r}")
        if not 0.0 < self.threshold <= 1.0:
            raise ValueError(f"threshold must lie in (0, 1], got {self.threshold}")
        if not 0.0 <= self.score_floor <= 1.0:
            raise ValueError(f"score_floor must lie in [0, 1], got {self.score_floor}")


def mmi(a: BitMask, b: BitMask) -> float:
    """Mask-maximum-intersection: ``max(I / area_a, I / area_b)``."""
    if a.area == 0 or b.area == 0:
        raise EmptyMaskError("MMI is undefined for empty masks")
    inter = mask_intersection_area(a, b)
    return max(inter / a.area, inter / b.area)


def _sweep_order(dets: Sequence[Detection], score_floor: float) -> np.ndarray:
    scores = np.array([d.score for d in dets], dtype=float)
    idx = np.flatnonzero(scores >= score_floor)
    # stable sort keeps input order among equal scores
    return idx[np.argsort(-scores[idx], kind="stable")]


def _check_single_image(dets):
    ids = {d.image_id for d in dets}
    if len(ids) > 1:
        raise ValueError(f"NMS runs per image; got detections from {sorted(ids)}")


def _box_array(dets) -> np.ndarray:
    return np.array([d.box.as_tuple() for d in dets], dtype=float).reshape(-1, 4)


def standard_nms_indices(dets: Sequence[Detection], threshold: float = 0.5,
                         score_floor: float = 0.05) -> List[int]:
    """Indices into ``dets`` kept by box-IoU NMS, in descending score order."""
    _check_single_image(dets)
    order = _sweep_order(dets, score_floor)
    if order.size == 0:
        return []
    boxes = _box_array(dets)[order]
    x0, y0, x1, y1 = boxes.T
    areas = (x1 - x0) * (y1 - y0)
    alive = np.ones(order.size, bool)
    keep = []
    for i in range(order.size):
        if not alive[i]:
            continue
        keep.append(int(order[i]))
        rest = np.flatnonzero(alive[i + 1:]) + i + 1
        if rest.size == 0:
            break
        iw = np.minimum(x1[i], x1[rest]) - np.maximum(x0[i], x0[rest])
        ih = np.minimum(y1[i], y1[rest]) - np.maximum(y0[i], y0[rest])
        inter = np.clip(iw, 0, None) * np.clip(ih, 0, None)
        union = areas[i] + areas[rest] - inter
        iou = np.where(union > 0, inter / np.where(union > 0, union, 1.0), 0.0)
        alive[rest[iou > threshold]] = False
    return keep


def mask_nms_indices(dets: Sequence[Detection], threshold: float = 0.5,
                     score_floor: float = 0.05) -> List[int]:
    """Indices kept by Mask-NMS. Pixel intersections are only computed for
    pairs whose mask windows overlap."""
    _check_single_image(dets)
    order = _sweep_order(dets, score_floor)
    if order.size == 0:
        return []
    masks = [dets[k].mask for k in order]
    ext = np.array([m.extent() for m in masks], dtype=np.int64)
    areas = np.array([m.area for m in masks], dtype=np.int64)
    alive = np.ones(order.size, bool)
    keep = []
    for i in range(order.size):
        if not alive[i]:
            continue
        keep.append(int(order[i]))
        rest = np.flatnonzero(alive[i + 1:]) + i + 1
        if rest.size == 0:
            break
        touching = rest[
            (np.minimum(ext[i, 2], ext[rest, 2]) > np.maximum(ext[i, 0], ext[rest, 0]))
            & (np.minimum(ext[i, 3], ext[rest, 3]) > np.maximum(ext[i, 1], ext[rest, 1]))
        ]
        mi = masks[i]
        for j in touching:
            inter = mask_intersection_area(mi, masks[j])
            if inter and max(inter / areas[i], inter / areas[j]) > threshold:
                alive[j] = False
    return keep


def standard_nms(dets: Sequence[Detection], threshold: float = 0.5,
                 score_floor: float = 0.05) -> List[Detection]:
    return [dets[k] for k in standard_nms_indices(dets, threshold, score_floor)]


def mask_nms(dets: Sequence[Detection], threshold: float = 0.5,
             score_floor: float = 0.05) -> List[Detection]:
    return [dets[k] for k in mask_nms_indices(dets, threshold, score_floor)]


def nms_indices(dets: Sequence[Detection], cfg: NmsConfig) -> List[int]:
    fn = standard_nms_indices if cfg.mode == STANDARD else mask_nms_indices
    return fn(dets, cfg.threshold, cfg.score_floor)


def run_nms(dets: Sequence[Detection], cfg: NmsConfig) -> List[Detection]:
    return [dets[k] for k in nms_indices(dets, cfg)]


def mask_vote(kept: Detection, suppressed: Sequence[Detection], iou_gate: float = 0.5,
              binarize_at: float = 0.5) -> Detection:
    """Score-weighted pixel average of ``kept`` and its close partners.

    Partners are the suppressed detections with mask IoU >= ``iou_gate``
    against ``kept``. A pixel survives when its weighted vote is
    >= ``binarize_at``. The result keeps ``kept.score``; if voting wipes
    the mask out, ``kept`` is returned as is.
    """
    partners = [d for d in suppressed if mask_iou(kept.mask, d.mask) >= iou_gate]
    if not partners:
        return kept
    group = [kept] + partners
    x0 = min(d.mask.x for d in group)
    y0 = min(d.mask.y for d in group)
    x1 = max(d.mask.x + d.mask.width for d in group)
    y1 = max(d.mask.y + d.mask.height for d in group)
    acc = np.zeros((y1 - y0, x1 - x0), dtype=float)
    total = 0.0
    for d in group:
        m = d.mask
        acc[m.y - y0:m.y - y0 + m.height, m.x - x0:m.x - x0 + m.width] += d.score * m.bits
        total += d.score
    if total <= 0:
        return kept
    voted = BitMask(x0, y0, acc / total >= binarize_at).cropped()
    if voted.area == 0:
        return kept
    if voted == kept.mask:
        return kept
    return replace(kept, mask=voted)


def nms_with_voting(dets: Sequence[Detection], cfg: NmsConfig, iou_gate: float = 0.5,
                    binarize_at: float = 0.5) -> List[Detection]:
    """Suppress, then vote each survivor's mask with the suppressed pool."""
    keep = nms_indices(dets, cfg)
    kept_set = set(keep)
    pool = [d for k, d in enumerate(dets) if k not in kept_set]
    return [mask_vote(dets[k], pool, iou_gate, binarize_at) for k in keep]
