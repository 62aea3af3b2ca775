"""ICDAR-style detection evaluation: greedy IoU matching and P/R/Hmean."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .datasets import ImageRecord, gt_to_instances
from .geom import box_iou, mask_iou
from .nms import Detection

BOX = "box"
MASK = "mask"


@dataclass(frozen=True)
class EvalConfig:
    mode: str = MASK
    iou_threshold: float = 0.5

    def __post_init__(self):
        if self.mode not in (BOX, MASK):
            raise ValueError(f"unknown evaluation mode {self.mode!r}")
        if not 0.0 < self.iou_threshold <= 1.0:
            raise ValueError(f"iou_threshold must lie in (0, 1], got {self.iou_threshold}")


def hmean(precision: float, recall: float) -> float:
    if precision + recall == 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


@dataclass(frozen=True)
class EvalResult:
    true_pos: int
    num_det: int
    num_gt: int
    image_id: str = ""

    @property
    def precision(self) -> float:
        return self.true_pos / self.num_det if self.num_det else 0.0

    @property
    def recall(self) -> float:
        return self.true_pos / self.num_gt if self.num_gt else 0.0

    @property
    def hmean(self) -> float:
        return hmean(self.precision, self.recall)

    def as_dict(self) -> dict:
        return {
            "true_pos": self.true_pos,
            "num_det": self.num_det,
            "num_gt": self.num_gt,
            "precision": self.precision,
            "recall": self.recall,
            "hmean": self.hmean,
        }


def _overlaps(dets, gts, mode):
    iou = np.zeros((len(dets), len(gts)))
    for i, d in enumerate(dets):
        for j, g in enumerate(gts):
            if g.mask is None or g.mask.area == 0:
                continue
            if mode == MASK:
                iou[i, j] = mask_iou(d.mask, g.mask)
            else:
                iou[i, j] = box_iou(d.box, g.box)
    return iou


def match_instances(dets: Sequence[Detection], gts, cfg: EvalConfig = EvalConfig()) -> EvalResult:
    """Match one image's detections against its ground truth.

    ``gts`` is an :class:`ImageRecord` or a sequence of :class:`GtInstance`;
    missing masks are rasterized first. Detections are visited by
    descending score (stable) and each takes the best still-unmatched
    regular instance at IoU >= threshold. A detection that matches nothing
    but overlaps a don't-care instance at IoU >= threshold is not counted.
    """
    image_id = ""
    if isinstance(gts, ImageRecord):
        image_id = gts.image_id
        record = gts
    else:
        record = ImageRecord(dets[0].image_id if dets else "", instances=list(gts))
    if any(g.mask is None for g in record.instances):
        record = gt_to_instances(record)
    gts = record.instances
    if not image_id and dets:
        image_id = dets[0].image_id

    order = sorted(range(len(dets)), key=lambda k: -dets[k].score)
    dets = [dets[k] for k in order]
    care = np.array([not g.dont_care for g in gts], dtype=bool)
    iou = _overlaps(dets, gts, cfg.mode)
    thr = cfg.iou_threshold
    matched = np.zeros(len(gts), bool)
    tp = 0
    ignored = 0
    for i in range(len(dets)):
        cand = np.where(care & ~matched & (iou[i] >= thr), iou[i], -1.0)
        if cand.size and cand.max() >= thr:
            j = int(np.argmax(cand))
            matched[j] = True
            tp += 1
        elif np.any(~care & (iou[i] >= thr)):
            ignored += 1
    return EvalResult(tp, len(dets) - ignored, int(care.sum()), image_id)


def corpus_metrics(per_image: Iterable[EvalResult]) -> EvalResult:
    """Micro-average: sum the counts, then derive P, R and Hmean."""
    tp = nd = ng = 0
    for r in per_image:
        tp += r.true_pos
        nd += r.num_det
        ng += r.num_gt
    return EvalResult(tp, nd, ng, "")


def evaluate_corpus(dets: Sequence[Detection], records: Sequence[ImageRecord],
                    cfg: EvalConfig = EvalConfig()) -> tuple:
    """Group detections by image and evaluate. Returns ``(total, per_image)``.

    Detections for images absent from ``records`` all count as false
    positives.
    """
    by_image = {}
    for d in dets:
        by_image.setdefault(d.image_id, []).append(d)
    per_image = []
    known = set()
    for rec in records:
        known.add(rec.image_id)
        per_image.append(match_instances(by_image.get(rec.image_id, []), rec, cfg))
    for image_id in sorted(set(by_image) - known):
        per_image.append(EvalResult(0, len(by_image[image_id]), 0, image_id))
    return corpus_metrics(per_image), per_image
