"""Seeded synthetic scenes with known ground truth.

Randomness comes from :class:`SplitMix64`, a fixed 64-bit generator, so a
scene is identical across platforms and implementations for the same seed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from .datasets import GtInstance, ImageRecord
from .errors import CapacityError
from .geom import (AABox, Quad, RotatedRect, box_iou, mask_bounding_box, rasterize_quad,
                   rotated_rect_corners, rotated_rect_to_quad)
from .nms import Detection, mask_nms, mmi, standard_nms

MASK64 = (1 << 64) - 1

INCLINED_PAIR = "inclined_pair"
LINE_WORD = "line_word"
RANDOM = "random"
SCENARIOS = (INCLINED_PAIR, LINE_WORD, RANDOM)


class SplitMix64:
    """SplitMix64 (Steele, Lea & Flood). ``uniform`` uses the top 53 bits."""

    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)

    def uniform(self, lo: float = 0.0, hi: float = 1.0) -> float:
        return lo + (hi - lo) * ((self.next_u64() >> 11) * (1.0 / (1 << 53)))

    def randint(self, lo: int, hi: int) -> int:
        """Integer in ``[lo, hi]`` inclusive."""
        return lo + self.next_u64() % (hi - lo + 1)


@dataclass(frozen=True)
class SceneSpec:
    seed: int = 0
    image_w: int = 512
    image_h: int = 512
    scenario: str = RANDOM
    n: int = 10
    angle_range: Tuple[float, float] = (-90.0, 90.0)  # degrees
    size_range: Tuple[float, float] = (24.0, 160.0)  # long side, px
    jitter: float = 0.0

    def __post_init__(self):
        if self.image_w <= 0 or self.image_h <= 0:
            raise ValueError("image dimensions must be positive")
        if self.scenario not in SCENARIOS:
            raise ValueError(f"unknown scenario {self.scenario!r}")

    @property
    def image_id(self) -> str:
        return f"{self.scenario}_{self.seed}"

    @property
    def clip(self) -> AABox:
        return AABox(0, 0, self.image_w, self.image_h)


def _instance(quad: Quad, clip: AABox, text: str = "text") -> GtInstance:
    mask = rasterize_quad(quad, clip)
    return GtInstance(quad, False, text, mask, mask_bounding_box(mask))


def _detection(image_id: str, inst: GtInstance, score: float) -> Detection:
    return Detection(image_id, score, inst.mask, inst.quad)


def gen_inclined_pair(spec: SceneSpec, max_tries: int = 1000):
    """Two parallel, thin, steeply inclined rectangles.

    Their masks are disjoint while their axis-aligned boxes overlap with
    IoU above 0.5, the configuration in which box-IoU NMS throws away a
    correct detection.
    """
    rng = SplitMix64(spec.seed)
    clip = spec.clip
    for _ in range(max_tries):
        angle = math.radians(rng.uniform(30.0, 60.0)) * (1 if rng.uniform() < 0.5 else -1)
        length = rng.uniform(0.4, 0.7) * min(spec.image_w, spec.image_h)
        thick = rng.uniform(max(4.0, length / 16), length / 6)
        gap = rng.uniform(2.0, 0.5 * thick)
        offset = (thick + gap) / 2
        # unit normal of the long axis
        nx, ny = -math.sin(angle), math.cos(angle)
        cx, cy = spec.image_w / 2, spec.image_h / 2
        quads = [rotated_rect_to_quad(RotatedRect((cx + s * offset * nx, cy + s * offset * ny),
                                                  length, thick, angle)) for s in (-1, 1)]
        if any(q.bounds().x_min < 0 or q.bounds().y_min < 0 or q.bounds().x_max > spec.image_w
               or q.bounds().y_max > spec.image_h for q in quads):
            continue
        gts = [_instance(q, clip) for q in quads]
        if any(g.mask.area == 0 for g in gts):
            continue
        if mmi(gts[0].mask, gts[1].mask) == 0 and box_iou(gts[0].box, gts[1].box) > 0.5:
            break
    else:
        raise CapacityError("could not place an inclined pair")
    first = 0 if rng.uniform() < 0.5 else 1
    scores = {first: 0.95, 1 - first: 0.9}
    record = ImageRecord(spec.image_id, spec.image_w, spec.image_h, gts)
    dets = [_detection(spec.image_id, g, scores[k]) for k, g in enumerate(gts)]
    assert mmi(dets[0].mask, dets[1].mask) == 0.0
    assert box_iou(dets[0].box, dets[1].box) > 0.5
    return record, dets


def gen_line_word(spec: SceneSpec, max_tries: int = 1000):
    """A line-level detection that contains two word-level detections.

    The ground truth is the two words. One word is long enough for its box
    to overlap the line box above 0.5 IoU, the other is short, so box NMS
    keeps the line and the short word while Mask-NMS keeps only the line.
    """
    rng = SplitMix64(spec.seed)
    clip = spec.clip
    for _ in range(max_tries):
        angle = math.radians(rng.uniform(-8.0, 8.0))
        length = rng.uniform(0.5, 0.8) * spec.image_w
        thick = rng.uniform(24.0, 40.0)
        margin = 1.5
        long_frac = rng.uniform(0.66, 0.72)
        short_frac = rng.uniform(0.12, 0.18)
        gap = rng.uniform(0.04, 0.08)
        cx, cy = spec.image_w / 2, spec.image_h / 2
        line = RotatedRect((cx, cy), length, thick, angle)
        ux, uy = math.cos(angle), math.sin(angle)
        inner = length - 2 * margin
        start = -inner / 2
        words = []
        for frac in (long_frac, short_frac):
            wl = frac * inner
            mid = start + wl / 2
            words.append(RotatedRect((cx + mid * ux, cy + mid * uy), wl, thick - 2 * margin, angle))
            start += wl + gap * inner
        line_q = rotated_rect_to_quad(line)
        b = line_q.bounds()
        if b.x_min < 0 or b.y_min < 0 or b.x_max > spec.image_w or b.y_max > spec.image_h:
            continue
        line_inst = _instance(line_q, clip, "line")
        word_inst = [_instance(rotated_rect_to_quad(w), clip, f"word{k}") for k, w in enumerate(words)]
        if any(w.mask.area == 0 for w in word_inst):
            continue
        contained = all(mmi(line_inst.mask, w.mask) == 1.0 for w in word_inst)
        ious = [box_iou(line_inst.box, w.box) for w in word_inst]
        if contained and ious[0] > 0.5 and ious[1] < 0.5 and box_iou(word_inst[0].box, word_inst[1].box) < 0.5:
            break
    else:
        raise CapacityError("could not place a line/word scene")
    record = ImageRecord(spec.image_id, spec.image_w, spec.image_h, word_inst)
    dets = [_detection(spec.image_id, line_inst, 0.95),
            _detection(spec.image_id, word_inst[0], 0.9),
            _detection(spec.image_id, word_inst[1], 0.85)]
    assert all(mmi(dets[0].mask, d.mask) == 1.0 for d in dets[1:])
    return record, dets


def _random_rect(rng: SplitMix64, spec: SceneSpec) -> RotatedRect:
    lo, hi = spec.size_range
    length = rng.uniform(lo, hi)
    thick = max(8.0, length / rng.uniform(1.5, 8.0))
    angle = math.radians(rng.uniform(*spec.angle_range))
    cx = rng.uniform(0, spec.image_w)
    cy = rng.uniform(0, spec.image_h)
    return RotatedRect((cx, cy), length, thick, angle)


def gen_random_scene(spec: SceneSpec, max_rejections: int = 10_000):
    """``spec.n`` well-separated rotated rectangles plus jittered detections.

    A candidate is rejected if it leaves the image or if its MMI or box IoU
    with any accepted rectangle exceeds 0.3 (MMI bounds the mask IoU from
    above). Detections move every vertex by up to ``spec.jitter`` px and
    score in [0.7, 1.0].
    """
    rng = SplitMix64(spec.seed)
    clip = spec.clip
    accepted: List[GtInstance] = []
    rejections = 0
    while len(accepted) < spec.n:
        rect = _random_rect(rng, spec)
        corners = rotated_rect_corners(rect)
        inside = (corners.min(axis=0) >= 0).all() and corners[:, 0].max() <= spec.image_w \
            and corners[:, 1].max() <= spec.image_h
        ok = inside
        if ok:
            inst = _instance(rotated_rect_to_quad(rect), clip, f"w{len(accepted)}")
            ok = inst.mask.area > 0 and all(
                box_iou(inst.box, g.box) <= 0.3 and mmi(inst.mask, g.mask) <= 0.3 for g in accepted)
        if ok:
            accepted.append(inst)
        else:
            rejections += 1
            if rejections > max_rejections:
                raise CapacityError(
                    f"placed only {len(accepted)} of {spec.n} instances after {max_rejections} rejections")
    dets = []
    for g in accepted:
        score = rng.uniform(0.7, 1.0)
        if spec.jitter > 0:
            noise = [rng.uniform(-spec.jitter, spec.jitter) for _ in range(8)]
            pts = g.quad.array + np.array(noise).reshape(4, 2)
            quad = Quad(tuple(map(tuple, pts)))
            if not quad.is_simple():
                quad = g.quad
            mask = rasterize_quad(quad, clip)
            if mask.area == 0:
                continue
            dets.append(Detection(spec.image_id, score, mask, quad))
        else:
            dets.append(_detection(spec.image_id, g, score))
    record = ImageRecord(spec.image_id, spec.image_w, spec.image_h, accepted)
    return record, dets


def generate(spec: SceneSpec):
    """Dispatch on ``spec.scenario``; returns ``(ImageRecord, detections)``."""
    if spec.scenario == INCLINED_PAIR:
        return gen_inclined_pair(spec)
    if spec.scenario == LINE_WORD:
        return gen_line_word(spec)
    return gen_random_scene(spec)


def gen_detection_cloud(n: int, seed: int = 0, image_w: int = 1500, image_h: int = 848,
                        copies: int = 5, jitter: float = 3.0):
    """``n`` overlapping detections for throughput tests: ``n / copies``
    random rotated rectangles, each repeated ``copies`` times with jitter."""
    rng = SplitMix64(seed)
    clip = AABox(0, 0, image_w, image_h)
    spec = SceneSpec(seed, image_w, image_h, RANDOM, size_range=(24.0, 200.0))
    dets = []
    while len(dets) < n:
        base = _random_rect(rng, spec)
        for _ in range(copies):
            if len(dets) >= n:
                break
            r = RotatedRect((base.center.x + rng.uniform(-jitter, jitter),
                             base.center.y + rng.uniform(-jitter, jitter)),
                            base.width, base.height, base.angle)
            mask = rasterize_quad(rotated_rect_to_quad(r), clip)
            if mask.area == 0:
                continue
            dets.append(Detection("bench", rng.uniform(0.05, 1.0), mask))
    return dets


def expected_nms_counts(record, dets, threshold: float = 0.5) -> tuple:
    """``(kept by standard NMS, kept by Mask-NMS)`` for a generated scene."""
    return len(standard_nms(dets, threshold, 0.0)), len(mask_nms(dets, threshold, 0.0))
