"""Multi-task loss arithmetic and hard-example selection.

These are plain numpy reference functions for checking a training
implementation, not a differentiable framework.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, fields
from typing import Sequence

import numpy as np

PROB_FLOOR = 1e-12


@dataclass(frozen=True)
class LossWeights:
    lambda_r: float = 0.2
    lambda_m: float = 2.0
    lambda_b: float = 0.2

    def __post_init__(self):
        for f in fields(self):
            if getattr(self, f.name) < 0:
                raise ValueError(f"{f.name} must be non-negative")


@dataclass(frozen=True)
class LossTerms:
    """Per-batch mean losses of the RPN (``rcls``, ``rbox``) and the
    instance head (``cls``, ``mask``, ``box``)."""

    rcls: float = 0.0
    rbox: float = 0.0
    cls: float = 0.0
    mask: float = 0.0
    box: float = 0.0

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if not math.isfinite(v) or v < 0:
                raise ValueError(f"loss term {f.name}={v} must be finite and >= 0")


def smooth_l1(x, sigma: float = 3.0):
    """``0.5 (sigma x)^2`` inside ``|x| < 1/sigma^2``, ``|x| - 0.5/sigma^2`` outside.

    Works elementwise on arrays; returns a float for scalar input.
    """
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    s2 = sigma * sigma
    x = np.asarray(x, dtype=float)
    ax = np.abs(x)
    out = np.where(ax < 1.0 / s2, 0.5 * s2 * x * x, ax - 0.5 / s2)
    return float(out) if out.ndim == 0 else out


def smooth_l1_grad(x, sigma: float = 3.0):
    s2 = sigma * sigma
    x = np.asarray(x, dtype=float)
    out = np.where(np.abs(x) < 1.0 / s2, s2 * x, np.sign(x))
    return float(out) if out.ndim == 0 else out


def cross_entropy(probs: Sequence[float], label: int) -> float:
    """Negative log-probability of ``label``; probabilities are floored at 1e-12."""
    p = np.asarray(probs, dtype=float)
    if p.ndim != 1:
        raise ValueError("probs must be a 1-D distribution")
    if not 0 <= label < p.size:
        raise IndexError(f"label {label} out of range for {p.size} classes")
    if np.any(p < 0) or np.any(p > 1) or abs(p.sum() - 1.0) > 1e-6:
        raise ValueError("probs must be a distribution summing to 1")
    return -math.log(max(p[label], PROB_FLOOR))


def mean_cross_entropy(probs: np.ndarray, labels: np.ndarray) -> float:
    """Mean of per-sample cross-entropy, e.g. over the pixels of an ROI mask.

    ``probs`` has shape ``(..., C)`` and ``labels`` the leading shape.
    """
    probs = np.asarray(probs, dtype=float)
    labels = np.asarray(labels, dtype=np.int64)
    picked = np.take_along_axis(probs, labels[..., None], axis=-1)[..., 0]
    return float(np.mean(-np.log(np.maximum(picked, PROB_FLOOR))))


def box_regression_loss(pred, target, sigma: float = 3.0) -> float:
    """Smooth-L1 summed over the 4 delta coordinates, averaged over boxes."""
    diff = np.asarray(pred, float).reshape(-1, 4) - np.asarray(target, float).reshape(-1, 4)
    if diff.shape[0] == 0:
        return 0.0
    return float(np.mean(np.sum(smooth_l1(diff, sigma), axis=1)))


def rpn_loss(t: LossTerms, w: LossWeights = LossWeights()) -> float:
    return t.rcls + w.lambda_r * t.rbox


def instance_loss(t: LossTerms, w: LossWeights = LossWeights()) -> float:
    return t.cls + w.lambda_m * t.mask + w.lambda_b * t.box


def total_loss(t: LossTerms, w: LossWeights = LossWeights()) -> float:
    return rpn_loss(t, w) + instance_loss(t, w)


def ohem_select(per_sample_loss: Sequence[float], labels: Sequence, neg_pos_ratio: float = 3.0,
                min_keep: int = 16) -> list:
    """Indices of the samples that contribute to the loss.

    Every positive is kept. Negatives are ranked by loss (ties by index)
    and the top ``ceil(ratio * n_pos)`` survive; with no positives at all
    ``min_keep`` negatives survive instead. ``labels`` holds "pos"/"neg"
    strings or booleans (True = positive). Returned indices are sorted.
    """
    loss = np.asarray(per_sample_loss, dtype=float)
    if len(labels) != loss.size:
        raise ValueError("per_sample_loss and labels must have equal length")
    pos = np.array([lab is True or lab == "pos" for lab in labels], dtype=bool)
    pos_idx = np.flatnonzero(pos)
    neg_idx = np.flatnonzero(~pos)
    n_neg = math.ceil(neg_pos_ratio * pos_idx.size) if pos_idx.size else min_keep
    ranked = neg_idx[np.lexsort((neg_idx, -loss[neg_idx]))]
    kept = np.concatenate([pos_idx, ranked[:n_neg]])
    return sorted(kept.tolist())
