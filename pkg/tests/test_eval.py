import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from textgeom.datasets import GtInstance, ImageRecord, gt_to_instances, parse_icdar15_gt
from textgeom.evaluation import (BOX, MASK, EvalConfig, EvalResult, corpus_metrics,
                                 evaluate_corpus, hmean, match_instances)
from textgeom.geom import BitMask, Quad
from textgeom.nms import Detection
from textgeom.synth import RANDOM, SceneSpec, generate

from helpers import det, full_mask


def _square(x, y, s=10, dont_care=False):
    return GtInstance(Quad(((x, y), (x + s, y), (x + s, y + s), (x, y + s))), dont_care)


def _gt_dets(record, score=0.9):
    rec = gt_to_instances(record)
    return [Detection(rec.image_id, score, g.mask) for g in rec.instances if not g.dont_care]


def test_hmean_closed_form():
    assert hmean(0.5, 0.5) == 0.5
    assert hmean(0.0, 0.0) == 0.0
    assert hmean(1.0, 0.0) == 0.0
    assert hmean(0.886, 0.800) == pytest.approx(2 * 0.886 * 0.8 / 1.686)


def test_hmean_of_rounded_inputs_can_miss_by_one_digit():
    # 84.7 / 78.0 are themselves rounded; the true pair lies in a 0.1-wide box
    assert round(100 * hmean(0.847, 0.780), 1) == 81.2
    corners = [100 * hmean(p, r) for p in (0.8465, 0.8475) for r in (0.7795, 0.7805)]
    assert min(corners) < 81.25 < max(corners)


def test_empty_result_is_zero():
    r = EvalResult(0, 0, 0)
    assert (r.precision, r.recall, r.hmean) == (0.0, 0.0, 0.0)


@pytest.mark.parametrize("mode", [BOX, MASK])
def test_exact_detections_score_one(mode):
    rec = ImageRecord("a", instances=[_square(0, 0), _square(30, 5), _square(60, 40, 20)])
    r = match_instances(_gt_dets(rec), rec, EvalConfig(mode))
    assert (r.precision, r.recall, r.hmean) == (1.0, 1.0, 1.0)


def test_no_detections():
    rec = ImageRecord("a", instances=[_square(0, 0)])
    r = match_instances([], rec)
    assert (r.true_pos, r.num_det, r.num_gt) == (0, 0, 1)
    assert (r.precision, r.recall, r.hmean) == (0.0, 0.0, 0.0)


def test_detection_on_dont_care_is_ignored():
    rec = ImageRecord("a", instances=[_square(0, 0, dont_care=True)])
    r = match_instances([det(full_mask(0, 0, 10, 10), 0.9, "a")], rec)
    assert (r.true_pos, r.num_det, r.num_gt) == (0, 0, 0)


def test_weak_overlap_with_dont_care_is_false_positive():
    rec = ImageRecord("a", instances=[_square(0, 0, dont_care=True), _square(50, 0)])
    dets = [det(full_mask(7, 0, 10, 10), 0.9, "a"), det(full_mask(50, 0, 10, 10), 0.8, "a")]
    r = match_instances(dets, rec)
    assert (r.true_pos, r.num_det, r.num_gt) == (1, 2, 1)


def test_duplicates_give_one_true_positive():
    rec = ImageRecord("a", instances=[_square(0, 0)])
    dets = [det(full_mask(0, 0, 10, 10), s, "a") for s in (0.9, 0.8, 0.7)]
    r = match_instances(dets, rec)
    assert (r.true_pos, r.num_det, r.num_gt) == (1, 3, 1)


def test_higher_score_claims_gt_first():
    rec = ImageRecord("a", instances=[_square(0, 0)])
    near = det(full_mask(1, 0, 10, 10), 0.5, "a")   # IoU 9/11
    exact = det(full_mask(0, 0, 10, 10), 0.4, "a")
    r = match_instances([exact, near], rec)
    assert r.true_pos == 1 and r.num_det == 2


def test_threshold_boundary_is_inclusive():
    rec = ImageRecord("a", instances=[_square(0, 0)])
    d = det(full_mask(0, 0, 10, 20), 0.9, "a")  # IoU exactly 0.5
    assert match_instances([d], rec, EvalConfig(MASK, 0.5)).true_pos == 1
    assert match_instances([d], rec, EvalConfig(MASK, 0.51)).true_pos == 0


def test_box_and_mask_modes_differ():
    # L-shaped detection whose box matches the gt exactly but whose mask is small
    bits = full_mask(0, 0, 10, 10).to_image(10, 10)
    bits[1:, 1:] = False
    rec = ImageRecord("a", instances=[_square(0, 0)])
    d = det(BitMask(0, 0, bits), 0.9, "a")
    assert match_instances([d], rec, EvalConfig(BOX)).true_pos == 1
    assert match_instances([d], rec, EvalConfig(MASK)).true_pos == 0


def test_invalid_config():
    with pytest.raises(ValueError):
        EvalConfig("polygon")
    with pytest.raises(ValueError):
        EvalConfig(MASK, 0.0)


def test_evaluate_corpus_micro_average_and_unknown_images():
    r1 = ImageRecord("a", instances=[_square(0, 0), _square(30, 0)])
    r2 = ImageRecord("b", instances=[_square(0, 0)])
    dets = [det(full_mask(0, 0, 10, 10), 0.9, "a"), det(full_mask(0, 0, 10, 10), 0.9, "b"),
            det(full_mask(0, 0, 10, 10), 0.9, "zzz")]
    total, per = evaluate_corpus(dets, [r1, r2])
    assert [p.image_id for p in per] == ["a", "b", "zzz"]
    assert (total.true_pos, total.num_det, total.num_gt) == (2, 3, 3)


def _random_corpus(seed, n_images=4):
    rng = random.Random(seed)
    records, dets = [], []
    for k in range(n_images):
        insts = [_square(rng.randint(0, 80), rng.randint(0, 80), rng.randint(4, 20),
                         rng.random() < 0.15) for _ in range(rng.randint(0, 5))]
        rec = ImageRecord(f"im{k}", instances=insts)
        records.append(rec)
        for _ in range(rng.randint(0, 6)):
            x, y, s = rng.randint(0, 80), rng.randint(0, 80), rng.randint(4, 20)
            dets.append(det(full_mask(x, y, s, s), rng.random(), rec.image_id))
        for g in gt_to_instances(rec).instances:
            if rng.random() < 0.5:
                dets.append(Detection(rec.image_id, rng.random(), g.mask))
    return records, dets


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_corpus_properties(seed):
    records, dets = _random_corpus(seed)
    total, per = evaluate_corpus(dets, records)
    for r in per:
        assert r.true_pos <= min(r.num_det, r.num_gt)
    shuffled = list(records)
    random.Random(seed).shuffle(shuffled)
    again, _ = evaluate_corpus(list(reversed(dets)), shuffled)
    assert (again.true_pos, again.num_det, again.num_gt) == (total.true_pos, total.num_det, total.num_gt)
    assert corpus_metrics(per) == total


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10 ** 6), st.floats(0.1, 0.85), st.floats(0.01, 0.15))
def test_raising_threshold_never_adds_true_positives(seed, thr, delta):
    records, dets = _random_corpus(seed)
    lo, _ = evaluate_corpus(dets, records, EvalConfig(MASK, thr))
    hi, _ = evaluate_corpus(dets, records, EvalConfig(MASK, thr + delta))
    assert hi.true_pos <= lo.true_pos


@pytest.mark.parametrize("seed", range(5))
def test_rasterized_gt_as_detections_scores_one(seed):
    record, _ = generate(SceneSpec(seed=seed, scenario=RANDOM, n=8, jitter=1.5))
    dets = _gt_dets(record)
    r = match_instances(dets, record, EvalConfig(MASK))
    assert r.hmean == 1.0


def test_parsed_gt_accepted_directly():
    rec = parse_icdar15_gt("0,0,10,0,10,10,0,10,a\n20,0,30,0,30,10,20,10,###\n", "p")
    r = match_instances([det(full_mask(0, 0, 10, 10), 0.9, "p")], rec.instances)
    assert (r.true_pos, r.num_det, r.num_gt) == (1, 1, 1)
