"""Command-line entry point: ``textgeom <subcommand> ...``.

Exit codes: 0 success, 1 usage error, 2 data error (missing file,
malformed input).
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
import time
from dataclasses import replace
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import anchors as anchors_mod
from . import datasets, evaluation, nms, synth
from .errors import TextGeomError
from .geom import AABox, min_area_quad, rasterize_quad

log = logging.getLogger("textgeom")

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def thread_count(requested: int) -> int:
    env = os.environ.get("TEXTGEOM_THREADS")
    if env:
        try:
            requested = int(env)
        except ValueError:
            raise UsageError(f"TEXTGEOM_THREADS must be an integer, got {env!r}") from None
    if requested < 0:
        raise UsageError("thread count must be >= 0")
    return requested or (os.cpu_count() or 1)


def _map(fn, items, threads):
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _require_file(path):
    p = Path(path)
    if not p.is_file():
        raise FileNotFoundError(f"file not found: {p}")
    return p


def _write_ppm(path: Path, mask, width=None, height=None):
    if width is None:
        img = mask.bits
    else:
        img = mask.to_image(width, height)
    h, w = img.shape
    rgb = np.repeat(img[:, :, None], 3, axis=2).astype(np.uint8) * 255
    path.write_bytes(f"P6\n{w} {h}\n255\n".encode() + rgb.tobytes())


def cmd_rasterize(args) -> int:
    records = datasets.load_gt_dir(args.input, args.gt_format)
    clip = AABox(0, 0, args.width, args.height) if args.width and args.height else None
    done = _map(lambda r: datasets.gt_to_instances(r, clip), records, args.threads)
    dump = Path(args.dump_masks) if args.dump_masks else None
    if dump:
        dump.mkdir(parents=True, exist_ok=True)
    n = 0
    with open(args.out, "w", encoding="utf-8") as fh:
        for rec in done:
            for k, inst in enumerate(rec.instances):
                if inst.mask.area == 0:
                    log.warning("%s instance %d rasterizes to an empty mask; not written", rec.image_id, k)
                    continue
                fh.write(json.dumps(datasets.instance_to_json(rec.image_id, inst)) + "\n")
                n += 1
                if dump:
                    _write_ppm(dump / f"{rec.image_id}_{k}.ppm", inst.mask)
    log.info("wrote %d instances from %d images to %s", n, len(done), args.out)
    return EXIT_OK


def cmd_nms(args) -> int:
    dets = datasets.read_detections(_require_file(args.input))
    cfg = nms.NmsConfig(args.mode, args.threshold, args.score_floor)
    groups = {}
    for d in dets:
        groups.setdefault(d.image_id, []).append(d)

    def work(image_id):
        group = groups[image_id]
        if args.vote:
            kept = nms.nms_with_voting(group, cfg, args.iou_gate, args.binarize_at)
        else:
            kept = nms.run_nms(group, cfg)
        if args.quads:
            kept = [replace(d, quad=min_area_quad(d.mask)) for d in kept]
        return kept

    results = _map(work, sorted(groups), args.threads)
    out = [d for kept in results for d in kept]
    datasets.write_detections(args.out, out)
    log.info("kept %d of %d detections", len(out), len(dets))
    return EXIT_OK


def cmd_eval(args) -> int:
    records = datasets.load_gt_dir(args.gt, args.gt_format)
    dets = datasets.read_detections(_require_file(args.det))
    cfg = evaluation.EvalConfig(args.mode, args.iou)
    records = _map(datasets.gt_to_instances, records, args.threads)
    by_image = {}
    for d in dets:
        by_image.setdefault(d.image_id, []).append(d)
    per_image = _map(lambda r: evaluation.match_instances(by_image.get(r.image_id, []), r, cfg),
                     records, args.threads)
    known = {r.image_id for r in records}
    for image_id in sorted(set(by_image) - known):
        log.warning("detections for unknown image %s counted as false positives", image_id)
        per_image.append(evaluation.EvalResult(0, len(by_image[image_id]), 0, image_id))
    total = evaluation.corpus_metrics(per_image)
    report = {"mode": cfg.mode, "iou_threshold": cfg.iou_threshold, "images": len(per_image)}
    report.update(total.as_dict())
    if args.pretty:
        text = (f"mode={cfg.mode} iou>={cfg.iou_threshold} images={len(per_image)}\n"
                f"{'precision':>10} {'recall':>10} {'hmean':>10}\n"
                f"{100 * total.precision:10.2f} {100 * total.recall:10.2f} {100 * total.hmean:10.2f}\n")
    else:
        text = json.dumps(report, indent=2) + "\n"
    if args.report:
        Path(args.report).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    if args.per_image:
        with open(args.per_image, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["image_id", "true_pos", "num_det", "num_gt", "precision", "recall", "hmean"])
            for r in per_image:
                w.writerow([r.image_id, r.true_pos, r.num_det, r.num_gt, r.precision, r.recall, r.hmean])
    return EXIT_OK


def cmd_anchors(args) -> int:
    cfg = anchors_mod.AnchorConfig(stride=args.stride) if args.stride else anchors_mod.AnchorConfig()
    grid = anchors_mod.generate_anchor_grid(args.width, args.height, cfg)
    rows, cols = anchors_mod.grid_shape(args.width, args.height, cfg.stride)
    k = cfg.per_location
    sizes = [(s, r) for s in cfg.scales for r in cfg.ratios]
    out = open(args.out, "w", encoding="utf-8") if args.out else sys.stdout
    try:
        for n, box in enumerate(grid.tolist()):
            cell, a = divmod(n, k)
            j, i = divmod(cell, cols)
            out.write(json.dumps({"row": j, "col": i, "scale": sizes[a][0], "ratio": sizes[a][1],
                                  "box": box}) + "\n")
    finally:
        if args.out:
            out.close()
    log.info("%d anchors on a %dx%d grid", len(grid), rows, cols)
    return EXIT_OK


def cmd_synth(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    all_dets = []
    for s in range(args.seed, args.seed + args.count):
        spec = synth.SceneSpec(s, args.width, args.height, args.scenario, n=args.n, jitter=args.jitter)
        record, dets = synth.generate(spec)
        (out / datasets.gt_filename(record.image_id)).write_text(
            datasets.format_icdar15_gt(record), encoding="utf-8")
        all_dets.extend(dets)
    datasets.write_detections(out / "detections.jsonl", all_dets)
    log.info("wrote %d scenes to %s", args.count, out)
    return EXIT_OK


def cmd_bench(args) -> int:
    dets = synth.gen_detection_cloud(args.n, args.seed)
    if args.op == "rasterize":
        quads = [min_area_quad(d.mask) for d in dets]
        fn, units = (lambda: [rasterize_quad(q) for q in quads]), len(quads)
    elif args.op == "nms":
        fn, units = (lambda: nms.standard_nms(dets, 0.5, 0.0)), 1
    else:
        fn, units = (lambda: nms.mask_nms(dets, 0.5, 0.0)), 1
    times = []
    for _ in range(args.repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    best = min(times)
    result = {"op": args.op, "n": args.n, "best_seconds": best, "ops_per_sec": units / best}
    print(json.dumps(result) if not args.pretty else
          f"{args.op}: n={args.n} best={1000 * best:.2f} ms  {units / best:.1f} ops/s")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--log-level", default="WARNING",
                        choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    common.add_argument("--threads", type=int, default=0, help="worker threads (0 = auto)")
    common.add_argument("--pretty", action="store_true", help="human-readable output")

    p = _Parser(prog="textgeom", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    r = sub.add_parser("rasterize", parents=[common], help="ground truth -> instance JSONL")
    r.add_argument("--gt-format", choices=[datasets.IC15, datasets.TD500], default=datasets.IC15)
    r.add_argument("--in", dest="input", required=True, help="ground-truth directory")
    r.add_argument("--out", required=True)
    r.add_argument("--width", type=int, help="clip to image width")
    r.add_argument("--height", type=int, help="clip to image height")
    r.add_argument("--dump-masks", metavar="DIR", help="write one PPM per instance mask")
    r.set_defaults(func=cmd_rasterize)

    n = sub.add_parser("nms", parents=[common], help="suppress overlapping detections")
    n.add_argument("--mode", choices=[nms.STANDARD, nms.MASK], default=nms.MASK)
    n.add_argument("--threshold", type=float, default=0.5)
    n.add_argument("--score-floor", type=float, default=0.05)
    n.add_argument("--vote", action=argparse.BooleanOptionalAction, default=False,
                   help="mask voting after suppression")
    n.add_argument("--iou-gate", type=float, default=0.5)
    n.add_argument("--binarize-at", type=float, default=0.5)
    n.add_argument("--quads", action=argparse.BooleanOptionalAction, default=True,
                   help="fit a minimum-area quad to every kept mask")
    n.add_argument("--in", dest="input", required=True)
    n.add_argument("--out", required=True)
    n.set_defaults(func=cmd_nms)

    e = sub.add_parser("eval", parents=[common], help="precision / recall / hmean")
    e.add_argument("--mode", choices=[evaluation.BOX, evaluation.MASK], default=evaluation.MASK)
    e.add_argument("--iou", type=float, default=0.5)
    e.add_argument("--gt", required=True, help="ground-truth directory")
    e.add_argument("--gt-format", choices=[datasets.IC15, datasets.TD500], default=datasets.IC15)
    e.add_argument("--det", required=True, help="detection JSONL")
    e.add_argument("--report", help="report file (stdout if omitted)")
    e.add_argument("--per-image", metavar="CSV")
    e.set_defaults(func=cmd_eval)

    a = sub.add_parser("anchors", parents=[common], help="dump the anchor grid as JSON lines")
    a.add_argument("--width", type=int, required=True)
    a.add_argument("--height", type=int, required=True)
    a.add_argument("--stride", type=int)
    a.add_argument("--out")
    a.set_defaults(func=cmd_anchors)

    s = sub.add_parser("synth", parents=[common], help="write synthetic gt + detections")
    s.add_argument("--scenario", choices=list(synth.SCENARIOS), default=synth.RANDOM)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--count", type=int, default=1, help="scenes, seeds seed..seed+count-1")
    s.add_argument("--n", type=int, default=10, help="instances per random scene")
    s.add_argument("--jitter", type=float, default=0.0)
    s.add_argument("--width", type=int, default=512)
    s.add_argument("--height", type=int, default=512)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_synth)

    b = sub.add_parser("bench", parents=[common], help="throughput of core operations")
    b.add_argument("--op", choices=["nms", "mask_nms", "rasterize"], required=True)
    b.add_argument("--n", type=int, default=1000)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--repeat", type=int, default=3)
    b.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=getattr(logging, args.log_level), format="%(levelname)s %(message)s")
    try:
        args.threads = thread_count(args.threads)
        return args.func(args)
    except UsageError as exc:
        print(f"textgeom: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (FileNotFoundError, NotADirectoryError) as exc:
        print(f"textgeom: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (TextGeomError, ValueError) as exc:
        print(f"textgeom: data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
