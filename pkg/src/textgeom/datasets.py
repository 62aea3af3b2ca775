"""Ground-truth parsing, per-instance mask/box generation and detection files.

Supported ground truth:

* ICDAR 2015 (``gt_<image_id>.txt``): ``x1,y1,x2,y2,x3,y3,x4,y4,transcription``
  per line, ``###`` marking don't-care words.
* MSRA-TD500 (``<image_id>.gt``): ``index difficulty x y w h angle`` per line,
  ``(x, y)`` being the top-left corner of the unrotated rectangle and
  ``angle`` a rotation in radians about the rectangle center.

Detections are stored as JSON lines with run-length encoded masks.
"""
from __future__ import annotations

import json
import logging
import os
from dataclasses import dataclass, replace
from pathlib import Path
from typing import IO, Iterable, List, Optional, Union

import numpy as np

from .errors import FormatError, InvalidGeometryError, ParseError
from .geom import (AABox, BitMask, Quad, RotatedRect, mask_bounding_box, rasterize_quad,
                   rotated_rect_to_quad)
from .nms import Detection

log = logging.getLogger(__name__)

DONT_CARE_TEXT = "###"
IC15 = "icdar15"
TD500 = "td500"


@dataclass(frozen=True)
class GtInstance:
    quad: Quad
    dont_care: bool = False
    transcription: Optional[str] = None
    mask: Optional[BitMask] = None
    box: Optional[AABox] = None


@dataclass(frozen=True)
class ImageRecord:
    image_id: str
    width: int = 0
    height: int = 0
    instances: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "instances", tuple(self.instances))


def _lines(text: str):
    if text.startswith("\ufeff"):
        text = text[1:]
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if line:
            yield lineno, line


def parse_icdar15_gt(text: str, image_id: str, source: Optional[str] = None) -> ImageRecord:
    instances = []
    for lineno, line in _lines(text):
        parts = line.split(",", 8)
        if len(parts) < 8:
            raise ParseError(f"expected 8 coordinates, got {len(parts)} fields", lineno, source)
        try:
            coords = [float(p) for p in parts[:8]]
        except ValueError as exc:
            raise ParseError(f"non-numeric coordinate ({exc})", lineno, source) from None
        transcription = parts[8].strip() if len(parts) > 8 else None
        try:
            quad = Quad.from_flat(coords)
        except InvalidGeometryError as exc:
            raise ParseError(str(exc), lineno, source) from None
        instances.append(GtInstance(quad, transcription == DONT_CARE_TEXT, transcription))
    return ImageRecord(image_id, instances=instances)


def parse_td500_gt(text: str, image_id: str, source: Optional[str] = None) -> ImageRecord:
    instances = []
    for lineno, line in _lines(text):
        parts = line.split()
        if len(parts) != 7:
            raise ParseError(f"expected 7 fields, got {len(parts)}", lineno, source)
        try:
            int(parts[0])
            difficulty = int(parts[1])
            x, y, w, h, angle = (float(p) for p in parts[2:])
        except ValueError as exc:
            raise ParseError(f"bad numeric field ({exc})", lineno, source) from None
        try:
            rect = RotatedRect((x + w / 2, y + h / 2), w, h, angle)
        except InvalidGeometryError as exc:
            raise ParseError(str(exc), lineno, source) from None
        instances.append(GtInstance(rotated_rect_to_quad(rect), difficulty == 1))
    return ImageRecord(image_id, instances=instances)


def gt_to_instances(record: ImageRecord, clip: Optional[AABox] = None) -> ImageRecord:
    """Fill ``mask`` and ``box`` of every instance.

    Instances that rasterize to nothing (or have zero area) become
    don't-care since they can never be matched.
    """
    out = []
    for k, inst in enumerate(record.instances):
        try:
            mask = rasterize_quad(inst.quad, clip)
        except InvalidGeometryError as exc:
            raise InvalidGeometryError(f"{record.image_id} instance {k}: {exc}") from None
        if mask.area == 0 or inst.quad.area == 0:
            out.append(replace(inst, mask=mask, box=None, dont_care=True))
        else:
            out.append(replace(inst, mask=mask, box=mask_bounding_box(mask)))
    return replace(record, instances=out)


# --- run-length encoding -------------------------------------------------

def rle_encode(bits: np.ndarray) -> List[int]:
    """Row-major run lengths, alternating zeros and ones, starting with zeros."""
    flat = np.asarray(bits, dtype=bool).ravel()
    if flat.size == 0:
        return [0]
    change = np.flatnonzero(flat[1:] != flat[:-1]) + 1
    bounds = np.concatenate([[0], change, [flat.size]])
    runs = np.diff(bounds).tolist()
    if flat[0]:
        runs.insert(0, 0)
    return runs


def rle_decode(runs: List[int], width: int, height: int) -> np.ndarray:
    runs = np.asarray(runs, dtype=np.int64)
    if np.any(runs < 0):
        raise FormatError("negative run length")
    total = int(runs.sum())
    if total != width * height:
        raise FormatError(f"RLE covers {total} pixels, mask is {width}x{height}={width * height}")
    values = np.arange(runs.size) % 2 == 1
    return np.repeat(values, runs).reshape(height, width)


def mask_to_json(m: BitMask) -> dict:
    return {"x": m.x, "y": m.y, "w": m.width, "h": m.height, "rle": rle_encode(m.bits)}


def mask_from_json(obj: dict) -> BitMask:
    try:
        w, h = int(obj["w"]), int(obj["h"])
        x, y = int(obj["x"]), int(obj["y"])
        runs = obj["rle"]
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"bad mask object ({exc!r})") from None
    if w < 0 or h < 0:
        raise FormatError("negative mask size")
    return BitMask(x, y, rle_decode(runs, w, h))


def detection_to_json(d: Detection, **extra) -> dict:
    obj = {
        "image_id": d.image_id,
        "score": d.score,
        "mask": mask_to_json(d.mask),
        "quad": [list(p) for p in d.quad.vertices] if d.quad is not None else None,
    }
    obj.update(extra)
    return obj


def detection_from_json(obj: dict) -> Detection:
    try:
        image_id = str(obj["image_id"])
        score = float(obj["score"])
        mask = mask_from_json(obj["mask"])
        quad = obj.get("quad")
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, FormatError):
            raise
        raise FormatError(f"bad detection object ({exc!r})") from None
    if quad is not None:
        try:
            quad = Quad(tuple(tuple(map(float, p)) for p in quad))
        except (InvalidGeometryError, TypeError, ValueError) as exc:
            raise FormatError(f"bad quad ({exc})") from None
    try:
        return Detection(image_id, score, mask, quad)
    except ValueError as exc:
        raise FormatError(str(exc)) from None


PathOrStream = Union[str, os.PathLike, IO[str]]


def _open(target: PathOrStream, mode: str):
    if hasattr(target, "read") or hasattr(target, "write"):
        return target, False
    return open(target, mode, encoding="utf-8"), True


def write_detections(target: PathOrStream, dets: Iterable[Detection]) -> None:
    fh, owned = _open(target, "w")
    try:
        for d in dets:
            fh.write(json.dumps(detection_to_json(d)) + "\n")
    finally:
        if owned:
            fh.close()


def read_detections(source: PathOrStream) -> List[Detection]:
    """Parse a detection JSONL file. Errors carry the offending line number."""
    fh, owned = _open(source, "r")
    name = None if not owned else str(source)
    out = []
    try:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"invalid JSON ({exc.msg})", lineno, name) from None
            if not isinstance(obj, dict):
                raise ParseError("expected a JSON object", lineno, name)
            try:
                out.append(detection_from_json(obj))
            except FormatError as exc:
                raise FormatError(str(exc), lineno, name) from None
    finally:
        if owned:
            fh.close()
    return out


def io_detections(target: PathOrStream, direction: str, dets: Optional[List[Detection]] = None):
    """Read or write a detection file; returns the detections either way."""
    if direction == "read":
        return read_detections(target)
    if direction == "write":
        dets = list(dets or [])
        write_detections(target, dets)
        return dets
    raise ValueError(f"direction must be 'read' or 'write', not {direction!r}")


def instance_to_json(image_id: str, inst: GtInstance) -> dict:
    """Rasterized ground truth in the detection layout (score 1.0)."""
    return {
        "image_id": image_id,
        "score": 1.0,
        "mask": mask_to_json(inst.mask),
        "quad": [list(p) for p in inst.quad.vertices],
        "dont_care": inst.dont_care,
        "transcription": inst.transcription,
    }


# --- ground-truth files --------------------------------------------------

def format_icdar15_gt(record: ImageRecord) -> str:
    lines = []
    for inst in record.instances:
        coords = ",".join(repr(float(c)) for c in inst.quad.flat())
        text = DONT_CARE_TEXT if inst.dont_care else (inst.transcription or "text")
        lines.append(f"{coords},{text}")
    return "".join(line + "\n" for line in lines)


def gt_filename(image_id: str, fmt: str = IC15) -> str:
    return f"gt_{image_id}.txt" if fmt == IC15 else f"{image_id}.gt"


def image_id_from_filename(name: str, fmt: str = IC15) -> Optional[str]:
    if fmt == IC15:
        if name.startswith("gt_") and name.endswith(".txt"):
            return name[3:-4]
        return None
    if fmt == TD500:
        return name[:-3] if name.endswith(".gt") else None
    raise ValueError(f"unknown gt format {fmt!r}")


def load_gt_file(path: Union[str, os.PathLike], fmt: str = IC15) -> ImageRecord:
    path = Path(path)
    image_id = image_id_from_filename(path.name, fmt)
    if image_id is None:
        image_id = path.stem
    text = path.read_bytes().decode("utf-8-sig")
    parser = parse_icdar15_gt if fmt == IC15 else parse_td500_gt
    return parser(text, image_id, source=str(path))


def load_gt_dir(directory: Union[str, os.PathLike], fmt: str = IC15) -> List[ImageRecord]:
    """Parse every gt file of ``directory`` sorted by image id."""
    directory = Path(directory)
    if not directory.is_dir():
        raise FileNotFoundError(f"ground-truth directory not found: {directory}")
    records = []
    for path in sorted(directory.iterdir()):
        if path.is_file() and image_id_from_filename(path.name, fmt) is not None:
            records.append(load_gt_file(path, fmt))
    records.sort(key=lambda r: r.image_id)
    return records
