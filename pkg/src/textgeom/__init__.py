"""Geometry, suppression and evaluation core for multi-oriented text detection.

Masks and quadrilaterals come from :mod:`textgeom.geom`, Mask-NMS and
box NMS from :mod:`textgeom.nms`, ICDAR-style scoring from
:mod:`textgeom.evaluation`.
"""
from .errors import (CapacityError, EmptyMaskError, FormatError, InvalidBoxError,
                     InvalidGeometryError, ParseError, TextGeomError)
from .geom import (AABox, BitMask, Point, Quad, RotatedRect, box_iou, mask_area,
                   mask_bounding_box, mask_intersection_area, mask_iou, min_area_quad,
                   rasterize_quad, rotated_rect_to_quad)
from .nms import Detection, NmsConfig, mask_nms, mask_vote, mmi, run_nms, standard_nms
from .evaluation import EvalConfig, EvalResult, corpus_metrics, match_instances

__version__ = "0.1.0"

__all__ = [
    "AABox", "BitMask", "CapacityError", "Detection", "EmptyMaskError", "EvalConfig",
    "EvalResult", "FormatError", "InvalidBoxError", "InvalidGeometryError", "NmsConfig",
    "ParseError", "Point", "Quad", "RotatedRect", "TextGeomError", "box_iou",
    "corpus_metrics", "mask_area", "mask_bounding_box", "mask_intersection_area",
    "mask_iou", "mask_nms", "mask_vote", "match_instances", "min_area_quad", "mmi",
    "rasterize_quad", "rotated_rect_to_quad", "run_nms", "standard_nms",
]
