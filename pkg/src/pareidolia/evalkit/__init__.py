from .annotations import (
    ATTRIBUTES,
    AnnotatedBox,
    AnnotationRecord,
    DetectionRecord,
    StatsReport,
    compare_to_reference,
    dataset_stats,
    load_annotations,
    load_detections,
)
from .ap import EmptyGroundTruthWarning, average_precision, match_detections, subset_ignore
from .boxes import Box, iou
from .faces import AverageFace, average_face, hist_equalize, resize_crop

__all__ = [
    "ATTRIBUTES", "AnnotatedBox", "AnnotationRecord", "AverageFace", "Box",
    "DetectionRecord", "EmptyGroundTruthWarning", "StatsReport", "average_face",
    "average_precision", "compare_to_reference", "dataset_stats", "hist_equalize",
    "iou", "load_annotations", "load_detections", "match_detections",
    "resize_crop", "subset_ignore",
]
