"""JSON-lines schema for face annotations and detections, and dataset statistics.

Annotation lines look like::

    {"image_id": "img_0001",
     "boxes": [{"x_min": 10, "y_min": 12, "x_max": 80, "y_max": 90,
                "attributes": {"difficulty": "hard", "emotion": "happy", ...}}]}

Detection lines carry ``image_id``, the four box coordinates and ``score``.
"""

import json
from collections import Counter
from dataclasses import dataclass, field

from .._errors import IngestionError, ParameterError
from .boxes import Box

ATTRIBUTES = {
    "difficulty": ("easy", "medium", "hard"),
    "emotion": ("neutral", "happy", "sad", "surprised", "angry", "disgusted", "scared", "other"),
    "origin": ("accident", "design"),
    "resemblance": ("human-baby", "human-child", "human-adult", "human-older",
                    "alien", "animal", "cartoon", "robot", "other"),
    "gender": ("neutral", "female", "male"),
    "amusing": ("no", "somewhat", "yes"),
    "commonness": ("uncommon", "somewhat", "common"),
}

# Headline per-face shares reported for the released annotation set.
REFERENCE_SHARES = {
    ("emotion", "happy"): 0.31,
    ("origin", "accident"): 0.47,
    ("difficulty", "hard"): 0.31,
    ("gender", "male"): 0.16,
    ("gender", "female"): 0.03,
}


@dataclass(frozen=True)
class AnnotatedBox:
    box: Box
    attributes: dict = field(default_factory=dict)


@dataclass(frozen=True)
class AnnotationRecord:
    image_id: str
    boxes: tuple = ()


@dataclass(frozen=True)
class DetectionRecord:
    image_id: str
    box: Box
    score: float

    def __post_init__(self):
        if not 0 <= self.score <= 1:
            raise ParameterError(f"score {self.score!r} outside [0, 1]")


def validate_attributes(attrs, record_id):
    for name, value in attrs.items():
        if name not in ATTRIBUTES:
            raise IngestionError(f"unknown attribute {name!r}", record_id)
        if value not in ATTRIBUTES[name]:
            raise IngestionError(f"unknown {name} value {value!r}", record_id)


def _parse_box(obj, record_id):
    try:
        return Box(float(obj["x_min"]), float(obj["y_min"]), float(obj["x_max"]), float(obj["y_max"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise IngestionError(f"bad box: {exc}", record_id) from None


def parse_annotation(obj):
    if "image_id" not in obj:
        raise IngestionError("missing image_id")
    rid = str(obj["image_id"])
    boxes = []
    for b in obj.get("boxes", []):
        attrs = dict(b.get("attributes", {}))
        validate_attributes(attrs, rid)
        boxes.append(AnnotatedBox(_parse_box(b, rid), attrs))
    return AnnotationRecord(rid, tuple(boxes))


def parse_detection(obj):
    if "image_id" not in obj:
        raise IngestionError("missing image_id")
    rid = str(obj["image_id"])
    try:
        return DetectionRecord(rid, _parse_box(obj, rid), float(obj["score"]))
    except (KeyError, ValueError) as exc:
        raise IngestionError(f"bad detection: {exc}", rid) from None


def _read_jsonl(path, parse):
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise IngestionError(f"line {lineno}: {exc.msg}") from None
            out.append(parse(obj))
    return out


def load_annotations(path):
    return _read_jsonl(path, parse_annotation)


def load_detections(path):
    return _read_jsonl(path, parse_detection)


def annotation_to_dict(rec):
    return {
        "image_id": rec.image_id,
        "boxes": [
            {"x_min": b.box.x_min, "y_min": b.box.y_min, "x_max": b.box.x_max,
             "y_max": b.box.y_max, "attributes": dict(b.attributes)}
            for b in rec.boxes
        ],
    }


def detection_to_dict(det):
    b = det.box
    return {"image_id": det.image_id, "x_min": b.x_min, "y_min": b.y_min,
            "x_max": b.x_max, "y_max": b.y_max, "score": det.score}


def dumps_jsonl(records, to_dict):
    return "".join(json.dumps(to_dict(r), sort_keys=True) + "\n" for r in records)


@dataclass(frozen=True)
class StatsReport:
    n_images: int
    n_faces: int
    per_face: dict  # attribute -> value -> (count, fraction of faces with that attribute)
    per_image: dict  # attribute -> value -> (count, fraction of images with >= 1 such face)
    boxes_per_image: dict  # n boxes -> image count

    def to_dict(self):
        def table(t):
            return {a: {v: {"count": c, "fraction": f} for v, (c, f) in vals.items()}
                    for a, vals in t.items()}
        return {
            "n_images": self.n_images,
            "n_faces": self.n_faces,
            "per_face": table(self.per_face),
            "per_image": table(self.per_image),
            "boxes_per_image": {str(k): v for k, v in sorted(self.boxes_per_image.items())},
        }


def dataset_stats(annotations):
    """Per-attribute value counts and shares over faces and over images.

    Face shares use the faces that carry the attribute as denominator, so
    they sum to one for every attribute present. Image shares count images
    with at least one face of that value and need not sum to one.
    """
    if not annotations:
        raise ParameterError("no annotations")
    face_counts = {a: Counter() for a in ATTRIBUTES}
    image_counts = {a: Counter() for a in ATTRIBUTES}
    per_image_n = Counter()
    n_faces = 0
    for rec in annotations:
        per_image_n[len(rec.boxes)] += 1
        seen = {a: set() for a in ATTRIBUTES}
        for b in rec.boxes:
            validate_attributes(b.attributes, rec.image_id)
            n_faces += 1
            for a, v in b.attributes.items():
                face_counts[a][v] += 1
                seen[a].add(v)
        for a, vals in seen.items():
            for v in vals:
                image_counts[a][v] += 1

    n_images = len(annotations)
    per_face, per_image = {}, {}
    for a, values in ATTRIBUTES.items():
        total = sum(face_counts[a].values())
        if total == 0:
            continue
        per_face[a] = {v: (face_counts[a][v], face_counts[a][v] / total) for v in values}
        per_image[a] = {v: (image_counts[a][v], image_counts[a][v] / n_images) for v in values}
    return StatsReport(n_images, n_faces, per_face, per_image, dict(per_image_n))


def compare_to_reference(report, reference=REFERENCE_SHARES):
    """``{(attribute, value): (observed, expected)}`` over per-face shares."""
    out = {}
    for (a, v), expected in reference.items():
        observed = report.per_face.get(a, {}).get(v, (0, 0.0))[1]
        out[(a, v)] = (observed, expected)
    return out
