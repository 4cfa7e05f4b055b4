# # Evaluating detectors on annotated faces
#
# Average precision under greedy IoU matching, attribute statistics, and
# an average face built from annotated boxes.

import sys
from pathlib import Path

import numpy as np

from pareidolia._io import write_image
from pareidolia.evalkit import (
    AnnotatedBox, AnnotationRecord, Box, DetectionRecord, average_face, average_precision,
    compare_to_reference, dataset_stats, subset_ignore,
)

out = Path(sys.argv[1] if len(sys.argv) > 1 else "demo_output")
out.mkdir(parents=True, exist_ok=True)

gts = [
    AnnotationRecord("kettle", (AnnotatedBox(Box(10, 10, 50, 50), {"emotion": "happy", "difficulty": "easy"}),)),
    AnnotationRecord("socket", (AnnotatedBox(Box(0, 0, 20, 20), {"emotion": "surprised", "difficulty": "hard"}),
                                AnnotatedBox(Box(30, 30, 60, 60), {"emotion": "happy", "difficulty": "hard"}))),
]
dets = [
    DetectionRecord("kettle", Box(12, 10, 50, 52), 0.9),
    DetectionRecord("socket", Box(70, 70, 90, 90), 0.8),
    DetectionRecord("socket", Box(30, 28, 61, 60), 0.6),
]
print(f"AP@0.5 = {average_precision(dets, gts):.4f}")
print(f"AP@0.5 on happy faces = {average_precision(dets, gts, ignore=subset_ignore(gts, 'emotion', 'happy')):.4f}")

for (attr, value), (seen, ref) in compare_to_reference(dataset_stats(gts)).items():
    print(f"{attr}={value}: {seen:.2f} here, {ref:.2f} in the released dataset")

# Averaging crops of random images gives mid-grey; equalisation spreads it out again.

rng = np.random.default_rng(0)
items = [(rng.integers(0, 256, (80, 80, 3)).astype(float), Box(10, 10, 70, 70)) for _ in range(25)]
face = average_face(items, 64)
write_image(out / "average_face.ppm", face.raw_uint8)
write_image(out / "average_face_eq.ppm", face.equalized)
print(f"raw mean {face.raw.mean():.1f}, equalised range {face.equalized.min()}..{face.equalized.max()}")
