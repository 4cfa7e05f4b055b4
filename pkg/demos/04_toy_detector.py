# # A template-matching face detector on noise
#
# Three cartoon faces (two dark eyes and a mouth bar) are slid over noise
# images with normalised cross-correlation. Counting detections per image
# across envelope widths traces a machine pareidolia curve.

import numpy as np

from pareidolia.montecarlo import DEFAULT_WIDTHS, default_bank, detection_curve, draw_face

face = draw_face(12)
print("the smallest template (1 = background, 0 = feature):")
for row in face:
    print("  " + "".join("#" if v < 0.5 else "." for v in row))

print(f"template scales: {[t.shape[0] for t in default_bank().templates]}")

# Twenty images per width keeps this quick; the acceptance suite uses 100.

curve = detection_curve(DEFAULT_WIDTHS, per_width=20, size=256, seed=1)
for w, m, ci in zip(curve.x, curve.y, curve.ci):
    print(f"width {w:>5g}: {m:5.2f} +/- {ci:.2f} detections per image")
print(f"busiest width: {curve.x[int(np.argmax(curve.y))]:g}")
