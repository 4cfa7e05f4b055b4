import warnings
from collections import Counter, defaultdict
from fractions import Fraction

import numpy as np

from .._errors import DataError, ParameterError
from .boxes import iou


class EmptyGroundTruthWarning(UserWarning):
    pass


def match_detections(dets, gts, iou_thresh=0.5, ignore=None):
    """Greedy matching in descending-score order.

    Each detection takes the still-unmatched ground-truth box of highest IoU
    (at least ``iou_thresh``) in its own image; ties go to the earlier box.
    Returns ``(order, outcome)`` where ``outcome[k]`` is ``True`` (hit),
    ``False`` (miss) or ``None`` (matched a box flagged in ``ignore``, which
    counts as neither).

    ``ignore`` maps ``(image_id, box_index)`` to ``True`` for boxes outside
    the evaluated subset.
    """
    if not 0 < iou_thresh < 1:
        raise ParameterError("iou_thresh must lie in (0, 1)")
    ignore = ignore or {}
    by_image = defaultdict(list)
    for rec in gts:
        for k, b in enumerate(rec.boxes):
            by_image[rec.image_id].append((k, b.box))
    taken = set()
    order = sorted(range(len(dets)), key=lambda k: -dets[k].score)  # stable
    outcome = []
    for k in order:
        d = dets[k]
        best, best_iou = None, iou_thresh
        for idx, box in by_image.get(d.image_id, ()):
            key = (d.image_id, idx)
            if key in taken:
                continue
            ov = iou(d.box, box)
            if ov > best_iou or (ov == best_iou and best is None):
                best, best_iou = key, ov
        if best is None:
            outcome.append(False)
        else:
            taken.add(best)
            outcome.append(None if ignore.get(best) else True)
    return order, outcome


def precision_recall(outcome, n_pos):
    hits = np.array([o for o in outcome if o is not None], dtype=bool)
    tp = np.cumsum(hits)
    fp = np.cumsum(~hits)
    precision = tp / np.maximum(tp + fp, 1)
    recall = tp / n_pos
    return precision, recall


def average_precision(dets, gts, iou_thresh=0.5, ignore=None):
    """All-points interpolated AP over one global confidence sweep.

    With no (non-ignored) ground truth the result is 0.0 and an
    ``EmptyGroundTruthWarning`` is issued; with no detections either, AP is
    undefined and ``DataError`` is raised.
    """
    ignore = ignore or {}
    n_pos = sum(1 for rec in gts for k in range(len(rec.boxes)) if not ignore.get((rec.image_id, k)))
    if n_pos == 0:
        if not dets:
            raise DataError("AP undefined: no ground truth and no detections")
        warnings.warn("no ground-truth boxes; AP is 0", EmptyGroundTruthWarning, stacklevel=2)
        return 0.0
    _, outcome = match_detections(dets, gts, iou_thresh, ignore)
    hits = [o for o in outcome if o is not None]
    # precision envelope in integers: (tp, rank) of the best precision at
    # this rank or any later one, compared by cross-multiplication
    envelope = [None] * len(hits)
    best, tp = None, sum(hits)
    for k in range(len(hits), 0, -1):
        if best is None or tp * best[1] > best[0] * k:
            best = (tp, k)
        envelope[k - 1] = best
        tp -= hits[k - 1]
    # each hit lifts recall by 1 / n_pos; sum in rationals, round once
    runs = Counter(envelope[k] for k in range(len(hits)) if hits[k])
    total = sum((Fraction(t, k) * n for (t, k), n in runs.items()), Fraction(0))
    return float(total / n_pos)


def subset_ignore(gts, attribute, value):
    """Ignore flags that restrict evaluation to boxes with ``attribute == value``."""
    return {
        (rec.image_id, k): b.attributes.get(attribute) != value
        for rec in gts
        for k, b in enumerate(rec.boxes)
    }
