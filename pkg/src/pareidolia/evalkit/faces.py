"""Average-face rendering and per-channel histogram equalisation."""

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .._errors import ParameterError


def hist_equalize(channel):
    """CDF mapping on 256 levels.

    ``out = round(255 * (cdf(v) - cdf_min) / (1 - cdf_min))`` with
    round-half-up, evaluated in exact integer arithmetic. A constant channel
    maps to all zeros.
    """
    ch = np.asarray(channel)
    if ch.size == 0:
        raise ParameterError("empty raster")
    if ch.dtype != np.uint8:
        raise ParameterError("hist_equalize expects an 8-bit raster")
    counts = np.cumsum(np.bincount(ch.ravel(), minlength=256)).astype(np.int64)
    n = int(ch.size)
    c_min = int(counts[int(ch.min())])
    denom = n - c_min
    if denom == 0:
        return np.zeros_like(ch)
    num = 255 * np.clip(counts - c_min, 0, None)
    lut = (2 * num + denom) // (2 * denom)
    return lut.astype(np.uint8)[ch]


def resize_crop(image, box, out_size):
    """Bilinear resample of ``box`` onto an ``out_size`` square grid.

    Pixel ``k`` covers ``[k, k + 1)``; output pixel centres are spread
    evenly over the box and sampled with edge clamping.
    """
    img = np.asarray(image, dtype=float)
    if img.ndim == 2:
        img = img[:, :, None]
    step_x = (box.x_max - box.x_min) / out_size
    step_y = (box.y_max - box.y_min) / out_size
    centres = np.arange(out_size) + 0.5
    xs = box.x_min + centres * step_x - 0.5
    ys = box.y_min + centres * step_y - 0.5
    gy, gx = np.meshgrid(ys, xs, indexing="ij")
    return np.stack(
        [ndimage.map_coordinates(img[:, :, c], [gy, gx], order=1, mode="nearest")
         for c in range(img.shape[2])],
        axis=-1,
    )


@dataclass(frozen=True, eq=False)
class AverageFace:
    raw: np.ndarray  # float, out_size x out_size x channels
    equalized: np.ndarray  # uint8, same shape

    @property
    def raw_uint8(self):
        return to_uint8(self.raw)


def to_uint8(arr):
    return np.clip(np.floor(np.asarray(arr) + 0.5), 0, 255).astype(np.uint8)


def average_face(items, out_size=128):
    """Mean of bilinearly resized crops, raw and per-channel equalised.

    ``items`` is a sequence of ``(image, box)`` pairs with images as
    ``H x W`` or ``H x W x C`` arrays on a 0..255 scale.
    """
    items = list(items)
    if not items:
        raise ParameterError("no faces to average")
    if out_size < 8:
        raise ParameterError("out_size must be >= 8")
    acc = None
    for image, box in items:
        crop = resize_crop(image, box, out_size)
        if acc is None:
            acc = np.zeros_like(crop)
        elif crop.shape != acc.shape:
            raise ParameterError("all images need the same channel count")
        acc += crop
    mean = acc / len(items)
    q = to_uint8(mean)
    eq = np.stack([hist_equalize(q[:, :, c]) for c in range(q.shape[2])], axis=-1)
    return AverageFace(mean, eq)
