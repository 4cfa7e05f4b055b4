"""Stochastic oracles for the closed-form models and a toy face detector.

The oracles estimate the same quantities as ``gaussian_model`` and
``feature_model`` by brute-force sampling, so agreement within a few
standard errors checks the algebra independently. Trials are processed in
fixed-size chunks, each with its own child seed, and the chunk statistics
are merged in index order: results depend only on ``(parameters, trials,
seed)``, never on the thread count.

The detector slides a bank of face schematics over an 8-bit image with
normalised cross-correlation and keeps greedy non-maximum-suppressed peaks.
Run over noise of increasing spectral width it finds the most faces at
intermediate widths.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import signal

from ._errors import ParameterError, ShapeError
from .curve import Curve
from .evalkit.boxes import Box
from .seeding import child_seed, make_rng, parallel_map
from .stimuli import NoiseSpec, batch_specs, gen_noise, quantize

MODE_CHUNK = 1 << 18
FEATURE_CHUNK = 1 << 20
NMS_IOU = 0.3
DEFAULT_THRESHOLD = 0.75
DEFAULT_WIDTHS = (0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0)


@dataclass(frozen=True)
class McEstimate:
    mean: float
    std_error: float
    trials: int
    seed: int

    def z_score(self, expected):
        if self.std_error == 0:
            return 0.0 if self.mean == expected else math.inf
        return (self.mean - expected) / self.std_error


def _chunks(trials, size):
    n_full, rest = divmod(trials, size)
    return [size] * n_full + ([rest] if rest else [])


def _merge(stats):
    """Chan et al. pairwise merge of (n, mean, M2) triples, in list order."""
    n, mean, m2 = stats[0]
    for nb, mb, m2b in stats[1:]:
        tot = n + nb
        delta = mb - mean
        mean = mean + delta * nb / tot
        m2 = m2 + m2b + delta * delta * n * nb / tot
        n = tot
    return n, mean, m2


def mc_mode_density(a, sigma, gamma, trials, seed=0, mirror=False, threads=None):
    """Estimate ``E_y[N(a; y, gamma)]`` for ``y ~ N(0, sigma)``.

    Averages the Gaussian likelihood of the target over sampled mode
    coefficients. ``mirror`` negates every sample, which maps the estimate
    at ``a`` onto the estimate at ``-a``.

    Far in the tail (``|a|`` beyond a few ``hypot(sigma, gamma)``) the mean
    is carried by rare samples, and the sample standard error understates
    the true error.
    """
    if trials < 100:
        raise ParameterError("need at least 100 trials")
    if not gamma > 0 or not sigma >= 0:
        raise ParameterError("need gamma > 0 and sigma >= 0")
    norm = 1.0 / math.sqrt(2.0 * math.pi * gamma * gamma)
    sign = -1.0 if mirror else 1.0

    def run(job):
        k, n = job
        y = sign * sigma * make_rng(child_seed(seed, k)).standard_normal(n)
        t = norm * np.exp(-np.square(a - y) / (2.0 * gamma * gamma))
        if t.min() == t.max():
            return n, float(t[0]), 0.0
        m = float(np.mean(t))
        return n, m, float(np.sum(np.square(t - m)))

    stats = parallel_map(run, enumerate(_chunks(trials, MODE_CHUNK)), threads)
    n, mean, m2 = _merge(stats)
    sd = math.sqrt(m2 / (n - 1))
    return McEstimate(mean, sd / math.sqrt(n), n, seed)


def _feature_successes(rng, n, mu, M):
    # Counts are drawn lazily: a trial that has already failed never needs
    # its remaining cells, and skipping them leaves the law unchanged.
    alive = np.arange(n)
    for i in range(M):
        for j in range(M):
            if alive.size == 0:
                return 0
            counts = rng.poisson(mu, alive.size)
            alive = alive[counts == (1 if i == j else 0)]
    return int(alive.size)


def mc_feature_detect(params, trials, seed=0, threads=None):
    """Fraction of trials whose ``M x M`` Poisson count grid matches the template.

    Cell ``(i, j)`` counts features of type ``j`` in region ``i``; a trial
    succeeds iff every diagonal cell is 1 and every off-diagonal cell is 0.
    """
    if trials < 1000:
        raise ParameterError("need at least 1000 trials")
    mu = params.lam * params.area

    def run(job):
        k, n = job
        return _feature_successes(make_rng(child_seed(seed, k)), n, mu, params.regions)

    hits = sum(parallel_map(run, enumerate(_chunks(trials, FEATURE_CHUNK)), threads))
    p = hits / trials
    return McEstimate(p, math.sqrt(p * (1.0 - p) / trials), trials, seed)


# -- toy detector -----------------------------------------------------------


@dataclass(frozen=True)
class Detection:
    box: Box
    score: float
    template: int = 0


def draw_face(size):
    """Face schematic: two dark disks and a dark bar on a light ground."""
    yy, xx = (np.mgrid[0:size, 0:size] + 0.5) / size
    img = np.ones((size, size))
    r = 0.13
    for cx in (0.3, 0.7):
        img[(xx - cx) ** 2 + (yy - 0.35) ** 2 <= r * r] = 0.0
    img[(np.abs(yy - 0.72) <= 0.07) & (np.abs(xx - 0.5) <= 0.22)] = 0.0
    return img


def _normalise(t):
    t = np.asarray(t, dtype=float)
    t = t - t.mean()
    norm = math.sqrt(float(np.sum(t * t)))
    if norm == 0:
        raise ParameterError("template has zero variance")
    return t / norm


@dataclass(frozen=True, eq=False)
class TemplateBank:
    templates: tuple

    def __post_init__(self):
        if not self.templates:
            raise ParameterError("template bank is empty")
        object.__setattr__(self, "templates", tuple(_normalise(t) for t in self.templates))


def default_bank(scales=(12, 18, 26)):
    return TemplateBank(tuple(draw_face(s) for s in scales))


def _integral(a):
    out = np.zeros((a.shape[0] + 1, a.shape[1] + 1), dtype=np.int64)
    np.cumsum(np.cumsum(a, axis=0), axis=1, out=out[1:, 1:])
    return out


def _window_sum(ii, h, w):
    return ii[h:, w:] - ii[:-h, w:] - ii[h:, :-w] + ii[:-h, :-w]


def ncc_map(img, template):
    """Normalised cross-correlation at every valid offset.

    ``template`` must already be zero-mean and unit-norm. Windows with zero
    variance have no defined correlation and come back as NaN.
    """
    h, w = template.shape
    raw = np.asarray(img)
    if h >= raw.shape[0] or w >= raw.shape[1]:
        raise ShapeError(f"template {template.shape} not smaller than image {raw.shape}")
    ints = raw.astype(np.int64)
    n = h * w
    s1 = _window_sum(_integral(ints), h, w)
    s2 = _window_sum(_integral(ints * ints), h, w)
    var_n = n * s2 - s1 * s1  # exact integer; n**2 times the window variance
    num = signal.correlate(raw.astype(float), template, mode="valid", method="fft")
    with np.errstate(divide="ignore", invalid="ignore"):
        corr = num * math.sqrt(n) / np.sqrt(var_n.astype(float))
    corr[var_n == 0] = np.nan
    return np.clip(corr, -1.0, 1.0)


def _nms(boxes, order, thresh):
    x0, y0, x1, y1 = boxes.T
    area = (x1 - x0) * (y1 - y0)
    keep = []
    remaining = order
    while remaining.size:
        i = remaining[0]
        keep.append(i)
        rest = remaining[1:]
        iw = np.minimum(x1[i], x1[rest]) - np.maximum(x0[i], x0[rest])
        ih = np.minimum(y1[i], y1[rest]) - np.maximum(y0[i], y0[rest])
        inter = np.clip(iw, 0, None) * np.clip(ih, 0, None)
        ov = inter / (area[i] + area[rest] - inter)
        remaining = rest[ov <= thresh]
    return keep


def scan_detect(img, bank, threshold=DEFAULT_THRESHOLD):
    """Template detections with score ``(corr + 1) / 2`` above ``threshold``.

    Output is sorted by descending score, then row, then column, then
    template index.
    """
    if not 0 < threshold < 1:
        raise ParameterError("threshold must lie in (0, 1)")
    img = np.asarray(img)
    if img.ndim != 2:
        raise ShapeError("scan_detect expects a single-channel raster")
    scores, ys, xs, ts, hs, ws = [], [], [], [], [], []
    for k, t in enumerate(bank.templates):
        score = (ncc_map(img, t) + 1.0) / 2.0
        yy, xx = np.nonzero(score > threshold)  # NaN compares False
        scores.append(score[yy, xx])
        ys.append(yy)
        xs.append(xx)
        ts.append(np.full(yy.size, k))
        hs.append(np.full(yy.size, t.shape[0]))
        ws.append(np.full(yy.size, t.shape[1]))
    score, y, x, t, h, w = (np.concatenate(v) for v in (scores, ys, xs, ts, hs, ws))
    if score.size == 0:
        return []
    order = np.lexsort((t, x, y, -score))
    boxes = np.stack([x, y, x + w, y + h], axis=1).astype(float)
    return [
        Detection(Box(*boxes[i]), float(score[i]), int(t[i]))
        for i in _nms(boxes, order, NMS_IOU)
    ]


def detection_curve(widths=DEFAULT_WIDTHS, per_width=100, size=256, bank=None,
                    threshold=DEFAULT_THRESHOLD, seed=0, threads=None):
    """Mean detection count per noise width with a 95% normal interval.

    Width ``j`` draws its images from ``gen_batch`` with parent seed
    ``child_seed(seed, j)``.
    """
    if per_width < 1:
        raise ParameterError("per_width must be >= 1")
    bank = bank or default_bank()

    def count(spec):
        return len(scan_detect(quantize(gen_noise(spec)), bank, threshold))

    means, cis, all_counts = [], [], []
    for j, w in enumerate(widths):
        parent = NoiseSpec(size, w, child_seed(seed, j))
        counts = np.array(parallel_map(count, batch_specs(parent, per_width), threads), dtype=float)
        all_counts.append(counts)
        means.append(float(np.mean(counts)))
        cis.append(0.0 if per_width == 1 else 1.96 * float(np.std(counts, ddof=1)) / math.sqrt(per_width))
    return Curve(widths, means, cis, x_name="width", y_name="mean_detections",
                 meta={"counts": all_counts, "threshold": threshold, "seed": seed})
