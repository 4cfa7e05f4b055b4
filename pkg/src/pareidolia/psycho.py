"""Face-count psychophysics: trial logs, cleaning, curves and the model fit.

Trial logs are CSV files with the header::

    subject_id,group,gender,width_level,image_index,repetition,response,rt_ms

``response`` is the number of faces reported (0-9, where 9 means "nine or
more") and ``rt_ms`` the response time in milliseconds.
"""

import csv
import math
import warnings
from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np

from ._errors import DataError, IngestionError, ParameterError
from .curve import Curve
from .gaussian_model import GaussianModelConfig, curve_for_config
from .seeding import make_rng

FIELDS = ("subject_id", "group", "gender", "width_level", "image_index",
          "repetition", "response", "rt_ms")
GENDERS = ("female", "male")
MIN_RT_MS = 100.0
MAX_RT_MS = 120_000.0
DESIGN_WIDTHS = (0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0)
Z95 = 1.96


@dataclass(frozen=True)
class TrialRecord:
    subject_id: str
    group: str
    gender: str
    width_level: float
    image_index: int
    repetition: int
    response: int
    rt_ms: float

    def __post_init__(self):
        if not 0 <= self.response <= 9:
            raise ParameterError(f"response {self.response} outside 0..9")
        if not self.rt_ms > 0:
            raise ParameterError(f"rt_ms must be > 0, got {self.rt_ms}")
        if not self.width_level > 0:
            raise ParameterError("width_level must be > 0")
        if self.gender is not None and self.gender not in GENDERS:
            raise ParameterError(f"unknown gender {self.gender!r}")


def read_trials(path):
    out = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        missing = set(FIELDS) - set(reader.fieldnames or ())
        if missing:
            raise IngestionError(f"trial CSV lacks columns {sorted(missing)}")
        for lineno, row in enumerate(reader, 2):
            try:
                out.append(TrialRecord(
                    row["subject_id"], row["group"], row["gender"] or None,
                    float(row["width_level"]), int(row["image_index"]),
                    int(row["repetition"]), int(row["response"]), float(row["rt_ms"]),
                ))
            except (TypeError, ValueError) as exc:
                raise IngestionError(str(exc), f"line {lineno}") from None
    return out


def write_trials(trials, fh):
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(FIELDS)
    for t in trials:
        w.writerow([t.subject_id, t.group, t.gender or "", repr(t.width_level),
                    t.image_index, t.repetition, t.response, repr(t.rt_ms)])


def clean_trials(trials):
    """Split trials into kept and ``(trial, reason)`` dropped lists.

    Responses faster than 100 ms are slips; slower than two minutes mean the
    subject took a break. Both cuts are strict, so exactly 100 ms and
    exactly 120 s are kept.
    """
    kept, dropped = [], []
    for t in trials:
        if t.rt_ms < MIN_RT_MS:
            dropped.append((t, "too-fast"))
        elif t.rt_ms > MAX_RT_MS:
            dropped.append((t, "break"))
        else:
            kept.append(t)
    return kept, dropped


def _subject_means(trials, value):
    """``{subject: {width: (mean, n_trials)}}``; repetitions averaged first."""
    cells = defaultdict(list)
    for t in trials:
        cells[(t.subject_id, t.width_level, t.image_index)].append(value(t))
    per_width = defaultdict(lambda: defaultdict(list))
    counts = defaultdict(lambda: defaultdict(int))
    for (s, w, _), vals in cells.items():
        per_width[s][w].append(float(np.mean(vals)))
        counts[s][w] += len(vals)
    return {s: {w: (float(np.mean(v)), counts[s][w]) for w, v in ws.items()}
            for s, ws in per_width.items()}


def _expected_widths(widths, present):
    if widths is None:
        return sorted(present)
    missing = [w for w in widths if w not in present]
    if missing:
        warnings.warn(f"no trials at widths {missing}; excluded", stacklevel=3)
    return [w for w in sorted(widths) if w in present]


def _population(means, widths, band):
    xs, ys, cis, ns = [], [], [], []
    for w in widths:
        vals = np.array([m[w][0] for m in means.values() if w in m])
        sd = float(np.std(vals, ddof=1)) if vals.size > 1 else 0.0
        xs.append(w)
        ys.append(float(np.mean(vals)))
        cis.append(Z95 * sd / math.sqrt(vals.size) if band == "ci95" else sd)
        ns.append(int(vals.size))
    return xs, ys, cis, ns


def aggregate_curve(trials, level="population", band="ci95", widths=None):
    """Mean face count per width.

    ``level="subject"`` returns ``{subject_id: Curve}`` of per-subject means.
    ``level="population"`` averages the subject means, so a subject with
    more trials does not weigh more; the band is a 95% normal interval
    (``band="ci95"``) or one standard deviation (``band="sd"``) of the
    subject means.
    """
    return _aggregate(trials, lambda t: t.response, level, band, widths, "mean_response")


def _aggregate(trials, value, level, band, widths, y_name):
    if not trials:
        raise DataError("no trials")
    if band not in ("ci95", "sd"):
        raise ParameterError("band must be 'ci95' or 'sd'")
    means = _subject_means(trials, value)
    present = {w for m in means.values() for w in m}
    grid = _expected_widths(widths, present)
    if level == "subject":
        return {
            s: Curve([w for w in grid if w in m], [m[w][0] for w in grid if w in m],
                     x_name="width", y_name=y_name,
                     meta={"n_trials": [m[w][1] for w in grid if w in m]})
            for s, m in sorted(means.items())
        }
    if level != "population":
        raise ParameterError("level must be 'subject' or 'population'")
    xs, ys, cis, ns = _population(means, grid, band)
    return Curve(xs, ys, cis, x_name="width", y_name=y_name, meta={"n_subjects": ns})


def rt_curve(trials, band="sd", widths=None):
    """Mean response time per width with a one-standard-deviation band."""
    return _aggregate(trials, lambda t: t.rt_ms, "population", band, widths, "mean_rt_ms")


@dataclass(frozen=True)
class GroupComparison:
    curves: dict
    differences: list  # (width, level_a, level_b, abs_diff, pooled_sd)
    flagged: list = field(default_factory=list)  # levels with < 2 subjects


def compare_groups(trials, factor="group", band="sd"):
    """Population curves per level of ``factor`` and pairwise differences.

    Descriptive only: the absolute difference of means and the pooled
    standard deviation of subject means at each shared width.
    """
    if factor not in ("group", "gender"):
        raise ParameterError("factor must be 'group' or 'gender'")
    split = defaultdict(list)
    for t in trials:
        level = getattr(t, factor)
        if level is None:
            continue
        split[level].append(t)
    if not split:
        raise DataError(f"no trials carry a {factor}")
    curves, stats, flagged = {}, {}, []
    for level in sorted(split):
        means = _subject_means(split[level], lambda t: t.response)
        if len(means) < 2:
            flagged.append(level)
        widths = sorted({w for m in means.values() for w in m})
        curves[level] = Curve(*_population(means, widths, band)[:3], x_name="width",
                              y_name="mean_response")
        stats[level] = {w: np.array([m[w][0] for m in means.values() if w in m]) for w in widths}
    diffs = []
    levels = sorted(split)
    for i, a in enumerate(levels):
        for b in levels[i + 1:]:
            for w in sorted(set(stats[a]) & set(stats[b])):
                va, vb = stats[a][w], stats[b][w]
                dof = va.size + vb.size - 2
                ss = float(np.sum((va - va.mean()) ** 2) + np.sum((vb - vb.mean()) ** 2))
                pooled = math.sqrt(ss / dof) if dof > 0 else 0.0
                diffs.append((w, a, b, abs(float(va.mean() - vb.mean())), pooled))
    return GroupComparison(curves, diffs, flagged)


@dataclass(frozen=True)
class FitResult:
    gamma_hat: float
    scale_hat: float
    rss: float
    grid: tuple  # (gamma, rss) for every evaluated gamma
    skipped: tuple = ()  # gammas whose predictions were all zero


def model_predictions(widths, gamma, cfg):
    return np.exp(np.array(curve_for_config(widths, cfg, gamma).y))


def fit_gaussian_model(curve, gamma_grid, cfg=None):
    """Grid search over ``gamma`` with a closed-form non-negative scale.

    For each ``gamma`` the model density ``p(w)`` is scaled by
    ``K = sum(y p) / sum(p**2)`` (clamped at 0) and the residual sum of
    squares recorded. The smallest RSS wins; ties go to the smaller gamma.
    """
    cfg = cfg or GaussianModelConfig()
    if len(curve) < 3:
        raise ParameterError("need at least 3 curve points")
    gammas = sorted(float(g) for g in gamma_grid)
    if not gammas:
        raise ParameterError("gamma grid is empty")
    y = np.array(curve.y)
    grid, skipped = [], []
    best = None
    for g in gammas:
        p = model_predictions(curve.x, g, cfg)
        denom = float(np.dot(p, p))
        if denom == 0 or not math.isfinite(denom):
            skipped.append(g)
            continue
        k = max(0.0, float(np.dot(y, p)) / denom)
        rss = float(np.sum((y - k * p) ** 2))
        grid.append((g, rss))
        if best is None or rss < best[2]:
            best = (g, k, rss)
    if best is None:
        raise DataError("every gamma in the grid gave all-zero predictions")
    return FitResult(best[0], best[1], best[2], tuple(grid), tuple(skipped))


# -- synthetic data -------------------------------------------------------------


@dataclass(frozen=True)
class Design:
    """The reference experiment: 14 subjects in two image-seed groups.

    Each subject sees ``images_per_width`` images at each width, each shown
    ``repeats`` times. ``peak_width`` sets where the planted mean face count
    is highest.
    """

    n_subjects: int = 14
    n_female: int = 6
    widths: tuple = DESIGN_WIDTHS
    images_per_width: int = 10
    repeats: int = 3
    peak_width: float = 16.0
    base: float = 0.5
    height: float = 4.0
    spread_octaves: float = 1.0
    subject_sd: float = 1.0
    trial_sd: float = 1.0
    rt_base_ms: float = 900.0
    rt_per_face_ms: float = 350.0
    rt_sd_ms: float = 300.0
    outlier_rate: float = 0.005


def planted_means(design):
    octave = np.log2(np.asarray(design.widths)) - math.log2(design.peak_width)
    return design.base + design.height * np.exp(-0.5 * (octave / design.spread_octaves) ** 2)


def synth_trials(design=None, seed=0):
    """Trials from a planted unimodal face-count curve.

    Subject ``s`` has mean ``mu_w + N(0, subject_sd)`` at width ``w``;
    each trial adds ``N(0, trial_sd)``, rounds and clips to 0..9. Response
    times grow linearly with the count. A small share of trials is made
    too fast or too slow so cleaning has something to remove.
    """
    design = design or Design()
    rng = make_rng(seed)
    mu = planted_means(design)
    trials = []
    for s in range(design.n_subjects):
        sid = f"S{s + 1:02d}"
        group = "A" if s % 2 == 0 else "B"
        gender = "female" if s < design.n_female else "male"
        subj = mu + rng.normal(0.0, design.subject_sd, mu.size)
        for wi, w in enumerate(design.widths):
            for img in range(design.images_per_width):
                for rep in range(design.repeats):
                    resp = int(np.clip(np.floor(subj[wi] + rng.normal(0.0, design.trial_sd) + 0.5), 0, 9))
                    rt = design.rt_base_ms + design.rt_per_face_ms * resp + rng.normal(0.0, design.rt_sd_ms)
                    u = rng.random()
                    if u < design.outlier_rate:
                        rt = rng.uniform(20.0, 99.0)
                    elif u < 2 * design.outlier_rate:
                        rt = rng.uniform(120_001.0, 300_000.0)
                    trials.append(TrialRecord(sid, group, gender, float(w), img, rep, resp,
                                              float(max(rt, 1.0))))
    return trials
