"""The (x, y, ci) series shared by every model and analysis, plus CSV I/O."""

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from ._errors import DataError, ParameterError


@dataclass(frozen=True)
class Curve:
    x: tuple
    y: tuple
    ci: tuple = None  # half-widths; None when the series carries no band
    x_name: str = "x"
    y_name: str = "y"
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        x = tuple(float(v) for v in self.x)
        y = tuple(float(v) for v in self.y)
        if len(x) != len(y):
            raise ParameterError("x and y differ in length")
        if any(b <= a for a, b in zip(x, x[1:])):
            raise ParameterError("curve x values must be strictly increasing")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        if self.ci is not None:
            ci = tuple(float(v) for v in self.ci)
            if len(ci) != len(x):
                raise ParameterError("ci and x differ in length")
            if any(v < 0 for v in ci):
                raise ParameterError("ci half-widths must be non-negative")
            object.__setattr__(self, "ci", ci)

    def __len__(self):
        return len(self.x)

    @property
    def has_band(self):
        return self.ci is not None and any(v > 0 for v in self.ci)

    def arrays(self):
        ci = np.zeros(len(self.x)) if self.ci is None else np.array(self.ci)
        return np.array(self.x), np.array(self.y), ci


def peak_of_curve(curve):
    """Return ``(x, y)`` at the maximal y; ties go to the smaller x."""
    if len(curve) == 0:
        raise ParameterError("empty curve")
    best = 0
    for k in range(1, len(curve)):
        # strict comparison keeps the first (smallest x) of tied maxima
        if curve.y[k] > curve.y[best]:
            best = k
    return curve.x[best], curve.y[best]


def _fmt(v):
    return format(v, ".17g")


def curve_to_csv(curve):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    header = [curve.x_name, curve.y_name]
    if curve.ci is not None:
        header.append("ci_half_width")
    w.writerow(header)
    for k in range(len(curve)):
        row = [_fmt(curve.x[k]), _fmt(curve.y[k])]
        if curve.ci is not None:
            row.append(_fmt(curve.ci[k]))
        w.writerow(row)
    return buf.getvalue()


def curve_from_csv(text):
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or len(rows[0]) not in (2, 3):
        raise DataError("curve CSV needs 2 or 3 columns")
    header, body = rows[0], [r for r in rows[1:] if r]
    try:
        cols = list(zip(*[[float(v) for v in r] for r in body])) or [(), (), ()]
    except ValueError as exc:
        raise DataError(f"non-numeric curve value: {exc}") from None
    ci = cols[2] if len(header) == 3 else None
    if any(math.isnan(v) for v in cols[0]):
        raise DataError("NaN in curve x column")
    return Curve(cols[0], cols[1], ci, x_name=header[0], y_name=header[1])
