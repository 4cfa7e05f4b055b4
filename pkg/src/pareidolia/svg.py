"""Dependency-free, byte-deterministic SVG line plots of a Curve."""

import math
import warnings
from xml.sax.saxutils import escape

from ._errors import ParameterError

W, H = 640, 400
LEFT, RIGHT, TOP, BOTTOM = 72, 24, 24, 56


def _ticks(lo, hi, n=5):
    if hi == lo:
        return [lo]
    return [lo + (hi - lo) * k / (n - 1) for k in range(n)]


def _fmt(v):
    return f"{v:.2f}"


def render_svg(curve, x_label=None, y_label=None, log_y=False, log_x=False, title=None):
    """Polyline plot with optional CI band (drawn iff any half-width > 0).

    With ``log_y`` the y axis shows ``log10(y)``; points that are not
    positive and finite are dropped with a warning.
    """
    if len(curve) == 0:
        raise ParameterError("cannot plot an empty curve")
    ci = curve.ci or (0.0,) * len(curve)
    pts = []
    dropped = 0
    for x, y, c in zip(curve.x, curve.y, ci):
        lo, hi = y - c, y + c
        if log_x:
            if not (x > 0 and math.isfinite(x)):
                dropped += 1
                continue
            x = math.log10(x)
        if log_y:
            if not (y > 0 and math.isfinite(y)):
                dropped += 1
                continue
            lo = math.log10(lo) if lo > 0 else math.log10(y)
            y, hi = math.log10(y), math.log10(hi)
        elif not math.isfinite(y):
            dropped += 1
            continue
        pts.append((x, y, lo, hi))
    if dropped:
        warnings.warn(f"dropped {dropped} non-plottable point(s)", stacklevel=2)
    if not pts:
        raise ParameterError("no plottable points")

    band = curve.has_band
    xs = [p[0] for p in pts]
    ylo = min(p[2] if band else p[1] for p in pts)
    yhi = max(p[3] if band else p[1] for p in pts)
    x0, x1 = min(xs), max(xs)
    if x1 == x0:
        x0, x1 = x0 - 0.5, x1 + 0.5
    if yhi == ylo:
        ylo, yhi = ylo - 0.5, yhi + 0.5
    pw, ph = W - LEFT - RIGHT, H - TOP - BOTTOM

    def sx(v):
        return LEFT + (v - x0) / (x1 - x0) * pw

    def sy(v):
        return TOP + (yhi - v) / (yhi - ylo) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" '
        f'viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="11">',
        f'<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>',
    ]
    if title:
        out.append(f'<text x="{W / 2:.2f}" y="16" text-anchor="middle">{escape(title)}</text>')
    if band:
        upper = [f"{_fmt(sx(p[0]))},{_fmt(sy(p[3]))}" for p in pts]
        lower = [f"{_fmt(sx(p[0]))},{_fmt(sy(p[2]))}" for p in reversed(pts)]
        out.append(f'<polygon class="ci" points="{" ".join(upper + lower)}" '
                   'fill="#d62728" fill-opacity="0.2" stroke="none"/>')
    out.append(f'<line x1="{LEFT}" y1="{TOP + ph}" x2="{LEFT + pw}" y2="{TOP + ph}" stroke="black"/>')
    out.append(f'<line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{TOP + ph}" stroke="black"/>')
    for t in _ticks(x0, x1):
        label = f"{10 ** t:.3g}" if log_x else f"{t:.3g}"
        out.append(f'<text x="{_fmt(sx(t))}" y="{TOP + ph + 16}" text-anchor="middle">{label}</text>')
    for t in _ticks(ylo, yhi):
        out.append(f'<text x="{LEFT - 6}" y="{_fmt(sy(t) + 4)}" text-anchor="end">{t:.3g}</text>')
    xl = x_label or curve.x_name
    yl = y_label or (f"log10 {curve.y_name}" if log_y else curve.y_name)
    out.append(f'<text x="{LEFT + pw / 2:.2f}" y="{H - 12}" text-anchor="middle">{escape(xl)}</text>')
    out.append(f'<text x="16" y="{TOP + ph / 2:.2f}" text-anchor="middle" '
               f'transform="rotate(-90 16 {TOP + ph / 2:.2f})">{escape(yl)}</text>')
    line = " ".join(f"{_fmt(sx(p[0]))},{_fmt(sy(p[1]))}" for p in pts)
    out.append(f'<polyline points="{line}" fill="none" stroke="#d62728" stroke-width="2"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
