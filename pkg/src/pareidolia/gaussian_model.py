"""Gaussian mode model of pareidolia.

An image is a sum of independent modes whose coefficients are drawn from
``N(0, sigma_i)``. A face template asks for coefficient ``a_i`` at mode
``i`` and accepts an observed coefficient with Gaussian tolerance
``gamma``. Marginalising the observation gives a per-mode match density;
independent modes multiply, so the template density is a product (a sum in
log space).

Mode ``i`` (1-based) is identified with radial frequency ``i`` cycles per
image. The detection tolerance is called ``gamma`` everywhere here; it is
often written sigma elsewhere.
"""

import math
from dataclasses import dataclass

import numpy as np

from ._errors import ParameterError, ShapeError
from .curve import Curve

_LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class ModeSpectrum:
    sigmas: tuple

    def __post_init__(self):
        s = tuple(float(v) for v in self.sigmas)
        if not s:
            raise ParameterError("need at least one mode")
        if any(not v >= 0 for v in s):
            raise ParameterError("mode sigmas must be >= 0")
        object.__setattr__(self, "sigmas", s)

    def __len__(self):
        return len(self.sigmas)


@dataclass(frozen=True)
class TemplateSpectrum:
    coeffs: tuple

    def __post_init__(self):
        c = tuple(float(v) for v in self.coeffs)
        if not all(math.isfinite(v) for v in c):
            raise ParameterError("template coefficients must be finite")
        object.__setattr__(self, "coeffs", c)

    def __len__(self):
        return len(self.coeffs)


@dataclass(frozen=True)
class GaussianDetectionParams:
    gamma: float

    def __post_init__(self):
        if not self.gamma > 0:
            raise ParameterError(f"gamma must be > 0, got {self.gamma!r}")


@dataclass(frozen=True)
class GaussianModelConfig:
    """Generating process and template for width sweeps.

    The defaults give an interior peak at ``gamma=10`` and reproduce the
    shift of that peak toward larger widths as ``gamma`` shrinks.
    """

    modes: int = 64
    amplitude: float = 300.0
    s0: float = 100.0


def _check_gamma(gamma):
    if not gamma > 0:
        raise ParameterError(f"gamma must be > 0, got {gamma!r}")


def log_mode_match_density(a, sigma, gamma):
    _check_gamma(gamma)
    if np.any(np.asarray(sigma) < 0):
        raise ParameterError("sigma must be >= 0")
    var = np.square(gamma) + np.square(sigma)
    return -0.5 * (_LOG_2PI + np.log(var)) - np.square(a) / (2.0 * var)


def mode_match_density(a, sigma, gamma):
    """Density of ``N(0, sigma**2 + gamma**2)`` at ``a``.

    Works elementwise on arrays.
    """
    out = np.exp(log_mode_match_density(a, sigma, gamma))
    return float(out) if np.ndim(out) == 0 else out


def log_pareidolia_density(template, modes, params):
    """Natural log of the product of per-mode match densities."""
    if len(template) != len(modes):
        raise ShapeError(f"template has {len(template)} modes, spectrum has {len(modes)}")
    terms = log_mode_match_density(np.array(template.coeffs), np.array(modes.sigmas), params.gamma)
    return float(math.fsum(terms))


def envelope_sigma(f, width, s0):
    """Generating std of radial mode ``f`` under envelope ``width``."""
    f = np.asarray(f, dtype=float)
    if np.any(f <= 0) or not width > 0 or not s0 > 0:
        raise ParameterError("f, width and s0 must be > 0")
    out = s0 * np.exp(-np.square(f) / (2.0 * width * width))
    return float(out) if out.ndim == 0 else out


def template_one_over_f(M, amplitude=1.0):
    if int(M) != M or M < 1:
        raise ParameterError("M must be an integer >= 1")
    if not amplitude > 0:
        raise ParameterError("amplitude must be > 0")
    return TemplateSpectrum(tuple(amplitude / i for i in range(1, int(M) + 1)))


def modes_for_width(width, M, s0):
    return ModeSpectrum(tuple(envelope_sigma(np.arange(1, M + 1, dtype=float), width, s0)))


def curve_over_widths(widths, M=64, amplitude=300.0, s0=100.0, params=None):
    """Log density of a 1/f template under noise of each envelope width."""
    if params is None:
        params = GaussianDetectionParams(10.0)
    widths = [float(w) for w in widths]
    if not widths:
        raise ParameterError("widths must be non-empty")
    template = template_one_over_f(M, amplitude)
    ys = [log_pareidolia_density(template, modes_for_width(w, M, s0), params) for w in widths]
    return Curve(widths, ys, x_name="width", y_name="log_density")


def curve_for_config(widths, cfg, gamma):
    return curve_over_widths(widths, cfg.modes, cfg.amplitude, cfg.s0, GaussianDetectionParams(gamma))
