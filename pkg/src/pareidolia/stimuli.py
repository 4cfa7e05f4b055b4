"""Band-limited random images with a Gaussian spectral envelope.

A white Gaussian image is transformed to Fourier space, every coefficient
is multiplied by ``exp(-(u**2 + v**2) / (2 * width**2))`` and the result is
transformed back. ``width`` (in cycles per image) sets how much fine
structure survives; expected power at radius ``f`` is proportional to
``exp(-f**2 / width**2)``.
"""

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy import fft as sfft

from ._errors import DegenerateRangeError, ParameterError
from .seeding import MASK64, child_seed, make_rng, parallel_map

# imaginary residue allowed before it is discarded, relative to signal RMS
_IMAG_TOL = 1e-9


@dataclass(frozen=True)
class NoiseSpec:
    size: int
    width: float
    seed: int = 0

    def __post_init__(self):
        if int(self.size) != self.size or self.size < 2:
            raise ParameterError(f"size must be an integer >= 2, got {self.size!r}")
        if not self.width > 0:  # also rejects NaN
            raise ParameterError(f"width must be > 0, got {self.width!r}")
        if not 0 <= int(self.seed) <= MASK64:
            raise ParameterError("seed must fit in an unsigned 64-bit integer")
        object.__setattr__(self, "size", int(self.size))
        object.__setattr__(self, "width", float(self.width))
        object.__setattr__(self, "seed", int(self.seed))


@dataclass(frozen=True, eq=False)
class NoiseImage:
    size: int
    pixels: np.ndarray
    spec: NoiseSpec


@dataclass(frozen=True, eq=False)
class PowerSpectrum:
    freqs: np.ndarray  # mean radius of the coefficients in each occupied bin
    powers: np.ndarray
    counts: np.ndarray

    @property
    def radial_bins(self):
        return list(zip(self.freqs.tolist(), self.powers.tolist()))


def signed_freqs(size):
    """Integer frequencies in FFT order, i.e. the centred grid after ifftshift."""
    return np.fft.fftfreq(size, d=1.0 / size)


def envelope(size, width):
    f = signed_freqs(size)
    r2 = f[:, None] ** 2 + f[None, :] ** 2
    if math.isinf(width):
        return np.ones_like(r2)
    return np.exp(-r2 / (2.0 * width * width))


def gen_noise(spec):
    base = make_rng(spec.seed).standard_normal((spec.size, spec.size))
    out = sfft.ifft2(sfft.fft2(base) * envelope(spec.size, spec.width))
    real = out.real
    rms = math.sqrt(float(np.mean(real * real)))
    resid = float(np.max(np.abs(out.imag)))
    if rms > 0 and resid > _IMAG_TOL * rms:
        raise ArithmeticError(f"imaginary residue {resid:.3g} exceeds tolerance")
    return NoiseImage(spec.size, np.ascontiguousarray(real), spec)


def batch_specs(spec, count):
    if count < 1:
        raise ParameterError("count must be >= 1")
    return [replace(spec, seed=child_seed(spec.seed, k)) for k in range(count)]


def gen_batch(spec, count, threads=None):
    """``count`` independent images; image ``k`` uses ``child_seed(spec.seed, k)``."""
    return parallel_map(gen_noise, batch_specs(spec, count), threads)


def radial_spectrum(img, n_bins, max_freq=None):
    """Mean ``|DFT|**2`` in equal-width radial bins over ``(0, max_freq]``.

    DC is excluded. ``max_freq`` defaults to the axis Nyquist radius
    ``size / 2``; coefficients beyond it are ignored. Empty bins are dropped
    so the returned frequencies are strictly increasing.
    """
    if int(n_bins) != n_bins or n_bins < 2:
        raise ParameterError("n_bins must be an integer >= 2")
    pixels = img.pixels if isinstance(img, NoiseImage) else np.asarray(img, dtype=float)
    size = pixels.shape[0]
    if pixels.ndim != 2 or pixels.shape[1] != size:
        raise ParameterError("radial_spectrum expects a square image")
    max_freq = size / 2 if max_freq is None else float(max_freq)
    f = signed_freqs(size)
    r = np.sqrt(f[:, None] ** 2 + f[None, :] ** 2).ravel()
    power = np.abs(sfft.fft2(pixels)).ravel() ** 2
    step = max_freq / n_bins
    idx = np.ceil(r / step).astype(np.int64) - 1  # half-open (lo, hi] bins
    keep = (r > 0) & (idx < n_bins)
    idx, r, power = idx[keep], r[keep], power[keep]
    counts = np.bincount(idx, minlength=n_bins)
    psum = np.bincount(idx, weights=power, minlength=n_bins)
    rsum = np.bincount(idx, weights=r, minlength=n_bins)
    occ = counts > 0
    return PowerSpectrum(rsum[occ] / counts[occ], psum[occ] / counts[occ], counts[occ])


def spectral_centroid(spectrum):
    """Power-weighted mean radius, weighting each bin by its total power."""
    w = spectrum.powers * spectrum.counts
    return float(np.sum(spectrum.freqs * w) / np.sum(w))


def quantize(img):
    """Affine map of ``[min, max]`` onto ``[0, 255]`` with round-half-up."""
    pixels = img.pixels if isinstance(img, NoiseImage) else np.asarray(img, dtype=float)
    lo, hi = float(pixels.min()), float(pixels.max())
    if not hi > lo:
        raise DegenerateRangeError("image has zero dynamic range")
    scaled = (pixels - lo) * (255.0 / (hi - lo))
    return np.clip(np.floor(scaled + 0.5), 0, 255).astype(np.uint8)
