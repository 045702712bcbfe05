"""Radially averaged Fourier spectra and log-log slope estimators.

Three slope variants are provided; they differ in pre-processing,
amplitude-vs-power choice and which frequencies enter the fit:

* ``slope_spehar``  — grayscale, center crop to a power-of-two square,
  amplitude spectrum, one-pass Cook's-distance outlier exclusion;
* ``slope_redies``  — grayscale, pad to square with mean gray, resize to
  1024x1024, power spectrum over 10..256 cycles/image, points averaged
  in log-spaced frequency bins (also yields the fit's mean squared
  residual, reported as the spectral "sigma");
* ``slope_mather``  — lightness channel, center crop to a power-of-two
  square, resize to 1024x1024, amplitude spectrum with the lowest and
  highest quartile of radii (by count) dropped.

Slopes are reported as positive exponents of the 1/f^alpha decay.
Fits use natural logs; the slope is log-base invariant.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np
import scipy.fft as sfft

from .errors import TooSmallError
from .raster import (
    ColorSpace,
    RasterImage,
    ResizePolicy,
    crop_center_square_pow2,
    lab_lightness,
    pad_to_square_mean_gray,
    require_square_pow2,
    resize,
    to_grayscale,
)

REDIES_BAND = (10, 256)
REDIES_BINS = 30
REDIES_SIDE = 1024
MATHER_SIDE = 1024


@dataclass(frozen=True)
class RadialSpectrum:
    """Per-integer-radius means of the 2-D spectrum, DC excluded."""

    radii: np.ndarray  # int, 1..side/2, strictly increasing
    magnitude: np.ndarray  # mean |F| or |F|^2 per radius
    coeff_count: np.ndarray  # number of full-plane coefficients per radius
    kind: str  # "amplitude" or "power"


@dataclass(frozen=True)
class SlopeFit:
    slope: float  # positive alpha of 1/f^alpha
    intercept: float
    sigma: float  # mean squared residual of the final fit
    points_used: int
    method: str


@functools.lru_cache(maxsize=8)
def _radial_index(side: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Radius bin per rfft2 coefficient plus plane weights and ring sizes."""
    ky = sfft.fftfreq(side, d=1.0 / side)
    kx = np.arange(side // 2 + 1, dtype=np.float64)
    radius = np.sqrt(ky[:, None] ** 2 + kx[None, :] ** 2)
    idx = np.rint(radius).astype(np.int64)
    # rfft2 stores kx in 0..side/2; interior columns stand for +-kx
    weights = np.full(idx.shape, 2.0)
    weights[:, 0] = 1.0
    weights[:, -1] = 1.0
    rmax = side // 2
    idx[(idx < 1) | (idx > rmax)] = 0  # bin 0 collects DC and corners, dropped
    wsum = np.bincount(idx.ravel(), weights=weights.ravel(), minlength=rmax + 1)
    return idx, weights, wsum


def radial_spectrum(img: RasterImage, kind: str = "amplitude") -> RadialSpectrum:
    """Radially averaged amplitude or power spectrum of a square image.

    The side must be a power of two.  Each coefficient joins the ring
    round(sqrt(fx^2 + fy^2)) in cycles/image; rings 1..side/2 are kept.
    """
    if kind not in ("amplitude", "power"):
        raise ValueError("kind must be 'amplitude' or 'power'")
    side = require_square_pow2(img)
    values = np.asarray(img.data, dtype=np.float64)
    spec = sfft.rfft2(values)
    mag = np.abs(spec)
    if kind == "power":
        mag *= mag
    idx, weights, wsum = _radial_index(side)
    sums = np.bincount(idx.ravel(), weights=(weights * mag).ravel(), minlength=side // 2 + 1)
    with np.errstate(invalid="ignore"):
        means = sums[1:] / wsum[1:]
    radii = np.arange(1, side // 2 + 1)
    return RadialSpectrum(radii, means, wsum[1:].astype(np.int64), kind)


def _ols(x: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    xm, ym = x.mean(), y.mean()
    dx = x - xm
    b = float((dx * (y - ym)).sum() / (dx * dx).sum())
    return b, float(ym - b * xm)


def _mean_sq_residual(x: np.ndarray, y: np.ndarray, b: float, a: float) -> float:
    r = y - (a + b * x)
    return float((r * r).mean())


def _cooks_distance(x: np.ndarray, y: np.ndarray, b: float, a: float) -> np.ndarray:
    n = len(x)
    e = y - (a + b * x)
    sxx = ((x - x.mean()) ** 2).sum()
    h = 1.0 / n + (x - x.mean()) ** 2 / sxx
    sse = (e * e).sum()
    if n <= 2 or sse <= 0:
        return np.zeros(n)
    s2 = sse / (n - 2)
    return e * e / (2.0 * s2) * h / (1.0 - h) ** 2


def _as_gray_float(img: RasterImage) -> RasterImage:
    if img.space is ColorSpace.RGB8:
        return to_grayscale(img)
    if img.space in (ColorSpace.GRAY8, ColorSpace.GRAYF):
        return img
    img.require(ColorSpace.RGB8, ColorSpace.GRAY8, ColorSpace.GRAYF)
    raise AssertionError("unreachable")


@functools.lru_cache(maxsize=1)
def _gray_to_lightness_lut() -> np.ndarray:
    from .raster import rgb_to_lab

    ramp = np.arange(256, dtype=np.uint8)
    rgb = np.stack([ramp] * 3, axis=-1).reshape(1, 256, 3)
    return rgb_to_lab(RasterImage(rgb, ColorSpace.RGB8)).data[0, :, 0].copy()


def _as_lightness(img: RasterImage) -> RasterImage:
    if img.space is ColorSpace.RGB8:
        return RasterImage(lab_lightness(img), ColorSpace.GRAYF)
    if img.space is ColorSpace.GRAY8:
        return RasterImage(_gray_to_lightness_lut()[img.data], ColorSpace.GRAYF)
    if img.space is ColorSpace.GRAYF:
        return img
    img.require(ColorSpace.RGB8, ColorSpace.GRAY8, ColorSpace.GRAYF)
    raise AssertionError("unreachable")


def _check_size(img: RasterImage) -> None:
    if min(img.width, img.height) < 2:
        raise TooSmallError(f"need min dimension >= 2, got {img.width}x{img.height}")


def _log_points(spectrum: RadialSpectrum) -> tuple[np.ndarray, np.ndarray]:
    ok = spectrum.magnitude > 0
    return np.log(spectrum.radii[ok].astype(np.float64)), np.log(spectrum.magnitude[ok])


def slope_spehar(img: RasterImage, cook_rule: str = "4/n") -> SlopeFit:
    """Amplitude-spectrum slope with Cook's-distance outlier exclusion.

    ``cook_rule`` selects the exclusion threshold: the conventional
    "4/n" (default) or the literal "n/4".  Exclusion runs one pass:
    fit, drop points above the threshold, refit once.
    """
    _check_size(img)
    gray = crop_center_square_pow2(_as_gray_float(img))
    x, y = _log_points(radial_spectrum(gray, "amplitude"))
    if len(x) < 2:
        return SlopeFit(float("nan"), float("nan"), float("nan"), len(x), "spehar")
    b, a = _ols(x, y)
    n = len(x)
    threshold = 4.0 / n if cook_rule == "4/n" else n / 4.0
    keep = _cooks_distance(x, y, b, a) <= threshold
    if keep.sum() >= 2:
        x, y = x[keep], y[keep]
        b, a = _ols(x, y)
    return SlopeFit(-b, a, _mean_sq_residual(x, y, b, a), len(x), "spehar")


def slope_redies(img: RasterImage, bins: int = REDIES_BINS) -> SlopeFit:
    """Power-spectrum slope over log-binned frequencies 10..256.

    The fit's mean squared residual over the binned points is the
    spectral sigma (deviation from a pure power law).
    """
    _check_size(img)
    gray = pad_to_square_mean_gray(_as_gray_float(img))
    gray = resize(gray, ResizePolicy.exact(REDIES_SIDE, REDIES_SIDE))
    spectrum = radial_spectrum(gray, "power")
    lo, hi = REDIES_BAND
    sel = (spectrum.radii >= lo) & (spectrum.radii <= hi) & (spectrum.magnitude > 0)
    logf = np.log(spectrum.radii[sel].astype(np.float64))
    logp = np.log(spectrum.magnitude[sel])
    if len(logf) < 2:
        return SlopeFit(float("nan"), float("nan"), float("nan"), len(logf), "redies")
    edges = np.linspace(np.log(lo), np.log(hi), bins + 1)
    which = np.clip(np.searchsorted(edges, logf, side="right") - 1, 0, bins - 1)
    bx, by = [], []
    for i in range(bins):
        m = which == i
        if m.any():
            bx.append(logf[m].mean())
            by.append(logp[m].mean())
    bx, by = np.array(bx), np.array(by)
    b, a = _ols(bx, by)
    return SlopeFit(-b, a, _mean_sq_residual(bx, by, b, a), len(bx), "redies")


def slope_mather(img: RasterImage) -> SlopeFit:
    """Amplitude-spectrum slope of the lightness channel, middle radii only.

    The lowest and highest quartiles of the radius list (by count) are
    dropped before fitting.
    """
    _check_size(img)
    light = crop_center_square_pow2(_as_lightness(img))
    light = resize(light, ResizePolicy.exact(MATHER_SIDE, MATHER_SIDE))
    spectrum = radial_spectrum(light, "amplitude")
    n = len(spectrum.radii)
    q = n // 4
    sel = np.zeros(n, dtype=bool)
    sel[q : n - q] = True
    sel &= spectrum.magnitude > 0
    x = np.log(spectrum.radii[sel].astype(np.float64))
    y = np.log(spectrum.magnitude[sel])
    if len(x) < 2:
        return SlopeFit(float("nan"), float("nan"), float("nan"), len(x), "mather")
    b, a = _ols(x, y)
    return SlopeFit(-b, a, _mean_sq_residual(x, y, b, a), len(x), "mather")
