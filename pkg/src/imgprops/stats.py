"""Size/aspect descriptors, channel statistics and histogram entropies.

Entropies use base-2 logs over 256-bin histograms, so the maximum is
exactly 8 bits.  Standard deviations are population SDs throughout.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .raster import ColorSpace, RasterImage, lab_lightness, rgb_to_hsv, rgb_to_lab

ENTROPY_BINS = 256


@dataclass(frozen=True)
class ChannelStats:
    space: str
    mean: tuple[float, float, float]
    std: tuple[float, float, float]


def image_size(img: RasterImage) -> float:
    """Height plus width of the image as decoded."""
    return float(img.height + img.width)


def aspect_ratio(img: RasterImage) -> float:
    """Width over height (display-format convention)."""
    return img.width / img.height


def shannon_entropy_bits(counts: np.ndarray) -> float:
    """Shannon entropy (base 2) of a histogram; empty bins contribute 0."""
    total = counts.sum()
    if total <= 0:
        return float("nan")
    p = counts[counts > 0] / total
    return float(-(p * np.log2(p)).sum())


def _mean_std(values: np.ndarray) -> tuple[float, float]:
    # shift by the first element so constant inputs give exactly 0 SD
    shift = values.ravel()[0]
    centered = values - shift
    return float(shift + centered.mean()), float(centered.std())


def channel_stats(img: RasterImage, space: str) -> ChannelStats:
    """Per-channel mean and population SD in RGB, HSV or Lab."""
    img.require(ColorSpace.RGB8)
    key = space.lower()
    if key == "rgb":
        data = img.data.astype(np.float64)
    elif key == "hsv":
        data = rgb_to_hsv(img).data
    elif key == "lab":
        data = rgb_to_lab(img).data
    else:
        raise ValueError(f"unknown color space {space!r} (rgb, hsv or lab)")
    pairs = [_mean_std(data[..., c]) for c in range(3)]
    return ChannelStats(key, tuple(p[0] for p in pairs), tuple(p[1] for p in pairs))


def rms_contrast(img: RasterImage) -> float:
    """Population SD of the Lab lightness channel (L in [0, 100])."""
    return _mean_std(lab_lightness(img))[1]


def _hist256(values: np.ndarray, lo: float, hi: float) -> np.ndarray:
    counts, _ = np.histogram(values, bins=ENTROPY_BINS, range=(lo, hi))
    return counts


def lightness_entropy(img: RasterImage) -> float:
    """Entropy of the L channel over 256 equal bins spanning [0, 100]."""
    return shannon_entropy_bits(_hist256(lab_lightness(img), 0.0, 100.0))


def color_entropy(img: RasterImage, include_achromatic: bool = True) -> float:
    """Entropy of the HSV hue channel over 256 equal bins spanning [0, 1).

    Gray pixels have no defined hue; by convention they count as H = 0
    unless ``include_achromatic`` is False, in which case they are
    dropped from the histogram.
    """
    hsv = rgb_to_hsv(img).data
    h = hsv[..., 0]
    if not include_achromatic:
        h = h[hsv[..., 1] > 0]
        if h.size == 0:
            return float("nan")
    return shannon_entropy_bits(_hist256(h, 0.0, 1.0))
