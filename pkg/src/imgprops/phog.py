"""Oriented-gradient measures: complexity, anisotropy and self-similarity.

The pipeline follows a pyramid of orientation histograms: a gradient
image is reduced to per-section histograms of gradient magnitude by
orientation bin, at levels 0 (whole image) through 3 (8x8 grid).
Self-similarity compares each section histogram with the whole-image
histogram through the histogram intersection kernel (HIK).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .raster import ColorSpace, RasterImage, ResizePolicy, resize, rgb_to_lab

DEFAULT_BINS = 16
SELF_SIMILARITY_AREA = 100_000  # default pixel-count normalization
LEVELS = 3


@dataclass(frozen=True)
class GradientImage:
    magnitude: np.ndarray  # (h, w) float, >= 0
    orientation: np.ndarray  # (h, w) float in [0, 2*pi)


@dataclass(frozen=True)
class HogPyramid:
    """histograms[level] has shape (4**level, bins); sections row-major."""

    bins: int
    histograms: tuple[np.ndarray, ...]


def area_normalize_policy(img: RasterImage, target_px: int) -> ResizePolicy:
    """Exact policy scaling the image to roughly target_px pixels."""
    scale = (target_px / (img.width * img.height)) ** 0.5
    return ResizePolicy.exact(max(1, round(img.width * scale)), max(1, round(img.height * scale)))


def _channels(img: RasterImage) -> list[np.ndarray]:
    if img.space is ColorSpace.RGB8:
        lab = rgb_to_lab(img).data
        return [lab[..., c] for c in range(3)]
    if img.space in (ColorSpace.GRAY8, ColorSpace.GRAYF):
        return [np.asarray(img.data, dtype=np.float64)]
    img.require(ColorSpace.RGB8, ColorSpace.GRAY8, ColorSpace.GRAYF)
    raise AssertionError("unreachable")


def _gradients(channel: np.ndarray, operator: str) -> tuple[np.ndarray, np.ndarray]:
    p = np.pad(channel, 1, mode="edge")
    if operator == "central":
        dx = (p[1:-1, 2:] - p[1:-1, :-2]) / 2.0
        dy = (p[2:, 1:-1] - p[:-2, 1:-1]) / 2.0
    elif operator == "sobel":
        dx = (
            (p[:-2, 2:] + 2.0 * p[1:-1, 2:] + p[2:, 2:])
            - (p[:-2, :-2] + 2.0 * p[1:-1, :-2] + p[2:, :-2])
        ) / 8.0
        dy = (
            (p[2:, :-2] + 2.0 * p[2:, 1:-1] + p[2:, 2:])
            - (p[:-2, :-2] + 2.0 * p[:-2, 1:-1] + p[:-2, 2:])
        ) / 8.0
    else:
        raise ValueError(f"unknown gradient operator {operator!r}")
    return dx, dy


def gradient_image(img: RasterImage, operator: str = "central") -> GradientImage:
    """Combined gradient image: per pixel, the strongest channel wins.

    For RGB8 input the three Lab channels are compared; grayscale input
    uses its single channel.  Orientation is atan2(dy, dx) of the
    winning channel, mapped to [0, 2*pi); zero-gradient pixels get 0.
    """
    mags, dxs, dys = [], [], []
    for channel in _channels(img):
        dx, dy = _gradients(channel, operator)
        mags.append(np.hypot(dx, dy))
        dxs.append(dx)
        dys.append(dy)
    mag = np.stack(mags)
    winner = mag.argmax(axis=0)
    take = np.take_along_axis
    pick = lambda stack: take(np.stack(stack), winner[None], axis=0)[0]  # noqa: E731
    orientation = np.arctan2(pick(dys), pick(dxs)) % (2.0 * np.pi)
    return GradientImage(take(mag, winner[None], axis=0)[0], orientation)


def _section_bounds(n: int, grid: int) -> list[int]:
    base = n // grid
    if base == 0:
        return [min(i, n) for i in range(grid)] + [n]
    return [i * base for i in range(grid)] + [n]


def hog_pyramid(grad: GradientImage, bins: int = DEFAULT_BINS, levels: int = LEVELS) -> HogPyramid:
    """Magnitude-weighted orientation histograms at levels 0..levels.

    Bin width is 2*pi/bins, left-closed.  Uneven grid divisions give
    the remainder rows/columns to the last section.
    """
    if bins not in (8, 16):
        raise ValueError("bins must be 8 or 16")
    h, w = grad.magnitude.shape
    bin_idx = np.minimum((grad.orientation * (bins / (2.0 * np.pi))).astype(np.int64), bins - 1)
    out = []
    for level in range(levels + 1):
        grid = 1 << level
        rows = _section_bounds(h, grid)
        cols = _section_bounds(w, grid)
        hist = np.zeros((grid * grid, bins))
        for si in range(grid):
            for sj in range(grid):
                sl = (slice(rows[si], rows[si + 1]), slice(cols[sj], cols[sj + 1]))
                hist[si * grid + sj] = np.bincount(
                    bin_idx[sl].ravel(), weights=grad.magnitude[sl].ravel(), minlength=bins
                )
        out.append(hist)
    return HogPyramid(bins, tuple(out))


def hik(a: np.ndarray, b: np.ndarray) -> float:
    """Histogram intersection kernel of two unit-sum histograms."""
    return float(np.minimum(a, b).sum())


def phog_complexity(img: RasterImage, policy: ResizePolicy | None = None) -> float:
    """Mean combined gradient magnitude (no resize by default)."""
    if policy is not None:
        img = resize(img, policy)
    return float(gradient_image(img).magnitude.mean())


def phog_anisotropy(
    img: RasterImage, policy: ResizePolicy | None = None, per_section: bool = False
) -> float:
    """Dispersion of normalized orientation histograms over the 8x8 grid.

    Default pools all normalized bin values of nonempty level-3
    sections and takes one population SD; ``per_section`` instead
    averages per-section SDs.  All-empty input scores 0.
    """
    if policy is not None:
        img = resize(img, policy)
    pyramid = hog_pyramid(gradient_image(img))
    level3 = pyramid.histograms[3]
    sums = level3.sum(axis=1)
    kept = level3[sums > 0] / sums[sums > 0, None]
    if kept.size == 0:
        return 0.0
    if per_section:
        return float(kept.std(axis=1).mean())
    return float(kept.std())


def self_similarity_from_pyramid(pyramid: HogPyramid, weights=(1.0, 1.0, 1.0)) -> float:
    """Weighted mean over levels 1..3 of mean section-vs-ground HIK."""
    weights = np.asarray(weights, dtype=np.float64)
    if len(weights) != len(pyramid.histograms) - 1 or (weights < 0).any() or weights.sum() == 0:
        raise ValueError("need nonnegative weights per level 1..3, not all zero")
    ground = pyramid.histograms[0][0]
    total = ground.sum()
    if total <= 0:
        return float("nan")
    ground = ground / total
    level_means = []
    for hist in pyramid.histograms[1:]:
        sums = hist.sum(axis=1)
        normed = np.where(sums[:, None] > 0, hist / np.where(sums[:, None] > 0, sums[:, None], 1.0), 0.0)
        level_means.append(np.minimum(normed, ground[None, :]).sum(axis=1).mean())
    return float((weights * level_means).sum() / weights.sum())


def phog_self_similarity(
    img: RasterImage,
    weights=(1.0, 1.0, 1.0),
    policy: ResizePolicy | None = None,
    normalize_area: int | None = SELF_SIMILARITY_AREA,
) -> float:
    """HIK self-similarity in [0, 1]; NaN when gradient mass is zero.

    By default the image is first scaled to ~100,000 pixels; pass an
    explicit ``policy`` (or ``normalize_area=None``) to override.
    """
    if policy is None and normalize_area is not None:
        policy = area_normalize_policy(img, normalize_area)
    if policy is not None:
        img = resize(img, policy)
    return self_similarity_from_pyramid(hog_pyramid(gradient_image(img)), weights)
