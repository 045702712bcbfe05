"""Box-counting fractal dimensions of binarized images and lightness surfaces.

The 2-d estimate counts grid boxes touched by the black/white boundary
of the mean-thresholded image over a halving schedule of box sides; its
slope lives in [1, 2].  The 3-d estimate treats lightness as a height
field and counts stacked cubes per tile (differential box counting),
with a slope in [2, 3].
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import TooSmallError
from .raster import ColorSpace, RasterImage, crop_center_square_pow2, to_grayscale

L_RANGE = 100.0  # lightness channel spans [0, 100]


@dataclass(frozen=True)
class BoxCountSeries:
    scales: np.ndarray  # box side lengths, halving
    counts: np.ndarray  # occupied-box counts (float for the 3-d variant)
    slope: float


def binarize_mean(img: RasterImage) -> np.ndarray:
    """Boolean mask: pixel strictly above the image mean."""
    img.require(ColorSpace.GRAY8, ColorSpace.GRAYF)
    values = np.asarray(img.data, dtype=np.float64)
    return values > values.mean()


def _boundary_pixels(mask: np.ndarray) -> np.ndarray:
    """Pixels with at least one 4-neighbor of the opposite value."""
    edge = np.zeros(mask.shape, dtype=bool)
    dv = mask[:-1, :] != mask[1:, :]
    edge[:-1, :] |= dv
    edge[1:, :] |= dv
    dh = mask[:, :-1] != mask[:, 1:]
    edge[:, :-1] |= dh
    edge[:, 1:] |= dh
    return edge


def _halving_scales(side: int) -> list[int]:
    scales = []
    k = 1
    while side >> k >= 2:
        scales.append(side >> k)
        k += 1
    return scales


def _fit_loglog(scales: np.ndarray, counts: np.ndarray) -> float:
    x = -np.log(scales.astype(np.float64))  # log(1/L), base-invariant slope
    y = np.log(counts.astype(np.float64))
    xm, ym = x.mean(), y.mean()
    dx = x - xm
    return float((dx * (y - ym)).sum() / (dx * dx).sum())


def box_count_2d(mask: np.ndarray) -> BoxCountSeries:
    """Boundary-box counts for a power-of-two square boolean mask."""
    side = mask.shape[0]
    edge = _boundary_pixels(mask)
    scales, counts = [], []
    for L in _halving_scales(side):
        grid = edge.reshape(side // L, L, side // L, L)
        counts.append(int(grid.any(axis=(1, 3)).sum()))
        scales.append(L)
    scales_arr = np.array(scales)
    counts_arr = np.array(counts, dtype=np.float64)
    slope = _fit_loglog(scales_arr, counts_arr) if np.all(counts_arr > 0) else float("nan")
    return BoxCountSeries(scales_arr, counts_arr, slope)


def fractal_dim_2d(img: RasterImage) -> float:
    """Box-counting dimension of the mean-threshold boundary, in [1, 2].

    Returns NaN when thresholding yields an all-0 or all-1 mask.
    """
    if min(img.width, img.height) < 4:
        raise TooSmallError(f"need min dimension >= 4, got {img.width}x{img.height}")
    gray = to_grayscale(img) if img.space is ColorSpace.RGB8 else img
    gray = crop_center_square_pow2(gray)
    mask = binarize_mean(gray)
    if mask.all() or not mask.any():
        return float("nan")
    return box_count_2d(mask).slope


def _tile_starts(side: int, L: int) -> np.ndarray:
    # full tiles of side L; remainder pixels join the last tile
    return np.arange(side // L) * L


def box_count_3d(surface: np.ndarray) -> BoxCountSeries:
    """Differential box counts of a square height field in [0, 100].

    Boxes are cubes in the normalized (side x side x side) volume: a
    tile of side L gets ceil((max - min) / s) + 1 boxes with height
    unit s = L * (100 / side).
    """
    side = surface.shape[0]
    scales, counts = [], []
    for L in _halving_scales(side):
        starts = _tile_starts(side, L)
        tmax = np.maximum.reduceat(np.maximum.reduceat(surface, starts, axis=0), starts, axis=1)
        tmin = np.minimum.reduceat(np.minimum.reduceat(surface, starts, axis=0), starts, axis=1)
        s = L * (L_RANGE / side)
        boxes = np.ceil((tmax - tmin) / s) + 1.0
        scales.append(L)
        counts.append(float(boxes.sum()))
    scales_arr = np.array(scales)
    counts_arr = np.array(counts, dtype=np.float64)
    return BoxCountSeries(scales_arr, counts_arr, _fit_loglog(scales_arr, counts_arr))


def fractal_dim_3d(img: RasterImage) -> float:
    """Differential box-counting dimension of the lightness surface, in [2, 3]."""
    if min(img.width, img.height) < 4:
        raise TooSmallError(f"need min dimension >= 4, got {img.width}x{img.height}")
    side = min(img.width, img.height)
    top = (img.height - side) // 2
    left = (img.width - side) // 2
    cropped = RasterImage(
        np.ascontiguousarray(img.data[top : top + side, left : left + side]), img.space
    )
    from .fourier import _as_lightness

    surface = np.asarray(_as_lightness(cropped).data, dtype=np.float64)
    return box_count_3d(surface).slope
