"""Pixel-based composition measures: mirror symmetry, balance, DCM, homogeneity.

All four scores are percentages.  Mass-based measures treat dark as
heavy: a black pixel weighs 1, a white pixel 0.
"""

from __future__ import annotations

import numpy as np

from .errors import TooSmallError
from .raster import ColorSpace, RasterImage, to_grayscale

HOMOGENEITY_GRID = 10


def _gray(img: RasterImage) -> np.ndarray:
    if img.space is ColorSpace.RGB8:
        return to_grayscale(img).data
    img.require(ColorSpace.RGB8, ColorSpace.GRAY8)
    return img.data


def _mass(img: RasterImage) -> np.ndarray:
    return (255.0 - _gray(img).astype(np.float64)) / 255.0


def _axis_score(values: np.ndarray, reflected: np.ndarray) -> float:
    diff = np.abs(values.astype(np.float64) - reflected.astype(np.float64)).sum()
    return 100.0 * (1.0 - diff / (255.0 * values.size))


def mirror_symmetry(img: RasterImage) -> float:
    """Mean reflection symmetry in percent; 100 is perfectly mirrored.

    Square images average the vertical, horizontal and two diagonal
    axes; other images use the vertical and horizontal axes only.
    """
    gray = _gray(img)
    scores = [
        _axis_score(gray, gray[:, ::-1]),
        _axis_score(gray, gray[::-1, :]),
    ]
    if gray.shape[0] == gray.shape[1]:
        scores.append(_axis_score(gray, gray.T))
        scores.append(_axis_score(gray, gray[::-1, ::-1].T))
    return float(np.mean(scores))


def _pair_score(a: float, b: float) -> float:
    total = a + b
    if total <= 0:
        return 0.0
    return 100.0 * abs(a - b) / total


def _matched_pairs_score(line_masses: np.ndarray) -> float:
    """Mirror-matched line comparison; center line self-pairs to zero diff."""
    n = len(line_masses)
    left = line_masses[: n // 2]
    right = line_masses[::-1][: n // 2]
    num = np.abs(left - right).sum()
    den = (left + right).sum()
    if n % 2:
        den += 2.0 * line_masses[n // 2]
    if den <= 0:
        return 0.0
    return float(100.0 * num / den)


def balance_components(img: RasterImage) -> list[float]:
    """The eight paired-region asymmetry scores, each in [0, 100].

    Order: left|right, top|bottom, main-diagonal triangles,
    anti-diagonal triangles, outer|inner columns, outer|inner rows,
    mirrored column pairs, mirrored row pairs.
    """
    mass = _mass(img)
    h, w = mass.shape
    col_mass = mass.sum(axis=0)
    row_mass = mass.sum(axis=1)

    scores = [
        _pair_score(col_mass[: w // 2].sum(), col_mass[w - w // 2 :].sum()),
        _pair_score(row_mass[: h // 2].sum(), row_mass[h - h // 2 :].sum()),
    ]

    # triangles cut by the rectangle's diagonals; pixels on a diagonal
    # belong to neither half (the halves are congruent by 180 degree
    # rotation, so areas match)
    iy = (np.arange(h)[:, None] + 0.5) / h
    jx = (np.arange(w)[None, :] + 0.5) / w
    above_main = iy < jx
    below_main = iy > jx
    scores.append(_pair_score(mass[above_main].sum(), mass[below_main].sum()))
    above_anti = iy + jx < 1.0
    below_anti = iy + jx > 1.0
    scores.append(_pair_score(mass[above_anti].sum(), mass[below_anti].sum()))

    # outer band: the q lines nearest either edge; inner band: the next
    # q lines inward — equal sizes, symmetric about the center
    for line_mass, n in ((col_mass, w), (row_mass, h)):
        q = n // 4
        dist = np.minimum(np.arange(n), n - 1 - np.arange(n))
        outer = float(line_mass[dist < q].sum()) if q else 0.0
        inner = float(line_mass[(dist >= q) & (dist < 2 * q)].sum()) if q else 0.0
        scores.append(_pair_score(outer, inner))

    scores.append(_matched_pairs_score(col_mass))
    scores.append(_matched_pairs_score(row_mass))
    return scores


def balance_score(img: RasterImage) -> float:
    """Mean of the eight asymmetry comparisons: 0 balanced, 100 asymmetric."""
    return float(np.mean(balance_components(img)))


def dcm(img: RasterImage) -> float:
    """Deviation of the center of mass from the image center, in percent.

    100 means the mass center sits in a corner; all-white images have
    no mass and return NaN.
    """
    mass = _mass(img)
    total = mass.sum()
    if total <= 0:
        return float("nan")
    h, w = mass.shape
    com_x = float((mass.sum(axis=0) * np.arange(w)).sum() / total)
    com_y = float((mass.sum(axis=1) * np.arange(h)).sum() / total)
    cx, cy = (w - 1) / 2.0, (h - 1) / 2.0
    half_diag = float(np.hypot(cx, cy))
    if half_diag == 0:
        return 0.0
    return 100.0 * float(np.hypot(com_x - cx, com_y - cy)) / half_diag


def otsu_threshold(gray: np.ndarray) -> int:
    """Threshold t maximizing between-class variance of {<=t} vs {>t}.

    Ties resolve to the lowest threshold.
    """
    counts = np.bincount(gray.ravel(), minlength=256).astype(np.float64)
    total = counts.sum()
    levels = np.arange(256, dtype=np.float64)
    w0 = np.cumsum(counts)
    m0 = np.cumsum(counts * levels)
    mean_all = m0[-1]
    w1 = total - w0
    with np.errstate(invalid="ignore", divide="ignore"):
        mu0 = m0 / w0
        mu1 = (mean_all - m0) / w1
        criterion = w0 * w1 * (mu0 - mu1) ** 2
    criterion[~np.isfinite(criterion)] = -1.0
    return int(np.argmax(criterion))


def homogeneity(img: RasterImage) -> float:
    """Spatial evenness of Otsu-black pixels over a 10x10 grid, percent.

    Row and column totals of per-cell black counts each yield a
    relative entropy (vs the uniform 10-bin maximum); the score is 100
    times their mean.  Degenerate thresholding (zero or all pixels
    black) returns NaN.
    """
    gray = _gray(img)
    h, w = gray.shape
    if min(h, w) < HOMOGENEITY_GRID:
        raise TooSmallError(f"need min dimension >= {HOMOGENEITY_GRID}, got {w}x{h}")
    black = gray <= otsu_threshold(gray)
    n_black = int(black.sum())
    if n_black == 0 or n_black == black.size:
        return float("nan")
    g = HOMOGENEITY_GRID
    rows = [i * (h // g) for i in range(g)] + [h]
    cols = [j * (w // g) for j in range(g)] + [w]
    cells = np.zeros((g, g))
    for i in range(g):
        for j in range(g):
            cells[i, j] = black[rows[i] : rows[i + 1], cols[j] : cols[j + 1]].sum()
    result = []
    for sums in (cells.sum(axis=1), cells.sum(axis=0)):
        p = sums[sums > 0] / sums.sum()
        entropy = float(-(p * np.log2(p)).sum())
        result.append(entropy / np.log2(g))
    return 100.0 * float(np.mean(result))
