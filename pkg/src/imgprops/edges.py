"""Gabor-filter edge statistics: density and orientation entropies.

A bank of 24 even-phase Gabor kernels (15 degree steps over a full
turn) is convolved with the grayscale image after capping its area at
120,000 pixels.  Edge density sums the rectified responses; the
first-order entropy is taken over per-orientation response mass; the
second-order entropy is taken over pairwise orientation differences of
the 10,000 strongest edges, skipping pairs closer than 20 pixels.

The pairwise kernel is exact: strengths are quantized to a fixed
integer grid and pair weights accumulate in integer arithmetic, so the
histogram is bitwise identical for any worker count and equals a naive
double loop over the same edges.  It avoids the O(n^2) scan by taking
the all-pairs histogram from per-orientation sums and subtracting the
near pairs found via a spatial grid of min_distance-sized cells.
"""

from __future__ import annotations

import functools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import scipy.fft as sfft

from .raster import ColorSpace, RasterImage, ResizePolicy, resize, to_grayscale

ORIENTATIONS = 24
WAVELENGTH = 8.0
ENVELOPE_SD = 4.0
ASPECT = 0.5
EXTENT_SDS = 4
MAX_PIXELS = 120_000
MAX_EDGES = 10_000
MIN_PAIR_DISTANCE = 20
STRENGTH_SCALE = 1 << 18  # pair-weight quantization grid
FOLDED_CLASSES = ORIENTATIONS // 2 + 1
RESPONSE_FLOOR = 1e-9  # FFT roundoff killer; real u8 edge responses are >= ~0.1


@dataclass(frozen=True)
class EdgeField:
    """Rectified per-orientation responses plus the ranked strongest edges."""

    responses: np.ndarray  # (orientations, h, w), >= 0
    xs: np.ndarray  # int columns of the strongest edges
    ys: np.ndarray  # int rows
    orientations: np.ndarray  # winning orientation index per edge
    strengths: np.ndarray  # winning response, descending


@functools.lru_cache(maxsize=2)
def gabor_bank(
    orientations: int = ORIENTATIONS,
    wavelength: float = WAVELENGTH,
    sigma: float = ENVELOPE_SD,
    aspect: float = ASPECT,
    extent_sds: int = EXTENT_SDS,
) -> tuple[np.ndarray, ...]:
    """Even-phase, DC-free Gabor kernels over a full rotation."""
    half = int(np.ceil(extent_sds * sigma))
    y, x = np.mgrid[-half : half + 1, -half : half + 1].astype(np.float64)
    kernels = []
    for k in range(orientations):
        theta = 2.0 * np.pi * k / orientations
        xr = x * np.cos(theta) + y * np.sin(theta)
        yr = -x * np.sin(theta) + y * np.cos(theta)
        g = np.exp(-(xr**2 + (aspect * yr) ** 2) / (2.0 * sigma**2)) * np.cos(
            2.0 * np.pi * xr / wavelength
        )
        g -= g.mean()  # DC-free
        g.setflags(write=False)
        kernels.append(g)
    return tuple(kernels)


def _convolve_bank(gray: np.ndarray, kernels) -> np.ndarray:
    half = (kernels[0].shape[0] - 1) // 2
    padded = np.pad(gray, half, mode="symmetric")
    hp, wp = padded.shape
    full = (hp + 2 * half, wp + 2 * half)
    fshape = (sfft.next_fast_len(full[0]), sfft.next_fast_len(full[1]))
    fimg = sfft.rfft2(padded, fshape)
    h, w = gray.shape
    out = np.empty((len(kernels), h, w))
    for k, kernel in enumerate(kernels):
        conv = sfft.irfft2(fimg * sfft.rfft2(kernel, fshape), fshape)
        out[k] = conv[2 * half : 2 * half + h, 2 * half : 2 * half + w]
    out = np.abs(out)
    out[out < RESPONSE_FLOOR] = 0.0
    return out


def gabor_responses(img: RasterImage, max_pixels: int = MAX_PIXELS, max_edges: int = MAX_EDGES) -> EdgeField:
    """Filter-bank responses of the (area-capped) grayscale image.

    The strongest-edge list ranks pixels by their winning rectified
    response, descending, ties broken by pixel order; zero responses
    never qualify.
    """
    gray = to_grayscale(img) if img.space is ColorSpace.RGB8 else img
    gray = resize(gray, ResizePolicy.max_pixels(max_pixels))
    responses = _convolve_bank(np.asarray(gray.data, dtype=np.float64), gabor_bank())
    winner = responses.argmax(axis=0)
    strength = responses.max(axis=0)
    flat = strength.ravel()
    order = np.argsort(-flat, kind="stable")[:max_edges]
    order = order[flat[order] > 0]
    ys, xs = np.unravel_index(order, strength.shape)
    return EdgeField(
        responses=responses,
        xs=xs.astype(np.int64),
        ys=ys.astype(np.int64),
        orientations=winner.ravel()[order].astype(np.int64),
        strengths=flat[order],
    )


def edge_density(field: EdgeField) -> tuple[float, float]:
    """(mean, raw sum) of rectified responses over pixels and orientations."""
    raw = float(field.responses.sum())
    pixels = field.responses.shape[1] * field.responses.shape[2]
    return raw / pixels, raw


def _entropy_bits(hist) -> float:
    values = np.asarray([float(v) for v in hist])
    total = values.sum()
    if total <= 0:
        return float("nan")
    p = values[values > 0] / total
    return float(-(p * np.log2(p)).sum())


def eoe_first_order(field: EdgeField) -> float:
    """Entropy of per-orientation response mass; NaN for a zero field."""
    hist = field.responses.sum(axis=(1, 2))
    return _entropy_bits(hist)


def _quantize(strengths: np.ndarray, weighted: bool) -> np.ndarray:
    if not weighted:
        return np.ones(len(strengths), dtype=np.int64)
    top = strengths.max()
    if top <= 0:
        return np.zeros(len(strengths), dtype=np.int64)
    return np.floor(strengths / top * STRENGTH_SCALE + 0.5).astype(np.int64)


def _class_bins(d: int, fold: bool) -> list[int]:
    if fold:
        return [min(d, ORIENTATIONS - d)]
    return [d, (ORIENTATIONS - d) % ORIENTATIONS]


def _all_pairs_histogram(oris: np.ndarray, q: np.ndarray, fold: bool) -> list[int]:
    bins = FOLDED_CLASSES if fold else ORIENTATIONS
    hist = [0] * bins
    sums = [int(q[oris == a].sum()) for a in range(ORIENTATIONS)]
    sq = [int((q[oris == a].astype(object) ** 2).sum()) for a in range(ORIENTATIONS)]
    for a in range(ORIENTATIONS):
        within = (sums[a] * sums[a] - sq[a]) // 2
        for c in _class_bins(0, fold):
            hist[c] += within
        for b in range(a + 1, ORIENTATIONS):
            cross = sums[a] * sums[b]
            for c in _class_bins((a - b) % ORIENTATIONS, fold):
                hist[c] += cross
    return hist


def _near_pair_tasks(xs, ys, min_distance):
    """Cell-index pairs whose members can lie within min_distance."""
    cx = xs // min_distance
    cy = ys // min_distance
    cells: dict[tuple[int, int], list[int]] = {}
    for idx, key in enumerate(zip(cx.tolist(), cy.tolist())):
        cells.setdefault(key, []).append(idx)
    members = {k: np.asarray(v, dtype=np.int64) for k, v in cells.items()}
    tasks = []
    for key in sorted(members):
        tasks.append((members[key], None))  # triangular within the cell
        gx, gy = key
        for dx, dy in ((1, -1), (1, 0), (1, 1), (0, 1)):  # forward half-neighborhood
            other = (gx + dx, gy + dy)
            if other in members:
                tasks.append((members[key], members[other]))
    return tasks


def _accumulate_near(task, xs, ys, oris, q, min_distance, fold, hist):
    limit = min_distance * min_distance
    a_idx, b_idx = task
    if b_idx is None:
        # j strictly after i within the same cell
        src = a_idx
        for offset in range(len(src) - 1):
            i = src[offset]
            j = src[offset + 1 :]
            dx = xs[j] - xs[i]
            dy = ys[j] - ys[i]
            close = dx * dx + dy * dy < limit
            if not close.any():
                continue
            jj = j[close]
            d = (int(oris[i]) - oris[jj]) % ORIENTATIONS
            w = int(q[i]) * q[jj]
            if fold:
                np.add.at(hist, np.minimum(d, ORIENTATIONS - d), w)
            else:
                np.add.at(hist, d, w)
                np.add.at(hist, (ORIENTATIONS - d) % ORIENTATIONS, w)
        return
    chunk = max(1, 2_000_000 // max(len(b_idx), 1))
    for start in range(0, len(a_idx), chunk):
        i_block = a_idx[start : start + chunk]
        dx = xs[i_block][:, None] - xs[b_idx][None, :]
        dy = ys[i_block][:, None] - ys[b_idx][None, :]
        close = dx * dx + dy * dy < limit
        if not close.any():
            continue
        ii, jj = np.nonzero(close)
        d = (oris[i_block][ii] - oris[b_idx][jj]) % ORIENTATIONS
        w = q[i_block][ii] * q[b_idx][jj]
        if fold:
            np.add.at(hist, np.minimum(d, ORIENTATIONS - d), w)
        else:
            np.add.at(hist, d, w)
            np.add.at(hist, (ORIENTATIONS - d) % ORIENTATIONS, w)


def pair_difference_histogram(
    xs: np.ndarray,
    ys: np.ndarray,
    oris: np.ndarray,
    strengths: np.ndarray,
    min_distance: int = MIN_PAIR_DISTANCE,
    workers: int = 1,
    fold: bool = True,
    weighted: bool = True,
) -> list[int]:
    """Exact integer histogram of pairwise orientation differences.

    Covers all unordered edge pairs at Euclidean distance >=
    ``min_distance``, weighted by the product of grid-quantized
    strengths.  Folded mode maps differences d and 24-d together
    (13 classes); unfolded mode spreads each pair over both bins.
    """
    xs = np.asarray(xs, dtype=np.int64)
    ys = np.asarray(ys, dtype=np.int64)
    oris = np.asarray(oris, dtype=np.int64)
    q = _quantize(np.asarray(strengths, dtype=np.float64), weighted)
    hist_all = _all_pairs_histogram(oris, q, fold)
    tasks = _near_pair_tasks(xs, ys, min_distance)
    bins = len(hist_all)
    if workers <= 1:
        near = np.zeros(bins, dtype=np.int64)
        for task in tasks:
            _accumulate_near(task, xs, ys, oris, q, min_distance, fold, near)
        near_total = near
    else:
        parts = [np.zeros(bins, dtype=np.int64) for _ in range(workers)]

        def run(slot: int) -> None:
            for task in tasks[slot::workers]:
                _accumulate_near(task, xs, ys, oris, q, min_distance, fold, parts[slot])

        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(run, range(workers)))
        near_total = sum(parts)
    return [int(a) - int(n) for a, n in zip(hist_all, near_total)]


def eoe_second_order(
    field: EdgeField,
    min_distance: int = MIN_PAIR_DISTANCE,
    workers: int = 1,
    fold: bool = True,
    weighted: bool = True,
) -> float:
    """Entropy of the pairwise orientation-difference histogram.

    NaN when fewer than two strong edges exist or no pair passes the
    distance rule.
    """
    if len(field.strengths) < 2:
        return float("nan")
    hist = pair_difference_histogram(
        field.xs, field.ys, field.orientations, field.strengths,
        min_distance=min_distance, workers=workers, fold=fold, weighted=weighted,
    )
    return _entropy_bits(hist)
