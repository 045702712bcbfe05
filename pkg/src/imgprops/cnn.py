"""Fixed 96-filter convolution bank and the measures built on it.

The bank (96 filters, 3 input channels, 11x11 taps, stride 4 over a
512x512 input, valid padding -> 126x126 maps) is loaded from a binary
weight file; the package never depends on a deep-learning runtime.
Inputs are scaled to [0, 1] and the per-channel means stored in the
weight file are subtracted before convolution.  Responses are
rectified (ReLU) before any measure unless noted.

Weight file layout (all little-endian):

    magic "ATB1" | u32 filter_count | u32 in_channels | u32 kernel_h |
    u32 kernel_w | 3 x f32 channel means |
    weights f32 [filter][channel][row][col] | f32 biases |
    u32 CRC32 of everything between the magic and this field
"""

from __future__ import annotations

import struct
import zlib
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import BadMagicError, ChecksumFailError, DimMismatchError
from .raster import ColorSpace, RasterImage, ResizePolicy, resize

MAGIC = b"ATB1"
FILTERS = 96
IN_CHANNELS = 3
KERNEL = 11
INPUT_SIDE = 512
STRIDE = 4
MAP_SIDE = (INPUT_SIDE - KERNEL) // STRIDE + 1  # 126
SYMMETRY_EPS = 1e-6


@dataclass(frozen=True)
class Conv1Weights:
    filters: np.ndarray  # (96, 3, 11, 11) float32
    bias: np.ndarray  # (96,) float32
    channel_means: np.ndarray  # (3,) float32, in [0, 1] input scale


@dataclass(frozen=True)
class Conv1Responses:
    maps: np.ndarray  # (96, 126, 126) float32, rectified


def save_conv1_weights(path: str | Path, weights: Conv1Weights) -> None:
    payload = struct.pack("<4I", FILTERS, IN_CHANNELS, KERNEL, KERNEL)
    payload += np.asarray(weights.channel_means, dtype="<f4").tobytes()
    payload += np.ascontiguousarray(weights.filters, dtype="<f4").tobytes()
    payload += np.ascontiguousarray(weights.bias, dtype="<f4").tobytes()
    crc = zlib.crc32(payload) & 0xFFFFFFFF
    Path(path).write_bytes(MAGIC + payload + struct.pack("<I", crc))


def load_conv1_weights(path: str | Path) -> Conv1Weights:
    """Load and validate a filter-bank weight file."""
    blob = Path(path).read_bytes()
    if len(blob) < 8 or blob[:4] != MAGIC:
        raise BadMagicError(f"{path}: missing {MAGIC!r} magic")
    payload, (crc,) = blob[4:-4], struct.unpack("<I", blob[-4:])
    if zlib.crc32(payload) & 0xFFFFFFFF != crc:
        raise ChecksumFailError(f"{path}: payload CRC mismatch")
    n, c, kh, kw = struct.unpack_from("<4I", payload, 0)
    if (n, c, kh, kw) != (FILTERS, IN_CHANNELS, KERNEL, KERNEL):
        raise DimMismatchError(f"{path}: header declares {n}x{c}x{kh}x{kw}, need 96x3x11x11")
    expected = 16 + 4 * (3 + n * c * kh * kw + n)
    if len(payload) != expected:
        raise DimMismatchError(f"{path}: payload is {len(payload)} bytes, expected {expected}")
    means = np.frombuffer(payload, dtype="<f4", count=3, offset=16).copy()
    off = 16 + 12
    filters = (
        np.frombuffer(payload, dtype="<f4", count=n * c * kh * kw, offset=off)
        .reshape(n, c, kh, kw)
        .copy()
    )
    off += 4 * n * c * kh * kw
    bias = np.frombuffer(payload, dtype="<f4", count=n, offset=off).copy()
    if not (np.isfinite(filters).all() and np.isfinite(bias).all() and np.isfinite(means).all()):
        raise DimMismatchError(f"{path}: non-finite values in payload")
    return Conv1Weights(filters, bias, means)


def default_weights_path() -> Path:
    return Path(__file__).parent / "data" / "conv1_weights.bin"


def conv_forward_raw(
    values: np.ndarray,
    filters: np.ndarray,
    bias: np.ndarray,
    stride: int = STRIDE,
    row_phase: int = 0,
    col_phase: int = 0,
) -> np.ndarray:
    """Strided valid correlation + bias + ReLU on an (h, w, c) input.

    The sampling grid starts at (row_phase, col_phase); phase 1 with the
    512-input geometry yields the mirror grid of phase 0.
    """
    k = filters.shape[2]
    windows = np.lib.stride_tricks.sliding_window_view(values, (k, k), axis=(0, 1))
    grid = windows[row_phase::stride, col_phase::stride]
    gh, gw = grid.shape[:2]
    # window view is (gh, gw, channel, krow, kcol): channel-major like the weights
    patches = grid.reshape(gh * gw, -1)
    flat = filters.reshape(filters.shape[0], -1)
    out = patches @ flat.T + bias[None, :]
    np.maximum(out, 0.0, out=out)
    return np.ascontiguousarray(out.T.reshape(filters.shape[0], gh, gw))


def _normalized_input(img: RasterImage, weights: Conv1Weights) -> np.ndarray:
    img.require(ColorSpace.RGB8)
    sized = resize(img, ResizePolicy.exact(INPUT_SIDE, INPUT_SIDE))
    values = np.asarray(sized.data, dtype=np.float32) / np.float32(255.0)
    return values - weights.channel_means[None, None, :].astype(np.float32)


def conv1_forward(
    img: RasterImage, weights: Conv1Weights, row_phase: int = 0, col_phase: int = 0
) -> Conv1Responses:
    """Rectified response maps of the bank over the 512x512-resized image."""
    values = _normalized_input(img, weights)
    maps = conv_forward_raw(
        values, weights.filters.astype(np.float32), weights.bias.astype(np.float32),
        row_phase=row_phase, col_phase=col_phase,
    )
    return Conv1Responses(maps)


def _mirror_scores(a: np.ndarray, b: np.ndarray) -> float:
    denom = np.maximum(np.maximum(a, b), SYMMETRY_EPS)
    sym = 1.0 - np.abs(a - b) / denom
    return float(sym.mean())


def cnn_symmetry(img: RasterImage, weights: Conv1Weights) -> dict[str, float]:
    """Left-right, up-down and combined filter-response symmetry in [0, 1].

    The mirrored pass convolves the original image with mirrored
    kernels on the phase-shifted grid, which equals the response of the
    mirrored image at like positions; a mirror-symmetric image
    therefore scores exactly 1.  Combined averages the two directions.
    """
    values = _normalized_input(img, weights)
    filters = weights.filters.astype(np.float32)
    bias = weights.bias.astype(np.float32)
    base = conv_forward_raw(values, filters, bias)
    lr_maps = conv_forward_raw(values, filters[:, :, :, ::-1], bias, col_phase=1)[:, :, ::-1]
    ud_maps = conv_forward_raw(values, filters[:, :, ::-1, :], bias, row_phase=1)[:, ::-1, :]
    left_right = _mirror_scores(base, lr_maps)
    up_down = _mirror_scores(base, ud_maps)
    return {
        "left_right": left_right,
        "up_down": up_down,
        "combined": (left_right + up_down) / 2.0,
    }


def _cell_bounds(n: int, grid: int) -> list[int]:
    # as even as possible, remainder spread over the trailing cells
    base, rem = divmod(n, grid)
    sizes = [base] * (grid - rem) + [base + 1] * rem
    bounds = [0]
    for s in sizes:
        bounds.append(bounds[-1] + s)
    return bounds


def pooled_grid(responses: Conv1Responses, n: int) -> np.ndarray:
    """(96, n, n) per-cell maxima of the response maps."""
    maps = responses.maps
    side = maps.shape[1]
    bounds = _cell_bounds(side, n)
    out = np.empty((maps.shape[0], n, n), dtype=maps.dtype)
    for i in range(n):
        for j in range(n):
            cell = maps[:, bounds[i] : bounds[i + 1], bounds[j] : bounds[j + 1]]
            out[:, i, j] = cell.max(axis=(1, 2))
    return out


def self_similarity_from_responses(responses: Conv1Responses, grid: int = 8) -> float:
    ground = responses.maps.max(axis=(1, 2)).astype(np.float64)
    total = ground.sum()
    if total <= 0:
        return float("nan")
    ground /= total
    cells = pooled_grid(responses, grid).astype(np.float64).reshape(len(ground), -1)
    sums = cells.sum(axis=0)
    hiks = np.empty(cells.shape[1])
    for idx in range(cells.shape[1]):
        if sums[idx] <= 0:
            hiks[idx] = 0.0
        else:
            hiks[idx] = np.minimum(cells[:, idx] / sums[idx], ground).sum()
    return float(np.median(hiks))


def cnn_self_similarity(img: RasterImage, weights: Conv1Weights, grid: int = 8) -> float:
    """Median HIK between cell-max histograms and the whole-map histogram.

    NaN when the rectified responses are all zero.
    """
    return self_similarity_from_responses(conv1_forward(img, weights), grid)


def variances_from_responses(responses: Conv1Responses, grid: int) -> dict[str, float]:
    if not 2 <= grid <= 30:
        raise ValueError("grid must be in 2..30")
    pooled = pooled_grid(responses, grid).astype(np.float64)
    flat = pooled.reshape(pooled.shape[0], -1)
    # shift per filter so constant maps give exactly zero variance
    per_filter = (flat - flat[:, :1]).var(axis=1)
    return {
        "sparseness": float((pooled - pooled.flat[0]).var()),
        "variability": float(np.median(per_filter)),
    }


def cnn_variances(img: RasterImage, weights: Conv1Weights, grid: int = 8) -> dict[str, float]:
    """Sparseness and variability of the max-pooled response grid.

    Sparseness is the population variance over all filter x cell
    entries; variability is the median over filters of each filter's
    spatial variance.
    """
    return variances_from_responses(conv1_forward(img, weights), grid)
