#!/usr/bin/env python3
"""Produce the bundled conv1 weight file.

Preferred source is the canonical pretrained AlexNet first-layer
weights (requires torch + torchvision and access to the model zoo);
without them, a deterministic synthetic bank with the same qualitative
make-up (oriented luminance edges at several spatial frequencies,
color-opponent blobs and gradients) is generated instead.

Usage: python tools/make_reference_weights.py [output.bin]
"""

from __future__ import annotations

import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from imgprops.cnn import FILTERS, KERNEL, Conv1Weights, save_conv1_weights  # noqa: E402

IMAGENET_MEANS = np.array([0.485, 0.456, 0.406], dtype=np.float32)


def try_pretrained() -> Conv1Weights | None:
    try:
        import torch  # noqa: F401
        from torchvision.models import AlexNet_Weights, alexnet
    except ImportError:
        return None
    try:
        net = alexnet(weights=AlexNet_Weights.IMAGENET1K_V1)
    except Exception as exc:
        print(f"pretrained weights unavailable ({exc}); falling back to synthetic bank")
        return None
    conv = net.features[0]
    return Conv1Weights(
        conv.weight.detach().numpy().astype(np.float32),
        conv.bias.detach().numpy().astype(np.float32),
        IMAGENET_MEANS,
    )


def _grid():
    half = KERNEL // 2
    return np.mgrid[-half : half + 1, -half : half + 1].astype(np.float64)


def _gabor(theta, wavelength, sigma, phase, gamma=0.7):
    y, x = _grid()
    xr = x * np.cos(theta) + y * np.sin(theta)
    yr = -x * np.sin(theta) + y * np.cos(theta)
    env = np.exp(-(xr**2 + (gamma * yr) ** 2) / (2 * sigma**2))
    return env * np.cos(2 * np.pi * xr / wavelength + phase)


def _blob(sigma_c, sigma_s):
    y, x = _grid()
    r2 = x**2 + y**2
    return np.exp(-r2 / (2 * sigma_c**2)) - (sigma_c / sigma_s) ** 2 * np.exp(-r2 / (2 * sigma_s**2))


def synthetic_bank(seed: int = 20240601) -> Conv1Weights:
    rng = np.random.default_rng(seed)
    filters = np.zeros((FILTERS, 3, KERNEL, KERNEL), dtype=np.float64)
    idx = 0
    # 48 luminance Gabors across orientations, frequencies and phases
    for k in range(48):
        theta = np.pi * k / 24.0
        wavelength = (3.5, 5.0, 7.0, 10.0)[k % 4]
        phase = (0.0, np.pi / 2)[k % 2]
        g = _gabor(theta, wavelength, 2.2 + rng.uniform(0, 0.8), phase)
        filters[idx] = g[None, :, :] / 3.0
        idx += 1
    # 24 color-opponent oriented gradients (red-green / blue-yellow)
    axes = [np.array([1.0, -1.0, 0.0]), np.array([-0.5, -0.5, 1.0])]
    for k in range(24):
        theta = np.pi * k / 12.0
        g = _gabor(theta, 14.0, 3.2, 0.0, gamma=0.5)
        axis = axes[k % 2] + rng.normal(0, 0.05, 3)
        filters[idx] = axis[:, None, None] * g[None, :, :]
        idx += 1
    # 16 color-opponent center-surround blobs
    for k in range(16):
        dog = _blob(1.6 + 0.15 * (k % 4), 4.5)
        axis = axes[k % 2] * (1 if k % 3 else -1) + rng.normal(0, 0.05, 3)
        filters[idx] = axis[:, None, None] * dog[None, :, :]
        idx += 1
    # 8 luminance blobs
    for k in range(8):
        filters[idx] = _blob(1.4 + 0.3 * k / 8, 4.0)[None, :, :] / 3.0
        idx += 1
    assert idx == FILTERS
    norms = np.sqrt((filters**2).sum(axis=(1, 2, 3), keepdims=True))
    filters *= (0.8 + rng.uniform(-0.1, 0.1, (FILTERS, 1, 1, 1))) / norms
    bias = rng.uniform(0.005, 0.03, FILTERS)
    return Conv1Weights(filters.astype(np.float32), bias.astype(np.float32), IMAGENET_MEANS)


def main() -> None:
    out = Path(sys.argv[1]) if len(sys.argv) > 1 else (
        Path(__file__).resolve().parents[1] / "src" / "imgprops" / "data" / "conv1_weights.bin"
    )
    weights = try_pretrained()
    source = "pretrained"
    if weights is None:
        weights = synthetic_bank()
        source = "synthetic"
    out.parent.mkdir(parents=True, exist_ok=True)
    save_conv1_weights(out, weights)
    print(f"wrote {source} bank to {out} ({out.stat().st_size} bytes)")


if __name__ == "__main__":
    main()
