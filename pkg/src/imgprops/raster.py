"""Image decoding, color-space conversion and shared pre-processing ops.

All functions are pure: they never mutate their input image and return
new :class:`RasterImage` instances, so concurrent use is safe.

Conventions recorded here once:

* grayscale uses BT.601 luma weights (0.299, 0.587, 0.114), rounded
  half-up to 8 bit;
* Lab conversion assumes sRGB primaries with a D65 white point;
* HSV stores all three components as fractions in [0, 1], hue as the
  fraction of a full turn.
"""

from __future__ import annotations

import enum
import io
import threading
from dataclasses import dataclass

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import (
    CorruptStreamError,
    NotSquareError,
    SideNotPow2Error,
    TooSmallError,
    UnsupportedFormatError,
    WrongColorSpaceError,
)

# sRGB -> XYZ matrix derived from the sRGB primaries and D65 white
# chromaticities; the white point is its row sums, so pure white maps
# to exactly L=100, a=b=0.
_SRGB_TO_XYZ = np.array(
    [
        [0.41239079926595934, 0.357584339383878, 0.1804807884018343],
        [0.21263900587151027, 0.715168678767756, 0.07219231536073371],
        [0.01933081871559182, 0.11919477979462598, 0.9505321522496607],
    ]
)
_D65 = _SRGB_TO_XYZ.sum(axis=1)

_LUMA = np.array([0.299, 0.587, 0.114])


class ColorSpace(enum.Enum):
    RGB8 = "rgb8"
    GRAY8 = "gray8"
    GRAYF = "grayf"
    LAB = "lab"
    HSV = "hsv"


_CHANNELS = {
    ColorSpace.RGB8: 3,
    ColorSpace.GRAY8: 1,
    ColorSpace.GRAYF: 1,
    ColorSpace.LAB: 3,
    ColorSpace.HSV: 3,
}


@dataclass(frozen=True)
class RasterImage:
    """Decoded pixel grid in a declared color space.

    ``data`` is row-major: shape (h, w) for single-channel spaces and
    (h, w, 3) otherwise.  RGB8/GRAY8 are uint8; everything else float64.
    """

    data: np.ndarray
    space: ColorSpace

    def __post_init__(self):
        d = self.data
        want = _CHANNELS[self.space]
        if want == 1 and d.ndim != 2:
            raise ValueError(f"{self.space} image must be 2-d, got shape {d.shape}")
        if want == 3 and (d.ndim != 3 or d.shape[2] != 3):
            raise ValueError(f"{self.space} image must be (h, w, 3), got shape {d.shape}")
        if d.shape[0] < 1 or d.shape[1] < 1:
            raise ValueError("image must be at least 1x1")
        if self.space in (ColorSpace.RGB8, ColorSpace.GRAY8):
            if d.dtype != np.uint8:
                raise ValueError(f"{self.space} image must be uint8, got {d.dtype}")
        elif d.dtype != np.float64:
            raise ValueError(f"{self.space} image must be float64, got {d.dtype}")
        d.setflags(write=False)

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return _CHANNELS[self.space]

    def require(self, *spaces: ColorSpace) -> None:
        if self.space not in spaces:
            names = ", ".join(s.name for s in spaces)
            raise WrongColorSpaceError(f"expected {names}, got {self.space.name}")


_decode_lock = threading.Lock()
_decode_calls = 0


def decode_call_count() -> int:
    """Number of decode_image calls since the last reset (test hook)."""
    return _decode_calls


def reset_decode_call_count() -> None:
    global _decode_calls
    with _decode_lock:
        _decode_calls = 0


def decode_image(data: bytes) -> RasterImage:
    """Decode a PNG or JPEG byte stream to an RGB8 image.

    Grayscale files are expanded to three identical channels and any
    alpha channel is dropped.
    """
    global _decode_calls
    with _decode_lock:
        _decode_calls += 1
    try:
        img = Image.open(io.BytesIO(data))
    except UnidentifiedImageError as exc:
        raise UnsupportedFormatError("not a recognizable image stream") from exc
    if img.format not in ("PNG", "JPEG"):
        raise UnsupportedFormatError(f"unsupported format {img.format!r} (PNG and JPEG only)")
    try:
        rgb = img.convert("RGB")
        arr = np.asarray(rgb, dtype=np.uint8)
    except OSError as exc:
        raise CorruptStreamError(f"cannot decode {img.format} stream: {exc}") from exc
    return RasterImage(arr.copy(), ColorSpace.RGB8)


def to_grayscale(img: RasterImage) -> RasterImage:
    """BT.601 luma of an RGB8 image, rounded half-up to uint8."""
    img.require(ColorSpace.RGB8)
    luma = img.data.astype(np.float64) @ _LUMA
    out = np.clip(np.floor(luma + 0.5), 0, 255).astype(np.uint8)
    return RasterImage(out, ColorSpace.GRAY8)


def _srgb_lut() -> np.ndarray:
    c = np.arange(256) / 255.0
    return np.where(c <= 0.04045, c / 12.92, ((c + 0.055) / 1.055) ** 2.4)


_SRGB_LUT = _srgb_lut()


def rgb_to_lab(img: RasterImage) -> RasterImage:
    """sRGB (D65) to CIELAB; L in [0, 100]."""
    img.require(ColorSpace.RGB8)
    linear = _SRGB_LUT[img.data]
    # elementwise rather than BLAS matmul: identical pixels must yield
    # bit-identical Lab values
    m = _SRGB_TO_XYZ
    xyz = np.empty_like(linear)
    for row in range(3):
        xyz[..., row] = (
            linear[..., 0] * m[row, 0] + linear[..., 1] * m[row, 1] + linear[..., 2] * m[row, 2]
        )
    t = xyz / _D65
    delta = 6.0 / 29.0
    f = np.where(t > delta**3, np.cbrt(t), t / (3 * delta**2) + 4.0 / 29.0)
    lab = np.empty_like(xyz)
    lab[..., 0] = 116.0 * f[..., 1] - 16.0
    lab[..., 1] = 500.0 * (f[..., 0] - f[..., 1])
    lab[..., 2] = 200.0 * (f[..., 1] - f[..., 2])
    return RasterImage(lab, ColorSpace.LAB)


def lab_lightness(img: RasterImage) -> np.ndarray:
    """L channel of the Lab conversion as a plain (h, w) float array."""
    return np.ascontiguousarray(rgb_to_lab(img).data[..., 0])


def rgb_to_hsv(img: RasterImage) -> RasterImage:
    """Hexcone HSV with H, S, V all in [0, 1] (H in [0, 1))."""
    img.require(ColorSpace.RGB8)
    rgb = img.data.astype(np.float64) / 255.0
    r, g, b = rgb[..., 0], rgb[..., 1], rgb[..., 2]
    maxc = rgb.max(axis=-1)
    minc = rgb.min(axis=-1)
    span = maxc - minc
    v = maxc
    s = np.where(maxc > 0, span / np.where(maxc > 0, maxc, 1.0), 0.0)
    safe_span = np.where(span > 0, span, 1.0)
    rc = (maxc - r) / safe_span
    gc = (maxc - g) / safe_span
    bc = (maxc - b) / safe_span
    h = np.select(
        [span == 0, maxc == r, maxc == g],
        [0.0, bc - gc, 2.0 + rc - bc],
        default=4.0 + gc - rc,
    )
    h = (h / 6.0) % 1.0
    return RasterImage(np.stack([h, s, v], axis=-1), ColorSpace.HSV)


def hsv_to_rgb(img: RasterImage) -> RasterImage:
    """Inverse hexcone conversion back to RGB8 (rounded half-up)."""
    img.require(ColorSpace.HSV)
    h, s, v = img.data[..., 0], img.data[..., 1], img.data[..., 2]
    h6 = (h % 1.0) * 6.0
    i = np.floor(h6).astype(np.int64) % 6
    f = h6 - np.floor(h6)
    p = v * (1.0 - s)
    q = v * (1.0 - s * f)
    t = v * (1.0 - s * (1.0 - f))
    r = np.choose(i, [v, q, p, p, t, v])
    g = np.choose(i, [t, v, v, q, p, p])
    b = np.choose(i, [p, p, t, v, v, q])
    rgb = np.stack([r, g, b], axis=-1) * 255.0
    out = np.clip(np.floor(rgb + 0.5), 0, 255).astype(np.uint8)
    return RasterImage(out, ColorSpace.RGB8)


class ResizeFilter(enum.Enum):
    BILINEAR = "bilinear"
    NEAREST = "nearest"


_PIL_FILTER = {
    ResizeFilter.BILINEAR: Image.Resampling.BILINEAR,
    ResizeFilter.NEAREST: Image.Resampling.NEAREST,
}


@dataclass(frozen=True)
class ResizePolicy:
    """How (and whether) to resize before a metric pipeline.

    Modes: ``none`` (identity), ``long_side`` (longer side scaled to n,
    aspect kept), ``max_pixels`` (uniform downscale until w*h <= n,
    never upscales), ``exact`` (may distort).
    """

    mode: str
    n: int = 0
    w: int = 0
    h: int = 0
    filter: ResizeFilter = ResizeFilter.BILINEAR

    @classmethod
    def none(cls) -> "ResizePolicy":
        return cls("none")

    @classmethod
    def long_side(cls, n: int, filter: ResizeFilter = ResizeFilter.BILINEAR) -> "ResizePolicy":
        if n < 1:
            raise ValueError("n must be >= 1")
        return cls("long_side", n=n, filter=filter)

    @classmethod
    def max_pixels(cls, n: int, filter: ResizeFilter = ResizeFilter.BILINEAR) -> "ResizePolicy":
        if n < 1:
            raise ValueError("n must be >= 1")
        return cls("max_pixels", n=n, filter=filter)

    @classmethod
    def exact(cls, w: int, h: int, filter: ResizeFilter = ResizeFilter.BILINEAR) -> "ResizePolicy":
        if w < 1 or h < 1:
            raise ValueError("target dims must be >= 1")
        return cls("exact", w=w, h=h, filter=filter)

    def target_dims(self, width: int, height: int) -> tuple[int, int]:
        if self.mode == "none":
            return width, height
        if self.mode == "exact":
            return self.w, self.h
        if self.mode == "long_side":
            long = max(width, height)
            scale = self.n / long
            if long == width:
                return self.n, max(1, round(height * scale))
            return max(1, round(width * scale)), self.n
        if self.mode == "max_pixels":
            if width * height <= self.n:
                return width, height
            # floor keeps the product <= n (floor(ws)*floor(hs) <= w*h*s^2 = n)
            scale = (self.n / (width * height)) ** 0.5
            return max(1, int(width * scale)), max(1, int(height * scale))
        raise ValueError(f"unknown resize mode {self.mode!r}")


def _resize_array(arr: np.ndarray, w: int, h: int, filt: ResizeFilter) -> np.ndarray:
    resample = _PIL_FILTER[filt]
    if arr.dtype == np.uint8:
        mode = "RGB" if arr.ndim == 3 else "L"
        out = Image.fromarray(arr, mode=mode).resize((w, h), resample)
        return np.asarray(out, dtype=np.uint8)
    if arr.ndim == 2:
        out = Image.fromarray(arr.astype(np.float32), mode="F").resize((w, h), resample)
        return np.asarray(out, dtype=np.float64)
    raise WrongColorSpaceError("resize supports RGB8, Gray8 and GrayF images only")


def resize(img: RasterImage, policy: ResizePolicy) -> RasterImage:
    """Resize per policy; identity returns the input image unchanged."""
    w, h = policy.target_dims(img.width, img.height)
    if (w, h) == (img.width, img.height):
        return img
    return RasterImage(_resize_array(img.data, w, h, policy.filter), img.space)


def pad_to_square_mean_gray(img: RasterImage) -> RasterImage:
    """Pad a grayscale image to a centered square filled with its mean.

    The fill is the half-up-rounded mean for Gray8 and the exact mean
    for GrayF.
    """
    img.require(ColorSpace.GRAY8, ColorSpace.GRAYF)
    h, w = img.data.shape
    side = max(h, w)
    if h == w:
        return img
    mean = float(img.data.mean())
    if img.space is ColorSpace.GRAY8:
        fill = np.uint8(min(255, int(np.floor(mean + 0.5))))
        out = np.full((side, side), fill, dtype=np.uint8)
    else:
        out = np.full((side, side), mean, dtype=np.float64)
    top = (side - h) // 2
    left = (side - w) // 2
    out[top : top + h, left : left + w] = img.data
    return RasterImage(out, img.space)


def crop_center_square_pow2(img: RasterImage) -> RasterImage:
    """Center crop to the largest power-of-two square that fits."""
    h, w = img.data.shape[:2]
    if min(h, w) < 2:
        raise TooSmallError(f"need min dimension >= 2, got {w}x{h}")
    side = 1 << (min(h, w).bit_length() - 1)
    if (h, w) == (side, side):
        return img
    top = (h - side) // 2
    left = (w - side) // 2
    return RasterImage(np.ascontiguousarray(img.data[top : top + side, left : left + side]), img.space)


def rotate_hue(img: RasterImage, degrees: float) -> RasterImage:
    """Rotate hue by the given angle; saturation/value untouched.

    Intermediates stay real-valued; only the final RGB is re-quantized.
    """
    img.require(ColorSpace.RGB8)
    hsv = rgb_to_hsv(img).data.copy()
    hsv[..., 0] = (hsv[..., 0] + degrees / 360.0) % 1.0
    return hsv_to_rgb(RasterImage(hsv, ColorSpace.HSV))


def require_square_pow2(img: RasterImage) -> int:
    """Validate a square power-of-two image and return its side."""
    h, w = img.data.shape[:2]
    if h != w:
        raise NotSquareError(f"need a square image, got {w}x{h}")
    if h & (h - 1) or h < 2:
        raise SideNotPow2Error(f"side must be a power of two >= 2, got {h}")
    return h
