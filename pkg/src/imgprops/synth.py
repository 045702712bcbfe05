"""Random-phase noise images with a prescribed spectral decay.

Test and benchmark support: the acceptance suite recovers known slopes
from these images.  Not part of the metric API.
"""

from __future__ import annotations

import numpy as np
import scipy.fft as sfft

from .raster import ColorSpace, RasterImage


def random_phase_field(
    side: int,
    alpha: float,
    rng: np.random.Generator,
    amplitude_scale=None,
) -> np.ndarray:
    """Real field whose Fourier amplitude is exactly r^(-alpha), DC zero.

    ``amplitude_scale``, if given, maps the continuous radius array to a
    multiplicative factor on the amplitudes (used to notch or ripple
    the spectrum in tests).
    """
    if side < 4 or side & (side - 1):
        raise ValueError("side must be a power of two >= 4")
    half = side // 2
    ky = sfft.fftfreq(side, d=1.0 / side)
    kx = np.arange(half + 1, dtype=np.float64)
    radius = np.sqrt(ky[:, None] ** 2 + kx[None, :] ** 2)
    with np.errstate(divide="ignore"):
        amp = np.where(radius > 0, radius ** (-alpha), 0.0)
    if amplitude_scale is not None:
        amp = amp * amplitude_scale(radius)
    phase = rng.uniform(0.0, 2.0 * np.pi, size=amp.shape)
    spec = amp * np.exp(1j * phase)
    # columns kx=0 and kx=side/2 must be Hermitian about ky=0
    for col in (0, half):
        spec[half + 1 :, col] = np.conj(spec[1:half, col])[::-1]
        spec[0, col] = amp[0, col]
        spec[half, col] = amp[half, col]
    return sfft.irfft2(spec, s=(side, side))


def random_phase_image(
    side: int,
    alpha: float,
    rng: np.random.Generator,
    quantize: bool = True,
    amplitude_scale=None,
) -> RasterImage:
    """Random-phase image; uint8 grayscale rescaled to [0, 255] by default.

    With ``quantize=False`` the raw float field is returned (exact
    power-law spectrum, no quantization noise floor).
    """
    field = random_phase_field(side, alpha, rng, amplitude_scale)
    if not quantize:
        return RasterImage(field, ColorSpace.GRAYF)
    lo, hi = field.min(), field.max()
    if hi <= lo:
        gray = np.zeros(field.shape, dtype=np.uint8)
    else:
        gray = np.floor((field - lo) / (hi - lo) * 255.0 + 0.5).astype(np.uint8)
    return RasterImage(gray, ColorSpace.GRAY8)
