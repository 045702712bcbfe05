"""Objective image properties: color, spectral, fractal, edge and
filter-bank statistics over raster images, with a batch CSV driver."""

__version__ = "0.1.0"

from .balance import balance_score, dcm, homogeneity, mirror_symmetry
from .cnn import cnn_self_similarity, cnn_symmetry, cnn_variances, conv1_forward, load_conv1_weights
from .edges import edge_density, eoe_first_order, eoe_second_order, gabor_responses
from .fourier import radial_spectrum, slope_mather, slope_redies, slope_spehar
from .fractal import fractal_dim_2d, fractal_dim_3d
from .phog import phog_anisotropy, phog_complexity, phog_self_similarity
from .raster import ColorSpace, RasterImage, ResizePolicy, decode_image
from .stats import (
    aspect_ratio,
    channel_stats,
    color_entropy,
    image_size,
    lightness_entropy,
    rms_contrast,
)

__all__ = [
    "ColorSpace",
    "RasterImage",
    "ResizePolicy",
    "aspect_ratio",
    "balance_score",
    "channel_stats",
    "cnn_self_similarity",
    "cnn_symmetry",
    "cnn_variances",
    "color_entropy",
    "conv1_forward",
    "dcm",
    "decode_image",
    "edge_density",
    "eoe_first_order",
    "eoe_second_order",
    "fractal_dim_2d",
    "fractal_dim_3d",
    "gabor_responses",
    "homogeneity",
    "image_size",
    "lightness_entropy",
    "load_conv1_weights",
    "mirror_symmetry",
    "phog_anisotropy",
    "phog_complexity",
    "phog_self_similarity",
    "radial_spectrum",
    "rms_contrast",
    "slope_mather",
    "slope_redies",
    "slope_spehar",
]
