"""Metric registry: stable identifiers, column names and compute functions.

Each metric runs on the shared decoded image and applies its own
mandated pre-processing (area caps, crops, fixed input sizes), so no
metric ever sees another metric's resized data.  Intermediates that
*are* shared by definition (the Gabor response field, the filter-bank
forward pass) are cached per image.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

from . import balance, cnn, edges, fourier, fractal, phog, stats
from .errors import ImgpropsError, UnknownMetricError, WeightFileMissingError
from .raster import RasterImage, ResizePolicy, resize


@dataclass
class MetricParams:
    """Per-run knobs; defaults follow each metric's documented rule."""

    shared_resize: ResizePolicy = field(default_factory=ResizePolicy.none)
    include_achromatic: bool = True
    cook_rule: str = "4/n"
    redies_bins: int = fourier.REDIES_BINS
    phog_bins: int = phog.DEFAULT_BINS
    phog_weights: tuple[float, float, float] = (1.0, 1.0, 1.0)
    phog_area: int = phog.SELF_SIMILARITY_AREA
    edges_max_pixels: int = edges.MAX_PIXELS
    eoe_workers: int = 1
    cnn_grid: int = 8
    weights_path: str | None = None


class ImageContext:
    """One decoded image plus lazily cached shared intermediates."""

    def __init__(self, img: RasterImage, params: MetricParams, conv_weights=None):
        self.image = resize(img, params.shared_resize)
        self.params = params
        self._conv_weights = conv_weights
        self._edge_field = None
        self._conv_responses = None

    @property
    def edge_field(self):
        if self._edge_field is None:
            self._edge_field = edges.gabor_responses(self.image, self.params.edges_max_pixels)
        return self._edge_field

    @property
    def conv_weights(self):
        if self._conv_weights is None:
            raise WeightFileMissingError("a CNN metric is selected but no weight file is loaded")
        return self._conv_weights

    @property
    def conv_responses(self):
        if self._conv_responses is None:
            self._conv_responses = cnn.conv1_forward(self.image, self.conv_weights)
        return self._conv_responses


@dataclass(frozen=True)
class MetricDef:
    name: str
    columns: tuple[str, ...]
    compute: Callable[[ImageContext], list[float]]
    needs_weights: bool = False


def _stats_metric(space: str) -> Callable[[ImageContext], list[float]]:
    def compute(ctx: ImageContext) -> list[float]:
        cs = stats.channel_stats(ctx.image, space)
        return [*cs.mean, *cs.std]

    return compute


def _cnn_self_similarity(ctx: ImageContext) -> list[float]:
    return [cnn.self_similarity_from_responses(ctx.conv_responses)]


def _cnn_variances(ctx: ImageContext) -> list[float]:
    out = cnn.variances_from_responses(ctx.conv_responses, ctx.params.cnn_grid)
    return [out["sparseness"], out["variability"]]


_REGISTRY: list[MetricDef] = [
    MetricDef("image_size", ("image_size",), lambda c: [stats.image_size(c.image)]),
    MetricDef("aspect_ratio", ("aspect_ratio",), lambda c: [stats.aspect_ratio(c.image)]),
    MetricDef(
        "rgb_stats",
        ("rgb_r_mean", "rgb_g_mean", "rgb_b_mean", "rgb_r_std", "rgb_g_std", "rgb_b_std"),
        _stats_metric("rgb"),
    ),
    MetricDef(
        "hsv_stats",
        ("hsv_h_mean", "hsv_s_mean", "hsv_v_mean", "hsv_h_std", "hsv_s_std", "hsv_v_std"),
        _stats_metric("hsv"),
    ),
    MetricDef(
        "lab_stats",
        ("lab_l_mean", "lab_a_mean", "lab_b_mean", "lab_l_std", "lab_a_std", "lab_b_std"),
        _stats_metric("lab"),
    ),
    MetricDef("rms_contrast", ("rms_contrast",), lambda c: [stats.rms_contrast(c.image)]),
    MetricDef("lightness_entropy", ("lightness_entropy",), lambda c: [stats.lightness_entropy(c.image)]),
    MetricDef(
        "color_entropy",
        ("color_entropy",),
        lambda c: [stats.color_entropy(c.image, c.params.include_achromatic)],
    ),
    MetricDef(
        "slope_spehar",
        ("slope_spehar",),
        lambda c: [fourier.slope_spehar(c.image, c.params.cook_rule).slope],
    ),
    MetricDef(
        "slope_redies",
        ("slope_redies", "fourier_sigma"),
        lambda c: (lambda f: [f.slope, f.sigma])(fourier.slope_redies(c.image, c.params.redies_bins)),
    ),
    MetricDef("slope_mather", ("slope_mather",), lambda c: [fourier.slope_mather(c.image).slope]),
    MetricDef("fractal_2d", ("fractal_dim_2d",), lambda c: [fractal.fractal_dim_2d(c.image)]),
    MetricDef("fractal_3d", ("fractal_dim_3d",), lambda c: [fractal.fractal_dim_3d(c.image)]),
    MetricDef("phog_complexity", ("phog_complexity",), lambda c: [phog.phog_complexity(c.image)]),
    MetricDef("phog_anisotropy", ("phog_anisotropy",), lambda c: [phog.phog_anisotropy(c.image)]),
    MetricDef(
        "phog_self_similarity",
        ("phog_self_similarity",),
        lambda c: [
            phog.phog_self_similarity(c.image, c.params.phog_weights, normalize_area=c.params.phog_area)
        ],
    ),
    MetricDef(
        "edge_density",
        ("edge_density", "edge_density_raw"),
        lambda c: list(edges.edge_density(c.edge_field)),
    ),
    MetricDef("eoe_first_order", ("eoe_first_order",), lambda c: [edges.eoe_first_order(c.edge_field)]),
    MetricDef(
        "eoe_second_order",
        ("eoe_second_order",),
        lambda c: [edges.eoe_second_order(c.edge_field, workers=c.params.eoe_workers)],
    ),
    MetricDef("mirror_symmetry", ("mirror_symmetry",), lambda c: [balance.mirror_symmetry(c.image)]),
    MetricDef("balance_score", ("balance_score",), lambda c: [balance.balance_score(c.image)]),
    MetricDef("dcm", ("dcm",), lambda c: [balance.dcm(c.image)]),
    MetricDef("homogeneity", ("homogeneity",), lambda c: [balance.homogeneity(c.image)]),
    MetricDef(
        "cnn_symmetry",
        ("cnn_symmetry_lr", "cnn_symmetry_ud", "cnn_symmetry_combined"),
        lambda c: (lambda s: [s["left_right"], s["up_down"], s["combined"]])(
            cnn.cnn_symmetry(c.image, c.conv_weights)
        ),
        needs_weights=True,
    ),
    MetricDef("cnn_self_similarity", ("cnn_self_similarity",), _cnn_self_similarity, needs_weights=True),
    MetricDef(
        "cnn_variances",
        ("cnn_sparseness", "cnn_variability"),
        _cnn_variances,
        needs_weights=True,
    ),
]

_BY_NAME = {m.name: m for m in _REGISTRY}


def all_metric_names() -> list[str]:
    return [m.name for m in _REGISTRY]


def resolve_metrics(names: list[str]) -> list[MetricDef]:
    """Map metric identifiers to definitions, preserving request order."""
    out = []
    for name in names:
        if name not in _BY_NAME:
            valid = ", ".join(all_metric_names())
            raise UnknownMetricError(f"unknown metric {name!r}; valid metrics: {valid}")
        out.append(_BY_NAME[name])
    return out


def compute_row(ctx: ImageContext, metrics: list[MetricDef]) -> tuple[list[float], list[str]]:
    """Evaluate metrics for one image; hard per-metric errors become NaNs.

    Returns the flat cell values plus any error notes.
    """
    values: list[float] = []
    notes: list[str] = []
    for metric in metrics:
        try:
            cells = metric.compute(ctx)
        except ImgpropsError as exc:
            cells = [math.nan] * len(metric.columns)
            notes.append(f"{metric.name}: {exc}")
        values.extend(cells)
    return values, notes
