"""Command-line batch driver.

Precedence: CLI flags > config file > defaults.  Exit codes: 0 success,
1 configuration error, 2 output error, 3 abort-on-failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import __version__
from .batch import AbortRun, RunConfig, run_batch
from .errors import ConfigError, ImgpropsError, OutputError
from .metrics import MetricParams, all_metric_names, resolve_metrics
from .raster import ResizeFilter, ResizePolicy


def parse_resize(text: str) -> ResizePolicy:
    """Parse 'none', 'long:N', 'maxpx:N' or 'exact:WxH', optionally '@nearest'."""
    spec = text.strip()
    filt = ResizeFilter.BILINEAR
    if "@" in spec:
        spec, _, filt_name = spec.partition("@")
        try:
            filt = ResizeFilter(filt_name)
        except ValueError:
            raise ConfigError(f"unknown resize filter {filt_name!r} (bilinear or nearest)")
    try:
        if spec == "none" or spec == "":
            return ResizePolicy.none()
        mode, _, arg = spec.partition(":")
        if mode == "long":
            return ResizePolicy.long_side(int(arg), filt)
        if mode == "maxpx":
            return ResizePolicy.max_pixels(int(arg), filt)
        if mode == "exact":
            w, _, h = arg.partition("x")
            return ResizePolicy.exact(int(w), int(h), filt)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"bad resize spec {text!r}: {exc}") from exc
    raise ConfigError(f"unknown resize mode {text!r} (none, long:N, maxpx:N, exact:WxH)")


def read_config_file(path: str) -> dict[str, str]:
    """Flat key=value lines; '#' starts a comment."""
    values: dict[str, str] = {}
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, _, value = line.partition("=")
        values[key.strip()] = value.strip()
    return values


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="imgprops",
        description="Compute objective image properties over image files and write one CSV row per image.",
    )
    parser.add_argument("--in", dest="inputs", nargs="+", action="extend", default=None,
                        metavar="PATH", help="input files, directories or globs")
    parser.add_argument("--metrics", default=None,
                        help="comma-separated metric names, or 'all' (default)")
    parser.add_argument("--out", default=None, help="output CSV path")
    parser.add_argument("--workers", type=int, default=None, help="worker threads over images (default 1)")
    parser.add_argument("--config", default=None, help="key=value config file")
    parser.add_argument("--weights", default=None, help="filter-bank weight file (CNN metrics)")
    parser.add_argument("--resize", default=None,
                        help="shared pre-resize: none | long:N | maxpx:N | exact:WxH [@nearest]")
    parser.add_argument("--fail-policy", dest="fail_policy", choices=("skip", "abort"), default=None)
    parser.add_argument("--list-metrics", action="store_true", help="print metric names and exit")
    parser.add_argument("--version", action="store_true", help="print version and exit")
    return parser


def parse_config(argv: list[str]) -> RunConfig:
    """Merge flags, config file and defaults into a RunConfig."""
    args = _build_parser().parse_args(argv)
    file_cfg = read_config_file(args.config) if args.config else {}

    def pick(flag_value, key: str, default):
        if flag_value is not None:
            return flag_value
        if key in file_cfg:
            return file_cfg[key]
        return default

    inputs = args.inputs if args.inputs is not None else (
        [p.strip() for p in file_cfg["in"].split(",") if p.strip()] if "in" in file_cfg else []
    )
    if not inputs:
        raise ConfigError("no inputs given (use --in or the 'in' config key)")
    output = pick(args.out, "out", None)
    if output is None:
        raise ConfigError("no output path given (use --out or the 'out' config key)")
    metric_spec = str(pick(args.metrics, "metrics", "all"))
    names = all_metric_names() if metric_spec == "all" else [
        m.strip() for m in metric_spec.split(",") if m.strip()
    ]
    if not names:
        raise ConfigError("empty metric list")
    resolve_metrics(names)  # fail fast on unknown names
    try:
        workers = int(pick(args.workers, "workers", 1))
    except ValueError as exc:
        raise ConfigError(f"bad workers value: {exc}") from exc
    if workers < 1:
        raise ConfigError("workers must be >= 1")

    params = MetricParams(shared_resize=parse_resize(str(pick(args.resize, "resize", "none"))))
    if "color_entropy.include_achromatic" in file_cfg:
        params.include_achromatic = file_cfg["color_entropy.include_achromatic"].lower() in ("1", "true", "yes")
    if "fourier.cook_rule" in file_cfg:
        rule = file_cfg["fourier.cook_rule"]
        if rule not in ("4/n", "n/4"):
            raise ConfigError(f"fourier.cook_rule must be '4/n' or 'n/4', got {rule!r}")
        params.cook_rule = rule
    try:
        if "fourier.redies_bins" in file_cfg:
            params.redies_bins = int(file_cfg["fourier.redies_bins"])
        if "phog.self_similarity_area" in file_cfg:
            params.phog_area = int(file_cfg["phog.self_similarity_area"])
        if "phog.weights" in file_cfg:
            parts = [float(x) for x in file_cfg["phog.weights"].split(",")]
            if len(parts) != 3:
                raise ConfigError("phog.weights needs three comma-separated values")
            params.phog_weights = tuple(parts)
        if "edges.max_pixels" in file_cfg:
            params.edges_max_pixels = int(file_cfg["edges.max_pixels"])
        if "eoe.workers" in file_cfg:
            params.eoe_workers = int(file_cfg["eoe.workers"])
        if "cnn.grid" in file_cfg:
            params.cnn_grid = int(file_cfg["cnn.grid"])
    except ValueError as exc:
        raise ConfigError(f"bad config value: {exc}") from exc

    weights = pick(args.weights, "weights", None)
    params.weights_path = weights
    return RunConfig(
        inputs=list(inputs),
        metrics=names,
        output=str(output),
        workers=workers,
        fail_policy=str(pick(args.fail_policy, "fail_policy", "skip")),
        weights_path=weights,
        params=params,
    )


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:]) if argv is None else list(argv)
    if "--version" in argv:
        print(__version__)
        return 0
    if "--list-metrics" in argv:
        for name in all_metric_names():
            print(name)
        return 0
    try:
        cfg = parse_config(argv)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    try:
        summary = run_batch(cfg)
    except AbortRun as exc:
        print(f"aborted: {exc}", file=sys.stderr)
        return 3
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OutputError as exc:
        print(f"output error: {exc}", file=sys.stderr)
        return 2
    except ImgpropsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if summary.failures:
        print(f"{summary.rows_written} rows written, {len(summary.failures)} image(s) had problems",
              file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
