"""Batch driver: enumerate images, compute rows in a pool, write one CSV.

Output is deterministic: images are processed in lexicographic filename
order, one row per image in that order regardless of completion order,
and cell formatting is fixed (6 significant digits, empty cell for
NaN).  Worker count never changes the bytes written.
"""

from __future__ import annotations

import glob
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .cnn import load_conv1_weights
from .errors import ImgpropsError, MissingInputError, OutputError
from .metrics import ImageContext, MetricDef, MetricParams, compute_row, resolve_metrics
from .raster import decode_image

IMAGE_SUFFIXES = {".png", ".jpg", ".jpeg"}


@dataclass
class RunConfig:
    inputs: list[str]
    metrics: list[str]
    output: str
    workers: int = 1
    fail_policy: str = "skip"  # or "abort"
    weights_path: str | None = None
    params: MetricParams = field(default_factory=MetricParams)


@dataclass
class BatchSummary:
    rows_written: int
    failures: list[tuple[str, str]]  # (filename, reason)


class AbortRun(ImgpropsError):
    """Raised when fail_policy=abort hits a bad image."""


def enumerate_images(inputs: list[str]) -> list[Path]:
    """Expand files, directories and globs; sort lexicographically."""
    found: set[Path] = set()
    for spec in inputs:
        path = Path(spec)
        if path.is_dir():
            for child in path.iterdir():
                if child.is_file() and child.suffix.lower() in IMAGE_SUFFIXES:
                    found.add(child)
        elif path.is_file():
            found.add(path)
        else:
            matches = [Path(p) for p in glob.glob(spec)]
            found.update(p for p in matches if p.is_file())
    if not found:
        raise MissingInputError(f"no input images found under {inputs!r}")
    return sorted(found, key=str)


def format_real(value: float) -> str:
    """6 significant digits; NaN becomes an empty cell; plain exponents."""
    if value is None or math.isnan(value):
        return ""
    text = f"{value:.6g}"
    if "e" in text:
        mantissa, exponent = text.split("e")
        sign = "-" if exponent.startswith("-") else ""
        text = f"{mantissa}e{sign}{int(exponent.lstrip('+-'))}"
    return text


def header_for(metrics: list[MetricDef]) -> list[str]:
    cols = ["filename"]
    for metric in metrics:
        cols.extend(metric.columns)
    cols.append("error")
    return cols


def _row_for_image(path: Path, metrics: list[MetricDef], params: MetricParams, weights) -> tuple[list[str], str]:
    """(formatted cells, error note); decode failures leave cells empty."""
    n_cells = sum(len(m.columns) for m in metrics)
    try:
        img = decode_image(path.read_bytes())
    except (ImgpropsError, OSError) as exc:
        return [""] * n_cells, f"decode failed: {exc}"
    ctx = ImageContext(img, params, weights)
    values, notes = compute_row(ctx, metrics)
    return [format_real(v) for v in values], "; ".join(notes)


def run_batch(cfg: RunConfig) -> BatchSummary:
    """Execute the run and write the CSV; returns a summary."""
    metrics = resolve_metrics(cfg.metrics)
    weights = None
    if any(m.needs_weights for m in metrics):
        path = cfg.weights_path
        if path is None:
            from .cnn import default_weights_path

            path = default_weights_path()
        weights = load_conv1_weights(path)
    images = enumerate_images(cfg.inputs)
    header = header_for(metrics)
    failures: list[tuple[str, str]] = []

    def work(path: Path) -> tuple[Path, list[str], str]:
        cells, note = _row_for_image(path, metrics, cfg.params, weights)
        return path, cells, note

    out_path = Path(cfg.output)
    try:
        handle = out_path.open("w", encoding="utf-8", newline="")
    except OSError as exc:
        raise OutputError(f"cannot write {cfg.output}: {exc}") from exc
    rows_written = 0
    try:
        with handle:
            handle.write(",".join(header) + "\n")
            if cfg.workers <= 1:
                results = map(work, images)
                rows_iter = results
            else:
                pool = ThreadPoolExecutor(max_workers=cfg.workers)
                rows_iter = pool.map(work, images)
            for path, cells, note in rows_iter:
                if note:
                    failures.append((path.name, note))
                    if cfg.fail_policy == "abort":
                        raise AbortRun(f"{path.name}: {note}")
                handle.write(",".join([path.name, *cells, _csv_escape(note)]) + "\n")
                rows_written += 1
            if cfg.workers > 1:
                pool.shutdown(wait=True)
    except OSError as exc:
        raise OutputError(f"cannot write {cfg.output}: {exc}") from exc
    return BatchSummary(rows_written, failures)


def _csv_escape(text: str) -> str:
    if any(ch in text for ch in ",\"\n"):
        return '"' + text.replace('"', '""') + '"'
    return text
