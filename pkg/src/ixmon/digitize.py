"""Recover a traffic series from a rendered plot image.

Pipeline: (1) calibrate the y-axis by exact bitmap-font template matching of
tick labels, fitting a linear value<->row map; (2) trace the topmost
curve-colored pixel per plot column; (3) map columns onto the feed's grid
using the request window (many columns per grid point resolve to their mean);
(4) read the footer's Current value and cross-check it against the traced
curve. Only the documented linear-axis plot grammar is supported.
"""

from __future__ import annotations

import io
import re

import numpy as np
from PIL import Image

from ixmon import plotfont
from ixmon.core import FeedDescriptor, IxmonError, TrafficSample
from ixmon.extract import CrossCheck, ExtractionResult
from ixmon.simulate.render import PlotConfig

#: Per-channel tolerance when matching curve colors (resilient to lossy
#: re-encoding while staying deterministic).
COLOR_TOL = 8

#: Default flag value; the 2.4% figure is the acceptance bound on the
#: simulator corpus, not a rejection threshold.
DEFAULT_CROSS_CHECK_TOLERANCE = 0.05

_UNIT = {"": 1.0, "K": 1e3, "M": 1e6, "G": 1e9, "T": 1e12}
_TICK_RE = re.compile(r"^(\d+(?:\.\d+)?)([KMGT]?)$")
_CURRENT_RE = re.compile(r"Current: (\d+(?:\.\d+)?) ([KMGT]?)bps")


class PlotError(IxmonError):
    pass


class ImageFormatError(PlotError):
    pass


class CalibrationFailed(PlotError):
    """Fewer than two tick labels recognized."""


class CurveAbsent(PlotError):
    """No curve-colored pixels in the plot area."""


def _decode_image(image: bytes, config: PlotConfig) -> np.ndarray:
    try:
        img = Image.open(io.BytesIO(image))
        img.load()
    except Exception as exc:
        raise ImageFormatError(f"cannot decode image: {exc}") from exc
    if img.size != (config.width, config.height):
        raise ImageFormatError(f"expected {config.width}x{config.height}, got {img.size[0]}x{img.size[1]}")
    return np.asarray(img.convert("RGB"))


def _ink_mask(arr: np.ndarray) -> np.ndarray:
    """Near-black pixels (text ink) under the same tolerance as curve colors."""
    return (arr <= COLOR_TOL).all(axis=2)


def _color_mask(arr: np.ndarray, rgb: tuple[int, int, int]) -> np.ndarray:
    """Pixels within the per-channel tolerance band of a color (uint8-safe)."""
    out = None
    for ch, c in enumerate(rgb):
        lo, hi = max(0, c - COLOR_TOL), min(255, c + COLOR_TOL)
        band = (arr[..., ch] >= lo) & (arr[..., ch] <= hi)
        out = band if out is None else out & band
    return out


def _text_bands(ink: np.ndarray, x0: int, x1: int, y0: int, y1: int) -> list[int]:
    """Top rows of contiguous inked row-bands within a column range."""
    region = ink[y0:y1, x0:x1]
    rows_with_ink = np.flatnonzero(region.any(axis=1))
    if rows_with_ink.size == 0:
        return []
    tops = [int(rows_with_ink[0])]
    for prev, cur in zip(rows_with_ink[:-1], rows_with_ink[1:]):
        if cur > prev + 1:
            tops.append(int(cur))
    return [t + y0 for t in tops]


def _parse_tick(text: str) -> float | None:
    m = _TICK_RE.match(text)
    if not m:
        return None
    return float(m.group(1)) * _UNIT[m.group(2)]


def _calibrate(arr: np.ndarray, config: PlotConfig) -> tuple[float, float]:
    """Fit value = a*row + b from recognized tick labels; needs >= 2 ticks."""
    margin = _ink_mask(arr[:, : config.plot_x0 - 1])
    rows, values = [], []
    for top in _text_bands(margin, config.label_x, margin.shape[1], 0, margin.shape[0]):
        text = plotfont.read_text(margin, config.label_x, top)
        value = _parse_tick(text)
        if value is not None:
            rows.append(top + plotfont.GLYPH_H // 2)  # label is centered on its tick row
            values.append(value)
    if len(rows) < 2 or len(set(values)) < 2:
        raise CalibrationFailed(f"recognized {len(rows)} tick labels, need 2 distinct")
    a, b = np.polyfit(np.asarray(rows, dtype=float), np.asarray(values, dtype=float), 1)
    return float(a), float(b)


def _trace_columns(arr: np.ndarray, config: PlotConfig) -> np.ndarray:
    """Topmost curve-colored row per plot column; -1 where no curve pixel."""
    area = np.ascontiguousarray(arr[config.plot_y0 : config.plot_y1, config.plot_x0 : config.plot_x1])
    is_curve = _color_mask(area, config.fill_rgb) | _color_mask(area, config.outline_rgb)
    has_any = is_curve.any(axis=0)
    top = np.where(has_any, is_curve.argmax(axis=0) + config.plot_y0, -1)
    return top


def _read_footer(arr: np.ndarray, config: PlotConfig) -> float | None:
    row0 = config.footer_y - 8
    ink = _ink_mask(arr[row0:, :])
    for top in _text_bands(ink, config.footer_x, ink.shape[1], 0, ink.shape[0]):
        text = plotfont.read_text(ink, config.footer_x, top)
        m = _CURRENT_RE.search(text)
        if m:
            return float(m.group(1)) * _UNIT[m.group(2)]
    return None


def digitize_plot(
    image: bytes,
    feed: FeedDescriptor,
    window: tuple[int, int],
    config: PlotConfig = PlotConfig(),
    cross_check_tolerance: float = DEFAULT_CROSS_CHECK_TOLERANCE,
) -> ExtractionResult:
    """Digitize a plot of the half-open window [t0, t1) on the feed's grid.

    The window comes from feed metadata (the collector knows what it asked
    for); x-axis labels are never relied upon. On a cross-check failure the
    samples are still returned, flagged for quarantine.
    """
    t0, t1 = window
    interval = feed.interval_s
    n = (int(t1) - int(t0)) // interval
    if n <= 0:
        raise ValueError("window must span at least one grid point")
    if n > config.columns:
        raise ValueError(f"window of {n} samples exceeds {config.columns} plot columns")

    arr = _decode_image(image, config)
    a, b = _calibrate(arr, config)

    top_rows = _trace_columns(arr, config)
    traced = top_rows >= 0
    if not traced.any():
        raise CurveAbsent("no curve-colored pixels in plot area")
    col_values = np.maximum(a * top_rows + b, 0.0)

    # columns -> grid points (mean of contributing columns)
    idx = np.arange(config.columns) * n // config.columns
    sums = np.bincount(idx[traced], weights=col_values[traced], minlength=n)
    counts = np.bincount(idx[traced], minlength=n)
    with np.errstate(invalid="ignore"):
        grid_values = np.where(counts > 0, sums / np.maximum(counts, 1), np.nan)

    warnings: list[str] = []
    samples = [
        TrafficSample(feed.feed_id, int(t0) + k * interval, float(grid_values[k]))
        for k in range(n)
        if not np.isnan(grid_values[k])
    ]

    cross_check = None
    quarantined = False
    text_value = _read_footer(arr, config)
    if text_value is None:
        warnings.append("footer text missing or unreadable; no cross-check")
    elif samples:
        cross_check = CrossCheck(text_value_bps=text_value, curve_value_bps=samples[-1].inbound_bps)
        if cross_check.relative_deviation > cross_check_tolerance:
            quarantined = True
            warnings.append(
                "cross-check failed: text value "
                f"{text_value:.4g} vs curve {samples[-1].inbound_bps:.4g} "
                f"({cross_check.relative_deviation:.2%} > {cross_check_tolerance:.2%})"
            )

    return ExtractionResult(
        samples=samples,
        method="plot_image",
        cross_check=cross_check,
        warnings=warnings,
        quarantined=quarantined,
    )
