"""Render a traffic window in the three feed formats.

The JSON and HTML forms round-trip losslessly (floats serialized via repr).
The plot form is a pixel-exact 800x400 PNG: filled inbound curve, bitmap-font
tick labels on a linear y-axis, and a Current/Average/Max footer. Everything
here is the wire contract the extractors consume.
"""

from __future__ import annotations

import json
import struct
import zlib
from dataclasses import dataclass

import numpy as np

from ixmon import plotfont
from ixmon.core import IxmonError, TimeSeries

#: Cosmetic outbound rate emitted alongside the inbound series; parsed by
#: extractors where present but never stored.
OUT_RATIO = 0.85

UNIT_FACTORS = (("T", 1e12), ("G", 1e9), ("M", 1e6), ("K", 1e3))


class PlotWindowTooLong(IxmonError):
    """More samples than plot columns."""


@dataclass(frozen=True)
class PlotConfig:
    width: int = 800
    height: int = 400
    plot_x0: int = 60
    plot_x1: int = 740  # exclusive
    plot_y0: int = 20
    plot_y1: int = 340  # exclusive; baseline row is plot_y1 - 1
    fill_rgb: tuple[int, int, int] = (0, 204, 0)
    outline_rgb: tuple[int, int, int] = (0, 128, 0)
    label_x: int = 2
    footer_x: int = 60
    footer_y: int = 352

    @property
    def columns(self) -> int:
        return self.plot_x1 - self.plot_x0

    @property
    def baseline_row(self) -> int:
        return self.plot_y1 - 1

    @property
    def value_rows(self) -> int:
        """Row span between value 0 (baseline) and y-max (top)."""
        return self.plot_y1 - 1 - self.plot_y0


def ladder_ymax(vmax: float) -> float:
    """Smallest value on the 1/2/5 x 10^k ladder that is >= vmax."""
    if vmax <= 0:
        return 1.0
    exp = np.floor(np.log10(vmax))
    for k in (exp - 1, exp, exp + 1, exp + 2):
        for m in (1.0, 2.0, 5.0):
            candidate = m * 10.0**k
            if candidate >= vmax:
                return candidate
    raise AssertionError("unreachable")


def format_tick(value: float) -> str:
    """Tick label text: scaled mantissa plus unit letter, e.g. 50G, 2.5M, 0."""
    unit, factor = "", 1.0
    for u, f in UNIT_FACTORS:
        if value >= f:
            unit, factor = u, f
            break
    scaled = value / factor
    if scaled == int(scaled):
        return f"{int(scaled)}{unit}"
    return f"{scaled:.1f}{unit}"


def format_footer_value(value: float) -> str:
    unit, factor = "", 1.0
    for u, f in UNIT_FACTORS:
        if value >= f:
            unit, factor = u, f
            break
    return f"{value / factor:.1f} {unit}bps"


def api_document(series: TimeSeries) -> dict:
    samples = [
        {"ts": int(ts), "in_bps": float(v), "out_bps": float(v) * OUT_RATIO}
        for ts, v in series
    ]
    return {"interval_s": series.interval_s, "samples": samples}


def render_api(series: TimeSeries) -> bytes:
    return json.dumps(api_document(series)).encode()


def render_html(series: TimeSeries) -> bytes:
    payload = json.dumps(api_document(series))
    page = (
        "<!DOCTYPE html>\n<html><head><title>IXP traffic</title></head>\n<body>\n"
        "<h1>Public peering traffic</h1>\n"
        f'<script id="traffic-data" type="application/json">{payload}</script>\n'
        "<p>Aggregate inbound/outbound rates over the public fabric.</p>\n"
        "</body></html>\n"
    )
    return page.encode()


def value_to_row(value: float, ymax: float, config: PlotConfig) -> int:
    frac = min(max(value / ymax, 0.0), 1.0)
    return config.baseline_row - int(round(frac * config.value_rows))


def render_plot(series: TimeSeries, config: PlotConfig = PlotConfig()) -> bytes:
    n = len(series)
    if n == 0:
        raise ValueError("plot window must be non-empty")
    if n > config.columns:
        raise PlotWindowTooLong(f"{n} samples exceed {config.columns} plot columns")

    values = series.values
    ymax = ladder_ymax(float(values.max()))
    canvas = np.full((config.height, config.width, 3), 255, dtype=np.uint8)

    # 1-px border just outside the plot area
    x0, x1, y0, y1 = config.plot_x0, config.plot_x1, config.plot_y0, config.plot_y1
    canvas[y0 - 1, x0 - 1 : x1 + 1] = 0
    canvas[y1, x0 - 1 : x1 + 1] = 0
    canvas[y0 - 1 : y1 + 1, x0 - 1] = 0
    canvas[y0 - 1 : y1 + 1, x1] = 0

    # filled curve: each column shows sample floor(j * n / columns)
    cols = np.arange(config.columns)
    sample_idx = cols * n // config.columns
    col_values = values[sample_idx]
    frac = np.clip(col_values / ymax, 0.0, 1.0)
    top_rows = config.baseline_row - np.rint(frac * config.value_rows).astype(int)
    row_grid = np.arange(y0, y1)[:, None]
    fill_mask = row_grid >= top_rows[None, :]
    plot_area = canvas[y0:y1, x0:x1]
    plot_area[fill_mask] = config.fill_rgb
    plot_area[top_rows - y0, cols] = config.outline_rgb

    # y-axis tick labels, vertically centered on their value row
    for tick_value in (0.0, ymax / 2.0, ymax):
        row = value_to_row(tick_value, ymax, config)
        plotfont.draw_text(canvas, config.label_x, row - 3, format_tick(tick_value))

    current, average, peak = float(values[-1]), float(values.mean()), float(values.max())
    footer = (
        f"Current: {format_footer_value(current)}  "
        f"Average: {format_footer_value(average)}  "
        f"Max: {format_footer_value(peak)}"
    )
    plotfont.draw_text(canvas, config.footer_x, config.footer_y, footer)

    return encode_png(canvas)


def encode_png(rgb: np.ndarray) -> bytes:
    """Minimal RGB8 PNG encoder (filter 0, fast deflate).

    Served hot on every plot request; hand-rolling the container keeps the
    encode well under the per-request latency budget. Any standard decoder
    reads it back pixel-exactly.
    """
    h, w, _ = rgb.shape
    raw = np.empty((h, 1 + w * 3), dtype=np.uint8)
    raw[:, 0] = 0  # per-row filter byte: None
    raw[:, 1:] = rgb.reshape(h, w * 3)

    def chunk(tag: bytes, data: bytes) -> bytes:
        return (
            struct.pack(">I", len(data))
            + tag
            + data
            + struct.pack(">I", zlib.crc32(tag + data))
        )

    ihdr = struct.pack(">IIBBBBB", w, h, 8, 2, 0, 0, 0)  # 8-bit RGB
    idat = zlib.compress(raw.tobytes(), 1)
    return b"\x89PNG\r\n\x1a\n" + chunk(b"IHDR", ihdr) + chunk(b"IDAT", idat) + chunk(b"IEND", b"")
