import io

import numpy as np
import pytest
from PIL import Image

from ixmon.core import TimeSeries
from ixmon.digitize import (
    CalibrationFailed,
    CurveAbsent,
    ImageFormatError,
    digitize_plot,
)
from ixmon.simulate.model import TrafficModel, generate_series
from ixmon.simulate.render import PlotConfig, PlotWindowTooLong, render_plot
from conftest import diurnal_day, make_feed

CFG = PlotConfig()
DAY = 86400


def _image_array(png: bytes) -> np.ndarray:
    return np.array(Image.open(io.BytesIO(png)).convert("RGB"))


def _png(arr: np.ndarray) -> bytes:
    buf = io.BytesIO()
    Image.fromarray(arr, "RGB").save(buf, format="PNG")
    return buf.getvalue()


def _values(result):
    return np.array([s.inbound_bps for s in result.samples])


@pytest.fixture
def plot_feed():
    return make_feed(feed_id="p1", kind="plot_image")


def test_flat_day_recovered_within_pixel_quantum(plot_feed):
    s = generate_series(TrafficModel(base_bps=10e9), 0, DAY, 300, "p1")
    result = digitize_plot(render_plot(s), plot_feed, (0, DAY))
    assert len(result.samples) == 288
    # ymax is 10G so one pixel quantum is ymax/320
    quantum = 10e9 / 320
    assert np.abs(_values(result) - 10e9).max() <= quantum
    assert result.cross_check is not None
    assert result.cross_check.relative_deviation <= 0.01
    assert not result.quarantined


def test_noise_free_series_within_one_quantum(plot_feed):
    s = generate_series(
        TrafficModel(base_bps=40e9, diurnal_amplitude=4.7), 0, DAY, 300, "p1"
    )
    png = render_plot(s)
    result = digitize_plot(png, plot_feed, (0, DAY))
    ymax = 100e9  # ladder above the 66G peak
    assert np.abs(_values(result) - s.values).max() <= ymax / 320


def test_timesteps_map_to_grid(plot_feed):
    s = generate_series(TrafficModel(base_bps=1e9), 0, 7200, 300, "p1")
    result = digitize_plot(render_plot(s), plot_feed, (0, 7200))
    assert [x.timestamp for x in result.samples] == list(range(0, 7200, 300))


def test_mean_deviation_within_paper_bound(plot_feed):
    s = diurnal_day(base=50e9, amplitude=4.7, noise=0.05, feed_id="p1")
    result = digitize_plot(render_plot(s), plot_feed, (0, DAY))
    rel = np.abs(_values(result) - s.values) / s.values
    assert rel.mean() <= 0.024


def test_footer_erased_warns_but_samples_survive(plot_feed):
    s = diurnal_day(feed_id="p1")
    arr = _image_array(render_plot(s))
    arr[CFG.footer_y - 8 :, :] = 255  # erase the footer strip
    result = digitize_plot(_png(arr), plot_feed, (0, DAY))
    assert result.cross_check is None
    assert any("footer" in w for w in result.warnings)
    assert not result.quarantined
    assert len(result.samples) == 288


def test_blanked_tick_labels_fail_calibration(plot_feed):
    s = diurnal_day(feed_id="p1")
    arr = _image_array(render_plot(s))
    arr[:, : CFG.plot_x0 - 1] = 255  # blank the label margin
    with pytest.raises(CalibrationFailed):
        digitize_plot(_png(arr), plot_feed, (0, DAY))


def test_curve_absent(plot_feed):
    s = diurnal_day(feed_id="p1")
    arr = _image_array(render_plot(s))
    area = arr[CFG.plot_y0 : CFG.plot_y1, CFG.plot_x0 : CFG.plot_x1]
    area[(area != 255).any(axis=2)] = 255  # bleach the plot area
    with pytest.raises(CurveAbsent):
        digitize_plot(_png(arr), plot_feed, (0, DAY))


def test_cross_check_fires_on_inflated_curve(plot_feed):
    # curve drawn from a series inflated 10%, footer kept from the original:
    # the footer text no longer matches the traced curve
    s = diurnal_day(feed_id="p1")
    inflated = TimeSeries("p1", 300, s.timestamps, s.values * 1.10)
    honest = _image_array(render_plot(s))
    doctored = _image_array(render_plot(inflated))
    doctored[CFG.footer_y - 8 :, :] = honest[CFG.footer_y - 8 :, :]
    result = digitize_plot(_png(doctored), plot_feed, (0, DAY), cross_check_tolerance=0.05)
    assert result.quarantined
    assert result.cross_check is not None
    assert result.cross_check.relative_deviation > 0.05
    assert len(result.samples) == 288  # samples still returned, flagged


def test_wrong_dimensions_rejected(plot_feed):
    arr = np.full((100, 100, 3), 255, dtype=np.uint8)
    with pytest.raises(ImageFormatError):
        digitize_plot(_png(arr), plot_feed, (0, DAY))
    with pytest.raises(ImageFormatError):
        digitize_plot(b"not a png", plot_feed, (0, DAY))


def test_window_too_long_for_plot(plot_feed):
    s = generate_series(TrafficModel(base_bps=1e9), 0, 3 * DAY, 300, "p1")
    with pytest.raises(PlotWindowTooLong):
        render_plot(s)
    with pytest.raises(ValueError):
        digitize_plot(b"", plot_feed, (0, 3 * DAY))


def test_zero_rate_samples_recoverable(plot_feed):
    vals = np.concatenate([np.full(144, 8e9), np.zeros(144)])
    s = TimeSeries("p1", 300, np.arange(0, DAY, 300), vals)
    result = digitize_plot(render_plot(s), plot_feed, (0, DAY))
    got = _values(result)
    assert np.all(got[144:] <= 8e9 / 320)  # zeros within a pixel quantum of 0


def test_survives_reencoding(plot_feed):
    # lossless re-encode with different settings must not disturb matching
    s = diurnal_day(feed_id="p1")
    arr = _image_array(render_plot(s))
    buf = io.BytesIO()
    Image.fromarray(arr, "RGB").save(buf, format="PNG", optimize=True)
    result = digitize_plot(buf.getvalue(), plot_feed, (0, DAY))
    rel = np.abs(_values(result) - s.values) / s.values
    assert rel.mean() <= 0.024
