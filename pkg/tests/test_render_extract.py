import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ixmon.core import TimeSeries
from ixmon.extract import (
    DataBlockAbsent,
    DataBlockAmbiguous,
    MalformedPayload,
    SchemaMismatch,
    extract_api,
    extract_html,
)
from ixmon.simulate.render import format_tick, ladder_ymax, render_api, render_html
from conftest import diurnal_day, make_feed


def _samples_equal(result, series):
    got = [(s.timestamp, s.inbound_bps) for s in result.samples]
    return got == list(zip(series.timestamps.tolist(), series.values.tolist()))


class TestApiFormat:
    def test_single_record(self, feed):
        s = TimeSeries("f1", 300, [0], [5e9])
        body = render_api(s)
        doc = json.loads(body)
        assert doc["interval_s"] == 300
        assert doc["samples"][0] == {"ts": 0, "in_bps": 5e9, "out_bps": 5e9 * 0.85}
        result = extract_api(body, feed)
        assert _samples_equal(result, s)

    def test_empty_window_is_valid(self, feed):
        body = render_api(TimeSeries("f1", 300, [], []))
        result = extract_api(body, feed)
        assert result.samples == []

    def test_full_day_roundtrip_bit_exact(self, feed):
        s = diurnal_day()
        assert len(s) == 288
        assert _samples_equal(extract_api(render_api(s), feed), s)

    @given(
        st.lists(st.floats(0, 1e13, allow_nan=False), min_size=0, max_size=64),
        st.integers(0, 10**6),
    )
    @settings(max_examples=60)
    def test_roundtrip_property(self, values, offset):
        feed = make_feed()
        ts = [offset * 300 + i * 300 for i in range(len(values))]
        s = TimeSeries("f1", 300, ts, values)
        assert _samples_equal(extract_api(render_api(s), feed), s)

    def test_missing_samples_key(self, feed):
        with pytest.raises(SchemaMismatch):
            extract_api(b'{"interval_s": 300}', feed)

    def test_not_json(self, feed):
        with pytest.raises(MalformedPayload):
            extract_api(b"<html>nope</html>", feed)

    @pytest.mark.parametrize(
        "body",
        [
            b'{"interval_s": 300, "samples": [{"ts": "x", "in_bps": 1}]}',
            b'{"interval_s": 300, "samples": [{"ts": 0}]}',
            b'{"interval_s": 300, "samples": [{"ts": 0, "in_bps": "fast"}]}',
            b'{"interval_s": 300, "samples": {"ts": 0}}',
            b'{"interval_s": "300", "samples": []}',
        ],
    )
    def test_schema_violations(self, feed, body):
        with pytest.raises(SchemaMismatch):
            extract_api(body, feed)

    def test_interval_mismatch_warns(self, feed):
        body = json.dumps({"interval_s": 600, "samples": []}).encode()
        result = extract_api(body, feed)
        assert result.warnings

    def test_offgrid_timestamps_snapped(self, feed):
        body = json.dumps(
            {"interval_s": 300, "samples": [{"ts": 301, "in_bps": 1.0, "out_bps": 0.5}]}
        ).encode()
        result = extract_api(body, feed)
        assert result.samples[0].timestamp == 300


class TestHtmlFormat:
    def test_matches_api_rendering(self, feed):
        s = diurnal_day()
        api = extract_api(render_api(s), feed)
        html = extract_html(render_html(s), feed)
        assert [(x.timestamp, x.inbound_bps) for x in html.samples] == [
            (x.timestamp, x.inbound_bps) for x in api.samples
        ]
        assert html.method == "html"

    def test_block_absent(self, feed):
        with pytest.raises(DataBlockAbsent):
            extract_html(b"<html><body>no data here</body></html>", feed)
        # a script tag with the wrong type does not count
        page = b'<html><script id="traffic-data" type="text/js">{}</script></html>'
        with pytest.raises(DataBlockAbsent):
            extract_html(page, feed)

    def test_two_blocks_ambiguous(self, feed):
        block = '<script id="traffic-data" type="application/json">{"interval_s":300,"samples":[]}</script>'
        with pytest.raises(DataBlockAmbiguous):
            extract_html(f"<html>{block}{block}</html>".encode(), feed)


def test_ladder_ymax():
    assert ladder_ymax(87.3e9) == 100e9
    assert ladder_ymax(100e9) == 100e9
    assert ladder_ymax(101e9) == 200e9
    assert ladder_ymax(3.0) == 5.0
    assert ladder_ymax(0.0) == 1.0
    assert ladder_ymax(1.2e12) == 2e12


@given(st.floats(min_value=1e-3, max_value=9e14))
@settings(max_examples=200)
def test_ladder_is_tight_upper_bound(v):
    y = ladder_ymax(v)
    assert y >= v
    # one ladder rung down is strictly below v
    mantissa = y / 10 ** np.floor(np.log10(y))
    prev = {1.0: 0.5, 2.0: 1.0, 5.0: 2.0}[round(float(mantissa), 6)]
    assert prev * 10 ** np.floor(np.log10(y)) < v or y == v


def test_format_tick():
    assert format_tick(0.0) == "0"
    assert format_tick(50e9) == "50G"
    assert format_tick(2.5e6) == "2.5M"
    assert format_tick(500.0) == "500"
    assert format_tick(0.5) == "0.5"
    assert format_tick(1e12) == "1T"
