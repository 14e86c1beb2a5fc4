import datetime as dt
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ixmon.core import (
    RegistrySchemaError,
    RegistrySnapshot,
    TimeSeries,
    TrafficSample,
    feed_capacity_bps,
    format_registry_text,
    load_registry_snapshot,
    parse_registry_text,
    snap_to_grid,
    validate_feed_membership,
    validate_sample,
    IxpRecord,
)
from conftest import make_feed


@pytest.mark.parametrize(
    "ts,interval,expected",
    [
        (600, 300, 600),   # already aligned
        (749, 300, 600),   # nearest below
        (751, 300, 900),   # nearest above
        (750, 300, 600),   # tie rounds down
        (0, 300, 0),
        (299, 600, 0),
    ],
)
def test_snap_to_grid(ts, interval, expected):
    assert snap_to_grid(ts, interval) == expected


@given(st.integers(min_value=0, max_value=2**40), st.sampled_from([300, 600, 900, 1800]))
def test_snap_is_nearest(ts, interval):
    g = snap_to_grid(ts, interval)
    assert g % interval == 0
    assert abs(g - ts) <= interval // 2
    # ties go down, otherwise strictly nearest
    if abs(g - ts) == interval / 2:
        assert g <= ts


def test_validate_sample_rules():
    s = lambda v: TrafficSample("f", 300, v)
    assert validate_sample(s(10e9), capacity_bps=100e9) is None
    assert validate_sample(s(-1.0)) == "negative"
    assert validate_sample(s(float("nan"))) == "non_finite"
    assert validate_sample(s(float("inf"))) == "non_finite"
    assert validate_sample(s(150e9), capacity_bps=100e9, headroom_factor=1.0) == "exceeds_capacity"
    assert validate_sample(s(150e9), capacity_bps=100e9, headroom_factor=2.0) is None
    assert validate_sample(s(150e9)) is None  # no capacity known, no bound


class TestTimeSeries:
    def test_construction_validates_grid(self):
        with pytest.raises(ValueError):
            TimeSeries("f", 300, [100], [1.0])
        with pytest.raises(ValueError):
            TimeSeries("f", 300, [300, 300], [1.0, 2.0])

    def test_from_pairs_snaps_and_keeps_first(self):
        s = TimeSeries.from_pairs("f", 300, [(301, 1.0), (299, 2.0), (600, 3.0)])
        # both 301 and 299 snap to 300; first value wins
        assert list(s) == [(300, 1.0), (600, 3.0)]

    def test_append_idempotent(self):
        s = TimeSeries.from_pairs("f", 300, [(0, 1.0), (300, 2.0)])
        once = s.append([(600, 3.0)])
        twice = once.append([(600, 3.0)])
        assert once == twice

    @given(
        st.lists(
            st.tuples(st.integers(0, 200), st.floats(0, 1e12, allow_nan=False)),
            max_size=30,
        )
    )
    @settings(max_examples=80)
    def test_append_idempotent_property(self, pairs):
        pairs = [(t * 300, v) for t, v in pairs]
        base = TimeSeries("f", 300, [], [])
        once = base.append(pairs)
        assert once.append(pairs) == once

    def test_gaps(self):
        s = TimeSeries("f", 300, [0, 300, 1200, 1500, 2400], np.ones(5))
        assert s.gaps() == [(600, 900), (1800, 2100)]
        assert s.gaps(0, 2700) == [(600, 900), (1800, 2100)]
        empty = TimeSeries("f", 300, [], [])
        assert empty.gaps(0, 900) == [(0, 600)]
        contiguous = TimeSeries("f", 300, [0, 300, 600], np.ones(3))
        assert contiguous.gaps() == []

    def test_resample_mean(self):
        # 5-min -> 30-min buckets: mean of up to 6 samples each
        ts = np.arange(0, 3600, 300)
        vals = np.arange(12, dtype=float)
        s = TimeSeries("f", 300, ts, vals)
        r = s.resample(1800)
        assert list(r.timestamps) == [0, 1800]
        assert list(r.values) == [np.mean(vals[:6]), np.mean(vals[6:])]

    def test_resample_conserves_mean_on_complete_buckets(self):
        ts = np.arange(0, 7200, 300)
        vals = np.linspace(1.0, 2.0, len(ts))
        s = TimeSeries("f", 300, ts, vals)
        r = s.resample(1800)
        assert r.values.mean() == pytest.approx(s.values.mean(), rel=1e-12)

    @given(st.lists(st.floats(0, 1e13, allow_nan=False), min_size=1, max_size=50))
    @settings(max_examples=60)
    def test_csv_roundtrip_exact(self, values):
        ts = [i * 300 for i in range(len(values))]
        s = TimeSeries("feed-x", 300, ts, values)
        back = TimeSeries.from_csv(s.to_csv(), 300)
        assert back == s


REG_LINE = "ix1\tTest IX\tEurope\tBerlin\tEurope/Berlin\t1000,2000\thttp://x/feeds/f1\tapi"


class TestRegistrySchema:
    def test_parse_roundtrip(self):
        records = parse_registry_text(REG_LINE + "\n")
        assert len(records) == 1
        rec = records[0]
        assert rec.total_capacity_bps == 3000
        assert rec.capacity_known
        assert parse_registry_text(format_registry_text(records)) == records

    def test_three_record_file(self):
        text = "\n".join(
            f"ix{i}\tIX {i}\tEurope\tBerlin\tEurope/Berlin\t{1000 * i},{500 * i}\t\t"
            for i in (1, 2, 3)
        )
        snap = load_registry_snapshot(text, dt.date(2023, 1, 1))
        assert len(snap.records) == 3
        assert [r.total_capacity_bps for r in snap.records] == [1500, 3000, 4500]

    def test_empty_port_list_flagged_not_dropped(self):
        text = "ix1\tX\tAfrica\tLagos\tAfrica/Lagos\t\t\t"
        (rec,) = parse_registry_text(text)
        assert not rec.capacity_known
        assert rec.total_capacity_bps == 0

    def test_duplicate_id_is_schema_error_with_line(self):
        text = REG_LINE + "\n" + REG_LINE
        with pytest.raises(RegistrySchemaError) as err:
            parse_registry_text(text)
        assert err.value.line_no == 2

    @pytest.mark.parametrize(
        "bad",
        [
            "ix1\tX\tNowhere\tB\tUTC\t\t\t",        # unknown region
            "ix1\tX\tEurope\tB\tUTC\tabc\t\t",      # bad speeds
            "ix1\tX\tEurope\tB\tUTC\t-5\t\t",       # negative speed
            "ix1\tX\tEurope\tB\tUTC\t\t\tftp",      # unknown kind
            "ix1\tX\tEurope\tB",                    # wrong field count
        ],
    )
    def test_schema_violations(self, bad):
        with pytest.raises(RegistrySchemaError):
            parse_registry_text(bad)


def _snapshot(records):
    return RegistrySnapshot(snapshot_date=dt.date(2023, 1, 1), records=tuple(records))


def _rec(ixp_id, region="Europe", tz="Europe/Berlin", speeds=(1000.0,)):
    return IxpRecord(ixp_id=ixp_id, name=ixp_id, region=region, city="c", timezone=tz,
                     port_speeds_bps=speeds)


def test_feed_membership_validation():
    snap = _snapshot([_rec("a"), _rec("b"), _rec("c", region="Africa", tz="Africa/Lagos")])
    ok = make_feed(ixps=("a", "b"))
    assert validate_feed_membership(ok, snap) is None
    cross_region = make_feed(ixps=("a", "c"))
    assert validate_feed_membership(cross_region, snap) is not None
    global_fed = make_feed(ixps=("a", "c"), global_federated=True)
    assert validate_feed_membership(global_fed, snap) is None
    unknown = make_feed(ixps=("a", "zz"))
    assert "unknown" in validate_feed_membership(unknown, snap)


def test_feed_capacity():
    snap = _snapshot([_rec("a", speeds=(1000.0, 500.0)), _rec("b", speeds=()), _rec("c", speeds=(200.0,))])
    assert feed_capacity_bps(make_feed(ixps=("a",)), snap) == 1500
    assert feed_capacity_bps(make_feed(ixps=("a", "c")), snap) == 1700
    # any capacity-unknown member poisons the bound
    assert feed_capacity_bps(make_feed(ixps=("a", "b")), snap) is None
    assert feed_capacity_bps(make_feed(ixps=("a",)), None) is None


def test_feed_descriptor_invariants():
    with pytest.raises(ValueError):
        make_feed(kind="rss")
    with pytest.raises(ValueError):
        make_feed(interval_s=299)
    with pytest.raises(ValueError):
        make_feed(ixps=())
    with pytest.raises(ValueError):
        make_feed(poll_period_s=100)  # faster than the source updates
    assert not make_feed(ixps=("a",)).federated
    assert make_feed(ixps=("a", "b")).federated
