import datetime as dt
import shutil
import threading

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ixmon.core import format_registry_text, IxpRecord, RegistrySchemaError
from ixmon.store import Store, StoreError, UnknownFeedError

WEEK = 7 * 86400


@pytest.fixture
def store(tmp_path):
    return Store(tmp_path / "store")


def _fill(store, feed="f1", n=10, start=0, interval=300):
    ts = np.arange(start, start + n * interval, interval)
    vals = np.linspace(1.0, 2.0, n)
    store.append(feed, interval, ts, vals)
    return ts, vals


class TestAppend:
    def test_second_append_returns_zero(self, store):
        ts = [0, 300, 600]
        vs = [1.0, 2.0, 3.0]
        assert store.append("f1", 300, ts, vs) == 3
        assert store.append("f1", 300, ts, vs) == 0

    def test_first_value_wins_on_conflict(self, store):
        store.append("f1", 300, [0], [1.0])
        store.append("f1", 300, [0], [999.0])
        assert store.query("f1", 0, 300).values[0] == 1.0

    def test_interleaved_appends_union(self, store):
        store.append("f1", 300, [0, 600], [1.0, 3.0])
        store.append("f1", 300, [300, 600, 900], [2.0, 99.0, 4.0])
        s = store.query("f1", 0, 1200)
        assert list(s.timestamps) == [0, 300, 600, 900]
        assert list(s.values) == [1.0, 2.0, 3.0, 4.0]

    def test_offgrid_append_rejected(self, store):
        with pytest.raises(StoreError):
            store.append("f1", 300, [100], [1.0])

    def test_interval_conflict_rejected(self, store):
        store.append("f1", 300, [0], [1.0])
        with pytest.raises(StoreError):
            store.append("f1", 600, [600], [1.0])

    def test_two_handles_share_one_directory(self, store, tmp_path):
        # a second process is modeled by a second handle on the same root
        other = Store(tmp_path / "store")
        store.append("f1", 300, [0, 300], [1.0, 2.0])
        assert other.append("f1", 300, [300, 600], [99.0, 3.0]) == 1
        merged = store.query("f1", 0, 900)
        assert list(merged.values) == [1.0, 2.0, 3.0]

    def test_concurrent_duplicate_writers_store_once(self, tmp_path):
        ts = np.arange(0, 2000 * 300, 300)
        vs = np.random.default_rng(0).random(2000)
        counts = []

        def writer():
            handle = Store(tmp_path / "store")
            counts.append(handle.append("f1", 300, ts, vs))

        threads = [threading.Thread(target=writer) for _ in range(4)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert sum(counts) == 2000  # each grid point appended exactly once
        reader = Store(tmp_path / "store")
        assert len(reader.query("f1", 0, 2000 * 300)) == 2000


class TestQuery:
    def test_roundtrip_full_range(self, store):
        ts, vals = _fill(store, n=50)
        s = store.query("f1", 0, 50 * 300)
        assert np.array_equal(s.timestamps, ts)
        assert np.array_equal(s.values, vals)

    @given(
        st.sets(st.integers(0, 5000), min_size=1, max_size=120),
        st.floats(0, 1e12, allow_nan=False),
    )
    @settings(max_examples=40, deadline=None)
    def test_roundtrip_property(self, grid_points, base):
        import tempfile

        with tempfile.TemporaryDirectory() as root:
            s = Store(root)
            ts = np.array(sorted(grid_points)) * 300
            vs = base + np.arange(len(ts), dtype=float)
            s.append("p", 300, ts, vs)
            q = s.query("p", 0, int(ts[-1]) + 300)
            assert np.array_equal(q.timestamps, ts)
            assert np.array_equal(q.values, vs)

    def test_unknown_feed(self, store):
        with pytest.raises(UnknownFeedError):
            store.query("ghost", 0, 300)

    def test_query_spanning_week_files(self, store):
        ts = np.array([WEEK - 300, WEEK, WEEK + 300])
        store.append("f1", 300, ts, [1.0, 2.0, 3.0])
        feed_dir = store.root / "samples" / "f1"
        assert len(list(feed_dir.glob("*.tsd"))) == 2
        s = store.query("f1", 0, 2 * WEEK)
        assert list(s.values) == [1.0, 2.0, 3.0]

    def test_resample_hand_case(self, store):
        ts = np.arange(0, 1800, 300)  # six 5-min samples
        store.append("f1", 300, ts, [1, 2, 3, 4, 5, 6])
        r = store.query("f1", 0, 1800, resample_to=1800)
        assert list(r.timestamps) == [0]
        assert r.values[0] == 3.5

    def test_empty_range_with_gap_report(self, store):
        _fill(store, n=3)
        s = store.query("f1", 9000, 12000)
        assert len(s) == 0
        assert store.gap_report("f1", 9000, 12000) == [(9000, 11700)]


class TestGaps:
    def test_contiguous_no_gaps(self, store):
        _fill(store, n=10)
        assert store.gap_report("f1", 0, 3000) == []

    def test_single_missing_point(self, store):
        store.append("f1", 300, [0, 600], [1.0, 2.0])
        assert store.gap_report("f1", 0, 900) == [(300, 300)]

    def test_latest_timestamp(self, store):
        assert store.latest_timestamp("f1") is None
        _fill(store, n=5)
        assert store.latest_timestamp("f1") == 4 * 300


class TestArchive:
    def test_reingest_reproduces_queries(self, store, tmp_path):
        _fill(store, n=500)
        week_file = next((store.root / "samples" / "f1").glob("*.tsd"))
        fresh = Store(tmp_path / "fresh")
        assert fresh.import_archive(week_file) == 500
        a = store.query("f1", 0, 500 * 300)
        b = fresh.query("f1", 0, 500 * 300)
        assert np.array_equal(a.timestamps, b.timestamps)
        assert np.array_equal(a.values, b.values)
        # idempotent on repeat
        assert fresh.import_archive(week_file) == 0


class TestRegistry:
    def _records(self):
        return [
            IxpRecord(ixp_id=f"ix{i}", name=f"IX {i}", region="Europe", city="B",
                      timezone="Europe/Berlin", port_speeds_bps=(float(i * 1000),))
            for i in (1, 2, 3)
        ]

    def test_ingest_from_file(self, store, tmp_path):
        path = tmp_path / "2023-01-01.tsv"
        path.write_text(format_registry_text(self._records()))
        snap = store.ingest_registry(path)
        assert snap.snapshot_date == dt.date(2023, 1, 1)
        assert len(snap.records) == 3
        assert store.registry_dates() == [dt.date(2023, 1, 1)]
        again = store.load_registry(dt.date(2023, 1, 1))
        assert again.records == snap.records

    def test_ingest_text_requires_date(self, store):
        text = format_registry_text(self._records())
        with pytest.raises(StoreError):
            store.ingest_registry(text)
        snap = store.ingest_registry(text, dt.date(2023, 6, 1))
        assert snap.snapshot_date == dt.date(2023, 6, 1)

    def test_registry_at_picks_contemporaneous(self, store):
        text = format_registry_text(self._records())
        store.ingest_registry(text, dt.date(2023, 1, 1))
        store.ingest_registry(text, dt.date(2023, 7, 1))
        assert store.registry_at(dt.date(2023, 6, 30)).snapshot_date == dt.date(2023, 1, 1)
        assert store.registry_at(dt.date(2023, 7, 1)).snapshot_date == dt.date(2023, 7, 1)
        assert store.registry_at(dt.date(2022, 12, 31)) is None

    def test_schema_error_propagates(self, store):
        with pytest.raises(RegistrySchemaError):
            store.ingest_registry("bad\tline\n", dt.date(2023, 1, 1))


class TestEventsAndMarkers:
    def test_event_roundtrip(self, store):
        store.log_event(12.5, "info", "f1", "poll_failed", "HTTP 500 from upstream")
        store.log_event(13.0, "info", "-", "promoted", "node=backup")
        events = store.read_events()
        assert len(events) == 2
        assert events[0]["feed_id"] == "f1"
        assert events[0]["detail"] == "HTTP 500 from upstream"
        assert [e["event"] for e in store.read_events("promoted")] == ["promoted"]

    def test_markers(self, store):
        assert store.newest_marker_wall() is None
        store.touch_marker("main", 100.0)
        store.touch_marker("backup", 90.0)
        assert store.marker_wall("main") == 100.0
        assert store.newest_marker_wall() == 100.0
