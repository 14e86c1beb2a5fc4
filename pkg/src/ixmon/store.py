"""Durable append-only repository for samples, registry snapshots, and events.

Layout under the store root:

    samples/<feed_id>/<week-start-date>.tsd   binary sample records
    registry/<YYYY-MM-DD>.tsv                 registry snapshot text
    markers/<node_id>                         last write heartbeat per node
    events.log                                operational log lines
    locks/<feed_id>.lock                      per-feed writer lock

Week files are self-contained (header carries feed_id and interval), so a
weekly archive re-ingested into a fresh store reproduces identical query
results. Appends are idempotent on (feed_id, timestamp): concurrent or
duplicate writers cannot create duplicate grid points. Gaps are first-class;
nothing is ever interpolated or forward-filled.

Record format, little-endian, after the header: (u64 timestamp, f64 bps).
Header: magic ``IXTS`` | u16 version | u32 interval_s | u16 len | feed_id.
"""

from __future__ import annotations

import datetime as dt
import os
import re
import struct
import threading
from pathlib import Path

import numpy as np
from filelock import FileLock

from ixmon.core import (
    IxmonError,
    RegistrySnapshot,
    TimeSeries,
    load_registry_snapshot,
)
from ixmon.timebase import WEEK_S

_MAGIC = b"IXTS"
_VERSION = 1
_HEADER_FMT = "<4sHIH"
_HEADER_BASE = struct.calcsize(_HEADER_FMT)
_RECORD = np.dtype([("ts", "<u8"), ("v", "<f8")])
_SAFE_NAME = re.compile(r"^[A-Za-z0-9_.:-]+$")


class StoreError(IxmonError):
    pass


class UnknownFeedError(StoreError):
    pass


class _FeedState:
    __slots__ = ("interval_s", "known_ts", "offsets")

    def __init__(self, interval_s: int):
        self.interval_s = interval_s
        self.known_ts: set[int] = set()
        self.offsets: dict[Path, int] = {}


def _pack_header(interval_s: int, feed_id: str) -> bytes:
    fid = feed_id.encode()
    return struct.pack(_HEADER_FMT, _MAGIC, _VERSION, interval_s, len(fid)) + fid


def read_archive_header(path: Path) -> tuple[str, int, int]:
    """Return (feed_id, interval_s, header_length) of a week file."""
    with open(path, "rb") as fh:
        base = fh.read(_HEADER_BASE)
        if len(base) < _HEADER_BASE:
            raise StoreError(f"{path}: truncated header")
        magic, version, interval_s, fid_len = struct.unpack(_HEADER_FMT, base)
        if magic != _MAGIC:
            raise StoreError(f"{path}: bad magic {magic!r}")
        if version != _VERSION:
            raise StoreError(f"{path}: unsupported version {version}")
        fid = fh.read(fid_len)
        if len(fid) < fid_len:
            raise StoreError(f"{path}: truncated header")
    return fid.decode(), int(interval_s), _HEADER_BASE + fid_len


class Store:
    """File-backed sample store; safe for concurrent multi-process writers."""

    def __init__(self, root: str | Path, create: bool = True):
        self.root = Path(root)
        if create:
            for sub in ("samples", "registry", "markers", "locks"):
                (self.root / sub).mkdir(parents=True, exist_ok=True)
        elif not self.root.is_dir():
            raise StoreError(f"store root {self.root} does not exist")
        self._state: dict[str, _FeedState] = {}

    # -- sample data ------------------------------------------------------

    def _feed_dir(self, feed_id: str) -> Path:
        if not _SAFE_NAME.match(feed_id):
            raise StoreError(f"feed_id {feed_id!r} is not filesystem-safe")
        return self.root / "samples" / feed_id

    def _lock(self, feed_id: str) -> FileLock:
        return FileLock(self.root / "locks" / f"{feed_id}.lock")

    def _refresh(self, feed_id: str) -> _FeedState | None:
        """Fold any bytes other writers appended since we last looked into the
        in-memory index. Only whole records are consumed, so readers always
        see a consistent prefix of concurrent writes."""
        fdir = self._feed_dir(feed_id)
        state = self._state.get(feed_id)
        if not fdir.is_dir():
            return state
        for path in sorted(fdir.glob("*.tsd")):
            size = path.stat().st_size
            if state is None or path not in state.offsets:
                fid, interval_s, header_len = read_archive_header(path)
                if fid != feed_id:
                    raise StoreError(f"{path}: header feed_id {fid!r} != directory {feed_id!r}")
                if state is None:
                    state = self._state.setdefault(feed_id, _FeedState(interval_s))
                elif interval_s != state.interval_s:
                    raise StoreError(f"{path}: interval {interval_s} != feed interval {state.interval_s}")
                state.offsets[path] = header_len
            start = state.offsets[path]
            usable = start + ((size - start) // _RECORD.itemsize) * _RECORD.itemsize
            if usable > start:
                with open(path, "rb") as fh:
                    fh.seek(start)
                    chunk = np.frombuffer(fh.read(usable - start), dtype=_RECORD)
                state.known_ts.update(chunk["ts"].astype(np.int64).tolist())
                state.offsets[path] = usable
        return state

    def append(self, feed_id: str, interval_s: int, timestamps, values) -> int:
        """Append validated samples; returns the count of genuinely new grid
        points. Idempotent on (feed_id, timestamp); first value wins."""
        ts = np.asarray(timestamps, dtype=np.int64)
        vs = np.asarray(values, dtype=np.float64)
        if ts.shape != vs.shape:
            raise ValueError("timestamps and values must have equal length")
        if ts.size == 0:
            return 0
        if np.any(ts % interval_s != 0):
            raise StoreError("timestamps must lie on the interval grid")

        with self._lock(feed_id):
            state = self._refresh(feed_id)
            if state is None:
                state = self._state.setdefault(feed_id, _FeedState(interval_s))
            elif state.interval_s != interval_s:
                raise StoreError(
                    f"feed {feed_id}: interval {interval_s} != stored interval {state.interval_s}"
                )
            # first occurrence wins within the batch, known points dropped
            _, first_idx = np.unique(ts, return_index=True)
            first_idx.sort()
            mask = np.fromiter(
                (int(t) not in state.known_ts for t in ts[first_idx]),
                dtype=bool,
                count=first_idx.size,
            )
            keep = first_idx[mask]
            if keep.size == 0:
                return 0
            new_ts, new_vs = ts[keep], vs[keep]

            fdir = self._feed_dir(feed_id)
            fdir.mkdir(parents=True, exist_ok=True)
            weeks = new_ts // WEEK_S
            for week in np.unique(weeks):
                sel = weeks == week
                day = dt.date(1970, 1, 1) + dt.timedelta(seconds=int(week) * WEEK_S)
                path = fdir / f"{day.isoformat()}.tsd"
                rec = np.empty(int(sel.sum()), dtype=_RECORD)
                rec["ts"] = new_ts[sel].astype(np.uint64)
                rec["v"] = new_vs[sel]
                is_new_file = not path.exists() or path.stat().st_size == 0
                with open(path, "ab") as fh:
                    if is_new_file:
                        header = _pack_header(interval_s, feed_id)
                        fh.write(header)
                        state.offsets[path] = len(header)
                    fh.write(rec.tobytes())
                state.offsets[path] = state.offsets.get(path, 0) + rec.nbytes
            state.known_ts.update(new_ts.tolist())
            return int(keep.size)

    def append_samples(self, interval_s: int, samples) -> int:
        """Append TrafficSample objects (possibly for several feeds)."""
        by_feed: dict[str, list] = {}
        for s in samples:
            by_feed.setdefault(s.feed_id, []).append(s)
        total = 0
        for feed_id, group in by_feed.items():
            total += self.append(
                feed_id,
                interval_s,
                [s.timestamp for s in group],
                [s.inbound_bps for s in group],
            )
        return total

    def feeds(self) -> list[str]:
        sdir = self.root / "samples"
        return sorted(p.name for p in sdir.iterdir() if p.is_dir()) if sdir.is_dir() else []

    def _require_feed(self, feed_id: str) -> _FeedState:
        state = self._refresh(feed_id)
        if state is None:
            raise UnknownFeedError(f"no data for feed {feed_id!r}")
        return state

    def _read_range(self, feed_id: str, t0: int, t1: int) -> tuple[np.ndarray, np.ndarray, int]:
        state = self._require_feed(feed_id)
        fdir = self._feed_dir(feed_id)
        parts_ts, parts_vs = [], []
        w0, w1 = int(t0) // WEEK_S, int(t1 - 1) // WEEK_S
        for path in sorted(fdir.glob("*.tsd")):
            fid, interval_s, header_len = read_archive_header(path)
            day = dt.date.fromisoformat(path.stem)
            week = (day - dt.date(1970, 1, 1)).days * 86400 // WEEK_S
            if week < w0 or week > w1:
                continue
            raw = path.read_bytes()[header_len:]
            usable = (len(raw) // _RECORD.itemsize) * _RECORD.itemsize
            rec = np.frombuffer(raw[:usable], dtype=_RECORD)
            ts = rec["ts"].astype(np.int64)
            m = (ts >= t0) & (ts < t1)
            parts_ts.append(ts[m])
            parts_vs.append(rec["v"][m])
        if parts_ts:
            ts = np.concatenate(parts_ts)
            vs = np.concatenate(parts_vs)
        else:
            ts = np.empty(0, dtype=np.int64)
            vs = np.empty(0)
        # defensive dedup (keep first in append order), then time order
        _, first_idx = np.unique(ts, return_index=True)
        first_idx.sort()
        ts, vs = ts[first_idx], vs[first_idx]
        order = np.argsort(ts, kind="stable")
        return ts[order], vs[order], state.interval_s

    def query(
        self, feed_id: str, t0: int, t1: int, resample_to: int | None = None
    ) -> TimeSeries:
        """Grid-aligned series over [t0, t1); optional mean-resampling to a
        coarser interval. Gaps stay gaps."""
        if t0 >= t1:
            raise ValueError("t0 must precede t1")
        ts, vs, interval_s = self._read_range(feed_id, t0, t1)
        series = TimeSeries(feed_id, interval_s, ts, vs)
        return series if resample_to is None else series.resample(resample_to)

    def latest_timestamp(self, feed_id: str) -> int | None:
        state = self._refresh(feed_id)
        if state is None or not state.known_ts:
            return None
        return max(state.known_ts)

    def feed_interval(self, feed_id: str) -> int:
        return self._require_feed(feed_id).interval_s

    def gap_report(self, feed_id: str, t0: int, t1: int) -> list[tuple[int, int]]:
        """Maximal missing grid runs over [t0, t1), sorted."""
        series = self.query(feed_id, t0, t1)
        return series.gaps(t0, t1)

    def import_archive(self, path: str | Path) -> int:
        """Re-ingest a weekly archive file (idempotent)."""
        path = Path(path)
        feed_id, interval_s, header_len = read_archive_header(path)
        raw = path.read_bytes()[header_len:]
        usable = (len(raw) // _RECORD.itemsize) * _RECORD.itemsize
        rec = np.frombuffer(raw[:usable], dtype=_RECORD)
        return self.append(feed_id, interval_s, rec["ts"].astype(np.int64), rec["v"])

    # -- registry snapshots ------------------------------------------------

    def ingest_registry(
        self, source: str | Path, snapshot_date: dt.date | None = None
    ) -> RegistrySnapshot:
        """Validate and persist a registry snapshot from a file path, an HTTP
        endpoint serving the same text schema, or raw text."""
        text, inferred = _fetch_registry_source(source)
        date = snapshot_date or inferred
        if date is None:
            raise StoreError("snapshot date not given and not inferrable from source name")
        snapshot = load_registry_snapshot(text, date)
        (self.root / "registry" / f"{date.isoformat()}.tsv").write_text(text)
        return snapshot

    def registry_dates(self) -> list[dt.date]:
        rdir = self.root / "registry"
        return sorted(dt.date.fromisoformat(p.stem) for p in rdir.glob("*.tsv"))

    def load_registry(self, snapshot_date: dt.date) -> RegistrySnapshot:
        path = self.root / "registry" / f"{snapshot_date.isoformat()}.tsv"
        if not path.exists():
            raise StoreError(f"no registry snapshot for {snapshot_date}")
        return load_registry_snapshot(path.read_text(), snapshot_date)

    def registry_at(self, day: dt.date) -> RegistrySnapshot | None:
        """Latest snapshot dated on or before ``day`` (contemporaneous rule)."""
        dates = [d for d in self.registry_dates() if d <= day]
        return self.load_registry(dates[-1]) if dates else None

    # -- operational events and write markers -------------------------------

    def log_event(self, wall_ts: float, level: str, feed_id: str, event: str, detail: str = "") -> None:
        line = f"{wall_ts:.3f} {level} {feed_id or '-'} {event} {detail}".rstrip() + "\n"
        fd = os.open(self.root / "events.log", os.O_WRONLY | os.O_APPEND | os.O_CREAT, 0o644)
        try:
            os.write(fd, line.encode())
        finally:
            os.close(fd)

    def read_events(self, event: str | None = None) -> list[dict]:
        path = self.root / "events.log"
        if not path.exists():
            return []
        out = []
        for line in path.read_text().splitlines():
            parts = line.split(" ", 4)
            if len(parts) < 4:
                continue
            rec = {
                "wall_ts": float(parts[0]),
                "level": parts[1],
                "feed_id": parts[2],
                "event": parts[3],
                "detail": parts[4] if len(parts) > 4 else "",
            }
            if event is None or rec["event"] == event:
                out.append(rec)
        return out

    def touch_marker(self, node_id: str, wall_ts: float) -> None:
        """Record a node's scraping heartbeat; the backup's failover monitor
        watches the age of these markers (data-driven arbitration, no direct
        node-to-node channel).

        The temp name is unique per writer so concurrent threads of one node
        cannot race each other's rename.
        """
        path = self.root / "markers" / node_id
        tmp = path.parent / f"{path.name}.{os.getpid()}.{threading.get_ident()}.tmp"
        tmp.write_text(f"{wall_ts:.3f}\n")
        os.replace(tmp, path)

    def marker_wall(self, node_id: str) -> float | None:
        path = self.root / "markers" / node_id
        try:
            return float(path.read_text().strip())
        except (FileNotFoundError, ValueError):
            return None

    def newest_marker_wall(self) -> float | None:
        mdir = self.root / "markers"
        values = [self.marker_wall(p.name) for p in mdir.iterdir() if p.suffix != ".tmp"]
        values = [v for v in values if v is not None]
        return max(values) if values else None


def _fetch_registry_source(source: str | Path) -> tuple[str, dt.date | None]:
    s = str(source)
    if s.startswith(("http://", "https://")):
        import requests

        resp = requests.get(s, timeout=10)
        resp.raise_for_status()
        return resp.text, _date_from_name(s.rstrip("/").rsplit("/", 1)[-1])
    if "\n" in s or "\t" in s:
        return s, None
    path = Path(source)
    if path.exists():
        return path.read_text(), _date_from_name(path.stem)
    raise StoreError(f"registry source {s!r} is neither a file, URL, nor schema text")


def _date_from_name(name: str) -> dt.date | None:
    m = re.search(r"(\d{4}-\d{2}-\d{2})", name)
    return dt.date.fromisoformat(m.group(1)) if m else None
