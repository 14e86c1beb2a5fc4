"""Shared domain types and validation rules.

Everything downstream trades in these values: timestamped inbound bit-rates
on a fixed grid, feed descriptors, registry records, and per-day statistics.
All types are immutable after construction and safe to share across threads.
"""

from __future__ import annotations

import datetime as dt
import math
from dataclasses import dataclass, field

import numpy as np

REGIONS = (
    "Africa",
    "Asia-Pacific",
    "Australia",
    "Europe",
    "Middle East",
    "N. America",
    "S. America",
)

FEED_KINDS = ("api", "html", "plot_image")
FEED_STATUSES = ("active", "attrited", "missed")
ALLOWED_INTERVALS = (300, 600, 900, 1800)

#: Friday-Saturday weekend for the Middle East, Saturday-Sunday elsewhere.
WEEKEND_DAYS = {region: frozenset({5, 6}) for region in REGIONS}
WEEKEND_DAYS["Middle East"] = frozenset({4, 5})

CSV_HEADER = "feed_id,timestamp,inbound_bps"


class IxmonError(Exception):
    """Base class for errors raised by this package."""


class RegistrySchemaError(IxmonError):
    """Registry snapshot text did not match the documented schema."""

    def __init__(self, line_no: int, message: str):
        self.line_no = line_no
        super().__init__(f"line {line_no}: {message}")


def snap_to_grid(timestamp: int, interval_s: int) -> int:
    """Snap a timestamp to the nearest multiple of ``interval_s``; ties round down."""
    if interval_s <= 0:
        raise ValueError("interval_s must be positive")
    timestamp = int(timestamp)
    q, r = divmod(timestamp, interval_s)
    if 2 * r > interval_s:
        q += 1
    return q * interval_s


@dataclass(frozen=True)
class TrafficSample:
    """One inbound-rate observation for a feed at a grid timestamp."""

    feed_id: str
    timestamp: int
    inbound_bps: float


def validate_sample(
    sample: TrafficSample,
    capacity_bps: float | None = None,
    headroom_factor: float = 1.0,
) -> str | None:
    """Sanity-check one sample; return None to accept or a reject reason.

    Reasons: ``negative``, ``non_finite``, ``exceeds_capacity``. Capacity
    checks apply only when the feed's total port capacity is known; traffic
    over the public fabric cannot exceed provisioned capacity times the
    configured headroom.
    """
    v = sample.inbound_bps
    if not math.isfinite(v):
        return "non_finite"
    if v < 0:
        return "negative"
    if capacity_bps is not None and v > capacity_bps * headroom_factor:
        return "exceeds_capacity"
    return None


class TimeSeries:
    """Grid-aligned inbound-rate series for one feed.

    Timestamps are strictly increasing, all on the feed's interval grid, with
    at most one sample per grid point. Instances are immutable; ``append``
    returns a new series and keeps the first value seen for any grid point,
    which makes repeated appends of the same batch a no-op.
    """

    __slots__ = ("feed_id", "interval_s", "timestamps", "values")

    def __init__(self, feed_id: str, interval_s: int, timestamps, values):
        if interval_s <= 0:
            raise ValueError("interval_s must be positive")
        ts = np.asarray(timestamps, dtype=np.int64)
        vs = np.asarray(values, dtype=np.float64)
        if ts.shape != vs.shape or ts.ndim != 1:
            raise ValueError("timestamps and values must be 1-d and equal length")
        if ts.size:
            if np.any(ts % interval_s != 0):
                raise ValueError("timestamps must lie on the interval grid")
            if np.any(np.diff(ts) <= 0):
                raise ValueError("timestamps must be strictly increasing")
        ts.setflags(write=False)
        vs.setflags(write=False)
        self.feed_id = feed_id
        self.interval_s = int(interval_s)
        self.timestamps = ts
        self.values = vs

    @classmethod
    def from_pairs(cls, feed_id: str, interval_s: int, pairs) -> "TimeSeries":
        """Build from (timestamp, inbound_bps) pairs; snaps to grid, keeps the
        first value per grid point, sorts by time."""
        seen: dict[int, float] = {}
        for ts, v in pairs:
            g = snap_to_grid(int(ts), interval_s)
            if g not in seen:
                seen[g] = float(v)
        order = sorted(seen)
        return cls(feed_id, interval_s, order, [seen[t] for t in order])

    def __len__(self) -> int:
        return int(self.timestamps.size)

    def __iter__(self):
        return zip(self.timestamps.tolist(), self.values.tolist())

    def __eq__(self, other) -> bool:
        if not isinstance(other, TimeSeries):
            return NotImplemented
        return (
            self.feed_id == other.feed_id
            and self.interval_s == other.interval_s
            and np.array_equal(self.timestamps, other.timestamps)
            and np.array_equal(self.values, other.values)
        )

    def append(self, pairs) -> "TimeSeries":
        """Return a new series with ``pairs`` merged in (first value wins)."""
        merged = {int(t): float(v) for t, v in zip(self.timestamps, self.values)}
        for ts, v in pairs:
            g = snap_to_grid(int(ts), self.interval_s)
            merged.setdefault(g, float(v))
        order = sorted(merged)
        return TimeSeries(self.feed_id, self.interval_s, order, [merged[t] for t in order])

    def gaps(self, t0: int | None = None, t1: int | None = None) -> list[tuple[int, int]]:
        """Maximal runs of missing grid points as (first_missing, last_missing).

        Bounds default to the series' own extent; ``t1`` is exclusive.
        """
        step = self.interval_s
        if t0 is None or t1 is None:
            if len(self) < 2:
                return []
            t0 = int(self.timestamps[0])
            t1 = int(self.timestamps[-1]) + step
        lo = snap_to_grid(t0, step)
        if lo < t0:
            lo += step
        expected = np.arange(lo, t1, step, dtype=np.int64)
        if expected.size == 0:
            return []
        missing = expected[~np.isin(expected, self.timestamps)]
        if missing.size == 0:
            return []
        runs: list[tuple[int, int]] = []
        start = prev = int(missing[0])
        for t in missing[1:].tolist():
            if t == prev + step:
                prev = t
            else:
                runs.append((start, prev))
                start = prev = t
        runs.append((start, prev))
        return runs

    def slice(self, t0: int, t1: int) -> "TimeSeries":
        """Samples with t0 <= timestamp < t1."""
        m = (self.timestamps >= t0) & (self.timestamps < t1)
        return TimeSeries(self.feed_id, self.interval_s, self.timestamps[m], self.values[m])

    def resample(self, to_interval: int) -> "TimeSeries":
        """Mean over coarser buckets; empty buckets stay gaps (never filled)."""
        if to_interval < self.interval_s or to_interval % self.interval_s != 0:
            raise ValueError("resample interval must be a multiple of the native interval")
        if len(self) == 0 or to_interval == self.interval_s:
            return TimeSeries(self.feed_id, to_interval, self.timestamps, self.values)
        buckets = (self.timestamps // to_interval) * to_interval
        uniq, inverse = np.unique(buckets, return_inverse=True)
        sums = np.bincount(inverse, weights=self.values)
        counts = np.bincount(inverse)
        return TimeSeries(self.feed_id, to_interval, uniq, sums / counts)

    def to_csv(self) -> str:
        lines = [CSV_HEADER]
        for ts, v in zip(self.timestamps.tolist(), self.values.tolist()):
            lines.append(f"{self.feed_id},{ts},{v!r}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_csv(cls, text: str, interval_s: int) -> "TimeSeries":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines or lines[0] != CSV_HEADER:
            raise ValueError("missing or wrong CSV header")
        feed_id = None
        pairs = []
        for ln in lines[1:]:
            fid, ts, v = ln.split(",")
            if feed_id is None:
                feed_id = fid
            elif fid != feed_id:
                raise ValueError("mixed feed_ids in CSV")
            pairs.append((int(ts), float(v)))
        return cls.from_pairs(feed_id or "", interval_s, pairs)


@dataclass(frozen=True)
class FeedDescriptor:
    """One traffic feed: where it lives, its format, and which IXPs it covers."""

    feed_id: str
    kind: str
    endpoint: str
    interval_s: int
    timezone: str
    member_ixp_ids: frozenset[str]
    poll_period_s: int
    global_federated: bool = False
    status: str = "active"

    def __post_init__(self):
        if self.kind not in FEED_KINDS:
            raise ValueError(f"unknown feed kind {self.kind!r}")
        if self.status not in FEED_STATUSES:
            raise ValueError(f"unknown feed status {self.status!r}")
        if self.interval_s not in ALLOWED_INTERVALS:
            raise ValueError(f"interval_s must be one of {ALLOWED_INTERVALS}")
        if not self.member_ixp_ids:
            raise ValueError("feed must map to at least one IXP")
        # Never poll faster than the source updates.
        if self.poll_period_s < self.interval_s:
            raise ValueError("poll_period_s must be >= interval_s")

    @property
    def federated(self) -> bool:
        return len(self.member_ixp_ids) > 1


@dataclass(frozen=True)
class IxpRecord:
    """Registry entry for one IXP, in the shape of a PeeringDB row."""

    ixp_id: str
    name: str
    region: str
    city: str
    timezone: str
    port_speeds_bps: tuple[float, ...] = ()
    traffic_url: str | None = None
    feed_kind: str | None = None
    latitude: float | None = None
    longitude: float | None = None

    def __post_init__(self):
        if self.region not in REGIONS:
            raise ValueError(f"unknown region {self.region!r}")
        if any(s < 0 for s in self.port_speeds_bps):
            raise ValueError("port speeds must be non-negative")

    @property
    def total_capacity_bps(self) -> float:
        return float(sum(self.port_speeds_bps))

    @property
    def capacity_known(self) -> bool:
        """Records with no advertised ports are flagged capacity-unknown and
        excluded from capacity ratios."""
        return len(self.port_speeds_bps) > 0


@dataclass(frozen=True)
class RegistrySnapshot:
    """Dated set of IXP records; ixp_id unique within a snapshot."""

    snapshot_date: dt.date
    records: tuple[IxpRecord, ...]
    _by_id: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        by_id = {}
        for rec in self.records:
            if rec.ixp_id in by_id:
                raise ValueError(f"duplicate ixp_id {rec.ixp_id!r} in snapshot")
            by_id[rec.ixp_id] = rec
        object.__setattr__(self, "_by_id", by_id)

    def __contains__(self, ixp_id: str) -> bool:
        return ixp_id in self._by_id

    def get(self, ixp_id: str) -> IxpRecord | None:
        return self._by_id.get(ixp_id)

    @property
    def ixp_ids(self) -> set[str]:
        return set(self._by_id)


def validate_feed_membership(feed: FeedDescriptor, snapshot: RegistrySnapshot) -> str | None:
    """Check a feed's IXP mapping against a registry snapshot.

    Returns None when consistent, else a reason. Federated feeds must cover
    IXPs sharing one region and timezone unless marked global_federated.
    """
    missing = [i for i in feed.member_ixp_ids if i not in snapshot]
    if missing:
        return f"unknown ixp_ids: {sorted(missing)}"
    if feed.federated and not feed.global_federated:
        recs = [snapshot.get(i) for i in feed.member_ixp_ids]
        if len({r.region for r in recs}) > 1 or len({r.timezone for r in recs}) > 1:
            return "federated members span regions or timezones"
    return None


def validate_fleet(feeds) -> None:
    """Every analyzed IXP maps to exactly one feed; duplicates double-count."""
    owner: dict[str, str] = {}
    for feed in feeds:
        for ixp_id in feed.member_ixp_ids:
            if ixp_id in owner:
                raise ValueError(
                    f"ixp {ixp_id!r} mapped by both {owner[ixp_id]!r} and {feed.feed_id!r}"
                )
            owner[ixp_id] = feed.feed_id


def feed_capacity_bps(feed: FeedDescriptor, snapshot: RegistrySnapshot | None) -> float | None:
    """Total port capacity behind a feed, or None when any member IXP's
    capacity is unknown (no bound can be enforced then)."""
    if snapshot is None:
        return None
    total = 0.0
    for ixp_id in feed.member_ixp_ids:
        rec = snapshot.get(ixp_id)
        if rec is None or not rec.capacity_known:
            return None
        total += rec.total_capacity_bps
    return total


@dataclass(frozen=True)
class DailyStat:
    """Per-feed, per-local-day mean / p95 / p5 triple.

    ``complete`` marks days with at least the completeness threshold of
    expected grid points; incomplete days are kept but excluded from fits,
    entropy, and profiles.
    """

    feed_id: str
    local_date: dt.date
    mean_bps: float
    p95_bps: float
    p5_bps: float
    sample_count: int
    complete: bool


# Registry snapshot text schema: one record per line, tab-separated fields
#   ixp_id  name  region  city  timezone  port_speeds_bps(comma-joined)  feed_url  feed_kind
# Empty port-speed field means capacity unknown; feed_url/feed_kind may be empty.

_REGISTRY_FIELDS = 8


def parse_registry_text(text: str) -> list[IxpRecord]:
    records = []
    seen_ids: dict[str, int] = {}
    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != _REGISTRY_FIELDS:
            raise RegistrySchemaError(line_no, f"expected {_REGISTRY_FIELDS} tab-separated fields, got {len(parts)}")
        ixp_id, name, region, city, timezone, speeds_s, url, kind = parts
        if region not in REGIONS:
            raise RegistrySchemaError(line_no, f"unknown region {region!r}")
        try:
            speeds = tuple(float(s) for s in speeds_s.split(",") if s != "")
        except ValueError:
            raise RegistrySchemaError(line_no, f"bad port speed list {speeds_s!r}") from None
        if any(s < 0 for s in speeds):
            raise RegistrySchemaError(line_no, "negative port speed")
        if kind and kind not in FEED_KINDS:
            raise RegistrySchemaError(line_no, f"unknown feed kind {kind!r}")
        if ixp_id in seen_ids:
            raise RegistrySchemaError(line_no, f"duplicate ixp_id {ixp_id!r} (first seen line {seen_ids[ixp_id]})")
        seen_ids[ixp_id] = line_no
        records.append(
            IxpRecord(
                ixp_id=ixp_id,
                name=name,
                region=region,
                city=city,
                timezone=timezone,
                port_speeds_bps=speeds,
                traffic_url=url or None,
                feed_kind=kind or None,
            )
        )
    return records


def format_registry_text(records) -> str:
    lines = []
    for r in records:
        speeds = ",".join(f"{s:.0f}" if float(s).is_integer() else repr(float(s)) for s in r.port_speeds_bps)
        lines.append(
            "\t".join(
                [r.ixp_id, r.name, r.region, r.city, r.timezone, speeds, r.traffic_url or "", r.feed_kind or ""]
            )
        )
    return "\n".join(lines) + ("\n" if lines else "")


def load_registry_snapshot(text: str, snapshot_date: dt.date) -> RegistrySnapshot:
    return RegistrySnapshot(snapshot_date=snapshot_date, records=tuple(parse_registry_text(text)))
