"""Shared analytics errors and scope plumbing."""

from __future__ import annotations

import numpy as np

from ixmon.core import REGIONS, FeedDescriptor, IxmonError, RegistrySnapshot, TimeSeries


class AnalyticsError(IxmonError):
    pass


class InsufficientData(AnalyticsError):
    pass


def feed_region(feed: FeedDescriptor, snapshot: RegistrySnapshot) -> str | None:
    """The single region a feed's member IXPs share, or None (global feeds)."""
    regions = {snapshot.get(i).region for i in feed.member_ixp_ids if snapshot.get(i) is not None}
    return regions.pop() if len(regions) == 1 else None


def scope_feed_ids(
    feeds: dict[str, FeedDescriptor], snapshot: RegistrySnapshot, scope: str = "global"
) -> list[str]:
    """Resolve a scope ("global", a region name, or a feed_id) to feed ids.

    Globally distributed federated feeds count toward the global scope but
    are excluded from every regional one.
    """
    if scope == "global":
        return sorted(feeds)
    if scope in REGIONS:
        return sorted(
            fid
            for fid, f in feeds.items()
            if not f.global_federated and feed_region(f, snapshot) == scope
        )
    if scope in feeds:
        return [scope]
    raise AnalyticsError(f"scope {scope!r} is neither 'global', a region, nor a feed_id")


def sum_series(series_list: list[TimeSeries], feed_id: str = "aggregate") -> TimeSeries:
    """Pointwise sum over the timestamps all series cover (strict
    intersection, so partial coverage cannot masquerade as a traffic drop)."""
    if not series_list:
        raise AnalyticsError("nothing to aggregate")
    interval = series_list[0].interval_s
    if any(s.interval_s != interval for s in series_list):
        raise AnalyticsError("mixed intervals; resample first")
    common = series_list[0].timestamps
    for s in series_list[1:]:
        common = np.intersect1d(common, s.timestamps, assume_unique=True)
    total = np.zeros(common.shape)
    for s in series_list:
        idx = np.searchsorted(s.timestamps, common)
        total += s.values[idx]
    return TimeSeries(feed_id, interval, common, total)
