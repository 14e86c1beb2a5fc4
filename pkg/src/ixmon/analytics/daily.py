"""Per-day statistics and cross-feed aggregation.

Percentiles use the nearest-rank method: the ceil(p*N)-th order statistic,
1-indexed. Deterministic and trivially checkable against a sort.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ixmon.core import DailyStat, TimeSeries
from ixmon.timebase import DAY_S, day_index_to_date, local_fields
from ixmon.analytics.common import AnalyticsError


def nearest_rank(sorted_values: np.ndarray, p: float) -> float:
    """ceil(p*N)-th order statistic of an ascending array (1-indexed)."""
    n = len(sorted_values)
    if n == 0:
        raise ValueError("empty day")
    rank = max(1, math.ceil(p * n))
    return float(sorted_values[rank - 1])


def daily_stats(series: TimeSeries, timezone: str, completeness: float = 0.9) -> list[DailyStat]:
    """Mean, p95, and p5 per local calendar day; empty days yield no stat."""
    if len(series) == 0:
        return []
    day_idx, _, _ = local_fields(series.timestamps, timezone)
    expected = DAY_S // series.interval_s
    out = []
    for day in np.unique(day_idx):
        vals = series.values[day_idx == day]
        ordered = np.sort(vals)
        n = len(vals)
        out.append(
            DailyStat(
                feed_id=series.feed_id,
                local_date=day_index_to_date(int(day)),
                mean_bps=float(vals.mean()),
                p95_bps=nearest_rank(ordered, 0.95),
                p5_bps=nearest_rank(ordered, 0.05),
                sample_count=n,
                complete=n >= completeness * expected,
            )
        )
    return out


@dataclass(frozen=True)
class AggregateDaily:
    """Per-day sums of each metric across a set of feeds on a common grid."""

    feed_ids: tuple[str, ...]
    dates: tuple  # of datetime.date
    mean_bps: np.ndarray
    p95_bps: np.ndarray
    p5_bps: np.ndarray

    def metric(self, name: str) -> np.ndarray:
        return {"mean": self.mean_bps, "p95": self.p95_bps, "p5": self.p5_bps}[name]


def aggregate(stats_by_feed: dict[str, list[DailyStat]]) -> AggregateDaily:
    """Sum daily mean/p95/p5 across feeds over their common complete dates."""
    if not stats_by_feed:
        raise AnalyticsError("empty scope")
    complete = {
        fid: {s.local_date: s for s in stats if s.complete}
        for fid, stats in stats_by_feed.items()
    }
    common = None
    for per_date in complete.values():
        dates = set(per_date)
        common = dates if common is None else common & dates
    common = sorted(common or ())
    if not common:
        raise AnalyticsError("no common complete dates across scope feeds")
    mean = np.array([sum(complete[f][d].mean_bps for f in complete) for d in common])
    p95 = np.array([sum(complete[f][d].p95_bps for f in complete) for d in common])
    p5 = np.array([sum(complete[f][d].p5_bps for f in complete) for d in common])
    return AggregateDaily(
        feed_ids=tuple(sorted(stats_by_feed)),
        dates=tuple(common),
        mean_bps=mean,
        p95_bps=p95,
        p5_bps=p5,
    )
