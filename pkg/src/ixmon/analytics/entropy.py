"""Shannon entropy of daily traffic mass distributions.

A day's samples are treated as a probability mass function (p_i = x_i / sum x)
and H = -sum p_i log2 p_i, in bits, with 0 log 0 = 0. A perfectly flat day of
N samples scores log2 N; mass concentrated in one sample scores 0. Structured
diurnal days concentrate mass and score below the flat bound.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ixmon.core import TimeSeries
from ixmon.timebase import DAY_S, local_fields
from ixmon.analytics.common import AnalyticsError, InsufficientData


def shannon_entropy(values) -> float:
    """Entropy in bits of one day's raw sample mass distribution."""
    x = np.asarray(values, dtype=float)
    if x.size == 0:
        raise AnalyticsError("empty day")
    if np.any(x < 0):
        raise AnalyticsError("negative sample mass")
    total = x.sum()
    if total == 0:
        raise AnalyticsError("all-zero day: entropy undefined")
    p = x / total
    p = p[p > 0]  # filter after normalizing: tiny masses can underflow to 0
    return float(-(p * np.log2(p)).sum())


@dataclass(frozen=True)
class EntropyScanPoint:
    feed_id: str
    mean_bps: float
    mean_daily_entropy_bits: float
    n_days: int


def daily_entropies(series: TimeSeries, timezone: str, completeness: float = 0.9) -> list[float]:
    """Entropy per complete local day."""
    if len(series) == 0:
        return []
    day_idx, _, _ = local_fields(series.timestamps, timezone)
    expected = DAY_S // series.interval_s
    out = []
    for day in np.unique(day_idx):
        vals = series.values[day_idx == day]
        if len(vals) >= completeness * expected and vals.sum() > 0:
            out.append(shannon_entropy(vals))
    return out


def entropy_volume_scan(
    series_by_feed: dict[str, TimeSeries],
    tz_by_feed: dict[str, str],
    min_days: int = 7,
    completeness: float = 0.9,
) -> list[EntropyScanPoint]:
    """Mean daily entropy paired with mean volume, one point per feed."""
    points = []
    for fid in sorted(series_by_feed):
        series = series_by_feed[fid]
        ents = daily_entropies(series, tz_by_feed[fid], completeness)
        if len(ents) < min_days:
            raise InsufficientData(f"feed {fid}: {len(ents)} complete days < {min_days}")
        points.append(
            EntropyScanPoint(
                feed_id=fid,
                mean_bps=float(series.values.mean()),
                mean_daily_entropy_bits=float(np.mean(ents)),
                n_days=len(ents),
            )
        )
    return points
