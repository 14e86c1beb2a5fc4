"""Timezone-local weekly traffic profiles and their shape metrics.

Each feed's samples are shifted to its local time, bucketed into a
7 x slots-per-day grid, averaged over complete days, and summed across the
scope (traffic-weighted); the grid is then normalized by its overall mean, so
cells read as multiples of the average rate and the full-week mean is 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ixmon.core import TimeSeries
from ixmon.timebase import DAY_S, local_fields
from ixmon.analytics.common import AnalyticsError, InsufficientData


@dataclass(frozen=True)
class WeeklyProfile:
    interval_s: int
    grid: np.ndarray  # 7 x slots, local time, mean-normalized
    weekend_days: frozenset[int]
    weeks_used: int  # complete days available per weekday (minimum)
    peak_to_trough_weekday: float
    peak_to_trough_weekend: float
    peak_time_weekday_min: int  # minutes past local midnight
    peak_time_weekend_min: int
    trough_time_weekday_min: int
    weekend_peak_delta: float  # (weekend peak - weekday peak) / weekday peak
    late_night_share: float  # mean over 23:00-02:00 vs daily mean
    morning_dip: float  # 1 - weekend/weekday mean over 08:00-12:00


def _circular_smooth(curve: np.ndarray, window: int = 5) -> np.ndarray:
    """Centered circular moving average; midnight wraps around."""
    if window <= 1:
        return curve
    pad = window // 2
    padded = np.concatenate([curve[-pad:], curve, curve[:pad]])
    return np.convolve(padded, np.ones(window) / window, mode="valid")


def _phase_minute(curve: np.ndarray, interval_s: int) -> int:
    """Peak time from the first circular harmonic's phase, rounded to the
    slot grid. Diurnal curves are flat near their top, so a raw argmax is
    noise-dominated there; the harmonic phase pools the whole day."""
    slots = len(curve)
    theta = 2.0 * np.pi * np.arange(slots) / slots
    phase = np.arctan2(float(curve @ np.sin(theta)), float(curve @ np.cos(theta)))
    minute = (phase / (2.0 * np.pi) * 1440.0) % 1440.0
    step = interval_s // 60
    return int(round(minute / step) * step) % 1440


def _feed_grid(series: TimeSeries, timezone: str, completeness: float):
    """(sum, count) accumulation grids over complete local days."""
    slots = DAY_S // series.interval_s
    day_idx, weekday, sec = local_fields(series.timestamps, timezone)
    slot = sec // series.interval_s
    counts_per_day = np.bincount(day_idx - day_idx.min())
    complete_days = np.flatnonzero(counts_per_day >= completeness * slots) + day_idx.min()
    keep = np.isin(day_idx, complete_days)

    sums = np.zeros((7, slots))
    counts = np.zeros((7, slots), dtype=int)
    np.add.at(sums, (weekday[keep], slot[keep]), series.values[keep])
    np.add.at(counts, (weekday[keep], slot[keep]), 1)
    day_tally = np.zeros(7, dtype=int)
    wd_of_complete = (complete_days + 3) % 7
    for w in range(7):
        day_tally[w] = int((wd_of_complete == w).sum())
    return sums, counts, day_tally


def weekly_profile(
    series_by_feed: dict[str, TimeSeries],
    tz_by_feed: dict[str, str],
    weekend_days: frozenset[int] = frozenset({5, 6}),
    min_weeks: int = 4,
    completeness: float = 0.9,
) -> WeeklyProfile:
    if not series_by_feed:
        raise AnalyticsError("empty scope")
    intervals = {s.interval_s for s in series_by_feed.values()}
    if len(intervals) != 1:
        raise AnalyticsError("mixed intervals; resample the scope to one interval first")
    interval = intervals.pop()
    slots = DAY_S // interval

    scope_grid = np.zeros((7, slots))
    weeks_used = None
    for fid, series in series_by_feed.items():
        sums, counts, day_tally = _feed_grid(series, tz_by_feed[fid], completeness)
        if int(day_tally.min()) < min_weeks:
            raise InsufficientData(
                f"feed {fid}: only {int(day_tally.min())} complete days for some weekday, "
                f"need {min_weeks}"
            )
        weeks_used = int(day_tally.min()) if weeks_used is None else min(weeks_used, int(day_tally.min()))
        with np.errstate(invalid="ignore"):
            mean_grid = np.where(counts > 0, sums / np.maximum(counts, 1), 0.0)
        scope_grid += mean_grid

    overall = scope_grid.mean()
    if overall <= 0:
        raise AnalyticsError("scope carries no traffic")
    grid = scope_grid / overall

    weekday_rows = [w for w in range(7) if w not in weekend_days]
    weekend_rows = sorted(weekend_days)
    # light circular smoothing before extremes: slot-level noise otherwise
    # biases max/min outward on desk-scale corpora
    curve_wd = _circular_smooth(grid[weekday_rows].mean(axis=0))
    curve_we = _circular_smooth(grid[weekend_rows].mean(axis=0))

    minutes = interval // 60
    slot_minutes = np.arange(slots) * minutes
    late_night = (slot_minutes >= 23 * 60) | (slot_minutes < 2 * 60)
    morning = (slot_minutes >= 8 * 60) & (slot_minutes < 12 * 60)

    wd_morning = curve_wd[morning].mean()
    we_morning = curve_we[morning].mean()

    return WeeklyProfile(
        interval_s=interval,
        grid=grid,
        weekend_days=weekend_days,
        weeks_used=weeks_used,
        peak_to_trough_weekday=float(curve_wd.max() / curve_wd.min()),
        peak_to_trough_weekend=float(curve_we.max() / curve_we.min()),
        peak_time_weekday_min=_phase_minute(curve_wd, interval),
        peak_time_weekend_min=_phase_minute(curve_we, interval),
        trough_time_weekday_min=int(curve_wd.argmin()) * minutes,
        weekend_peak_delta=float(curve_we.max() / curve_wd.max() - 1.0),
        late_night_share=float(grid[:, late_night].mean()),
        morning_dip=float(1.0 - we_morning / wd_morning) if wd_morning > 0 else 0.0,
    )
