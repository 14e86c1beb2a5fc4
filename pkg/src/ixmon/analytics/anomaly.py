"""Shape-based anomaly detection against same-weekday baselines.

Each complete local day is normalized by its own mean; its baseline is the
pointwise median of the other same-weekday days in the window. The day's
shape distance (RMS deviation from baseline) is scored as a z-score against
the distances those baseline days show among themselves; days past the
threshold are flagged and their deviating intra-day windows reported.
"""

from __future__ import annotations

import datetime as dt
from dataclasses import dataclass

import numpy as np

from ixmon.core import TimeSeries
from ixmon.timebase import DAY_S, day_index_to_date, local_fields
from ixmon.analytics.common import InsufficientData


@dataclass(frozen=True)
class AnomalyFinding:
    local_date: dt.date
    weekday: int  # Monday = 0
    score: float
    windows: tuple[tuple[int, int, float], ...]  # (start_min, end_min, extreme ratio)


def _day_curves(series: TimeSeries, timezone: str, completeness: float):
    """Normalized intra-day curves (NaN for missing slots) per complete day."""
    slots = DAY_S // series.interval_s
    day_idx, weekday, sec = local_fields(series.timestamps, timezone)
    slot = sec // series.interval_s
    curves: dict[int, np.ndarray] = {}
    weekdays: dict[int, int] = {}
    for day in np.unique(day_idx):
        m = day_idx == day
        if m.sum() < completeness * slots:
            continue
        curve = np.full(slots, np.nan)
        curve[slot[m]] = series.values[m]
        mean = np.nanmean(curve)
        if not np.isfinite(mean) or mean <= 0:
            continue
        curves[int(day)] = curve / mean
        weekdays[int(day)] = int(weekday[m][0])
    return curves, weekdays


def _shape_distance(curve: np.ndarray, baseline: np.ndarray) -> float:
    diff = curve - baseline
    return float(np.sqrt(np.nanmean(diff * diff)))


def _deviating_windows(
    curve: np.ndarray, baseline: np.ndarray, interval_s: int, ratio_threshold: float
) -> tuple[tuple[int, int, float], ...]:
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = curve / baseline
    deviating = np.abs(ratio - 1.0) > ratio_threshold
    deviating &= np.isfinite(ratio)
    windows = []
    minutes = interval_s // 60
    start = None
    for s, dev in enumerate(deviating.tolist() + [False]):
        if dev and start is None:
            start = s
        elif not dev and start is not None:
            seg = ratio[start:s]
            extreme = seg[np.nanargmax(np.abs(seg - 1.0))]
            windows.append((start * minutes, s * minutes, float(extreme)))
            start = None
    return tuple(windows)


def detect_anomalies(
    series: TimeSeries,
    timezone: str,
    threshold_z: float = 3.0,
    ratio_threshold: float = 0.10,
    min_baseline: int = 6,
    completeness: float = 0.9,
) -> list[AnomalyFinding]:
    curves, weekdays = _day_curves(series, timezone, completeness)
    by_weekday: dict[int, list[int]] = {}
    for day, wd in weekdays.items():
        by_weekday.setdefault(wd, []).append(day)

    # leave-one-out distance for every day of a weekday group
    distances: dict[int, float] = {}
    for wd, days in by_weekday.items():
        if len(days) < min_baseline + 1:
            continue
        stack = {d: curves[d] for d in days}
        for d in days:
            others = np.stack([stack[o] for o in days if o != d])
            baseline = np.nanmedian(others, axis=0)
            distances[d] = _shape_distance(stack[d], baseline)

    if not distances:
        raise InsufficientData(
            f"no weekday has {min_baseline + 1} complete days in the window"
        )

    findings = []
    for wd, days in sorted(by_weekday.items()):
        scored = [d for d in days if d in distances]
        for d in scored:
            peers = np.array([distances[o] for o in scored if o != d])
            if len(peers) < min_baseline:
                continue
            mu, sd = float(peers.mean()), float(peers.std(ddof=1))
            if sd < 1e-12:
                score = 0.0 if distances[d] <= mu + 1e-12 else float("inf")
            else:
                score = (distances[d] - mu) / sd
            if score > threshold_z:
                others = np.stack([curves[o] for o in days if o != d])
                baseline = np.nanmedian(others, axis=0)
                findings.append(
                    AnomalyFinding(
                        local_date=day_index_to_date(d),
                        weekday=wd,
                        score=score,
                        windows=_deviating_windows(
                            curves[d], baseline, series.interval_s, ratio_threshold
                        ),
                    )
                )
    findings.sort(key=lambda f: f.local_date)
    return findings
