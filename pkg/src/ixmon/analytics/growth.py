"""Growth fits and day-to-day volatility of aggregate daily series."""

from __future__ import annotations

import datetime as dt
from dataclasses import dataclass

import numpy as np

from ixmon.analytics.common import InsufficientData


@dataclass(frozen=True)
class GrowthReport:
    window: tuple[dt.date, dt.date]
    metric: str
    fit_slope_bps_per_day: float
    percent_growth: float  # (fit(t1) - fit(t0)) / fit(t0)
    r_squared: float
    n_days: int


def growth_fit(dates, values, metric: str = "mean", min_days: int = 30) -> GrowthReport:
    """Ordinary least squares on (day index, value); growth from fitted endpoints."""
    values = np.asarray(values, dtype=float)
    if len(dates) != len(values):
        raise ValueError("dates and values must align")
    if len(dates) < min_days:
        raise InsufficientData(f"{len(dates)} days < {min_days} required")
    x = np.array([(d - dates[0]).days for d in dates], dtype=float)
    slope, intercept = np.polyfit(x, values, 1)
    fitted = slope * x + intercept
    start, end = fitted[0], fitted[-1]
    if start <= 0:
        raise InsufficientData("fitted start level is non-positive; growth undefined")
    ss_res = float(((values - fitted) ** 2).sum())
    ss_tot = float(((values - values.mean()) ** 2).sum())
    r2 = 1.0 if ss_tot == 0 and ss_res == 0 else (1.0 - ss_res / ss_tot if ss_tot > 0 else 0.0)
    return GrowthReport(
        window=(dates[0], dates[-1]),
        metric=metric,
        fit_slope_bps_per_day=float(slope),
        percent_growth=float((end - start) / start),
        r_squared=r2,
        n_days=len(dates),
    )


def volatility(values) -> tuple[float, float]:
    """Day-over-day volatility of a daily series.

    Returns (standard deviation of daily differences in bps,
    mean |daily difference| as percent of the series mean).
    """
    values = np.asarray(values, dtype=float)
    if len(values) < 2:
        raise InsufficientData("need at least 2 days")
    diffs = np.diff(values)
    abs_std = float(diffs.std())
    mean_level = float(values.mean())
    rel_pct = float(np.abs(diffs).mean() / mean_level * 100.0) if mean_level > 0 else 0.0
    return abs_std, rel_pct
