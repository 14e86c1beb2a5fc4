"""Cumulative-correlation convergence of regional aggregates.

Feeds are ordered by ascending total volume; for each prefix we correlate the
prefix-sum growth trend against the full aggregate's trend. The trend is a
7-day centered moving average of daily means, which suppresses the weekly
seasonality a growth trend abstracts over. The curve reports the smallest
traffic share whose correlation exceeds 0.90 and 0.95.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ixmon.analytics.common import AnalyticsError, InsufficientData


class ZeroVariance(AnalyticsError):
    pass


def pearson(x, y) -> float:
    """Product-moment correlation; errors on zero variance."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("x and y must be 1-d and equal length")
    if len(x) < 2:
        raise InsufficientData("need at least 2 points")
    dx = x - x.mean()
    dy = y - y.mean()
    nx = float(np.linalg.norm(dx))
    ny = float(np.linalg.norm(dy))
    if nx == 0 or ny == 0:
        raise ZeroVariance("constant input series")
    # normalize each side first: the raw cross-moment product can under- or
    # overflow for extreme magnitudes
    return float((dx / nx) @ (dy / ny))


def moving_average(values, window: int = 7) -> np.ndarray:
    """Centered moving average (valid region only)."""
    values = np.asarray(values, dtype=float)
    if window < 1 or window % 2 == 0:
        raise ValueError("window must be odd and positive")
    if len(values) < window:
        raise InsufficientData(f"need at least {window} days for the trend")
    return np.convolve(values, np.ones(window) / window, mode="valid")


@dataclass(frozen=True)
class ConvergenceCurve:
    feed_order: tuple[str, ...]  # ascending total volume
    traffic_shares: np.ndarray  # strictly increasing, ends at exactly 1.0
    correlations: tuple  # float or None (undefined: zero-variance prefix)
    share_r90: float | None  # smallest share with r > 0.90
    share_r95: float | None

    def points(self) -> list[tuple[float, float | None]]:
        return list(zip(self.traffic_shares.tolist(), self.correlations))


def convergence(daily_means: dict[str, np.ndarray], ma_window: int = 7) -> ConvergenceCurve:
    """Build the convergence curve for one scope.

    ``daily_means`` maps feed_id to its daily-mean series on a common date
    grid. Ties in volume order break lexicographically by feed_id. The final
    point is (1.0, 1.0) by construction.
    """
    if not daily_means:
        raise AnalyticsError("empty scope")
    lengths = {len(v) for v in daily_means.values()}
    if len(lengths) != 1:
        raise AnalyticsError("feeds must share one date grid")
    totals = {fid: float(np.sum(v)) for fid, v in daily_means.items()}
    order = sorted(daily_means, key=lambda fid: (totals[fid], fid))
    n = len(order)

    volumes = np.array([totals[fid] for fid in order])
    shares = np.cumsum(volumes)
    if shares[-1] <= 0:
        raise AnalyticsError("scope carries no traffic")
    shares = shares / shares[-1]

    full = np.sum([daily_means[fid] for fid in order], axis=0)
    full_trend = moving_average(full, ma_window)

    correlations: list[float | None] = []
    prefix = np.zeros_like(full)
    for k, fid in enumerate(order):
        prefix = prefix + daily_means[fid]
        if k == n - 1:
            correlations.append(1.0)  # the full set correlates with itself exactly
            continue
        try:
            correlations.append(pearson(moving_average(prefix, ma_window), full_trend))
        except ZeroVariance:
            correlations.append(None)

    def first_share(threshold: float) -> float | None:
        for share, r in zip(shares, correlations):
            if r is not None and r > threshold:
                return float(share)
        return None

    return ConvergenceCurve(
        feed_order=tuple(order),
        traffic_shares=shares,
        correlations=tuple(correlations),
        share_r90=first_share(0.90),
        share_r95=first_share(0.95),
    )
