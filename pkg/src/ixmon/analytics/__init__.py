from ixmon.analytics.common import AnalyticsError, InsufficientData, scope_feed_ids, sum_series
from ixmon.analytics.daily import AggregateDaily, aggregate, daily_stats
from ixmon.analytics.growth import GrowthReport, growth_fit, volatility
from ixmon.analytics.convergence import ConvergenceCurve, convergence, pearson
from ixmon.analytics.entropy import entropy_volume_scan, shannon_entropy
from ixmon.analytics.profiles import WeeklyProfile, weekly_profile
from ixmon.analytics.anomaly import AnomalyFinding, detect_anomalies
from ixmon.analytics.capacity import (
    CapacityTrajectory,
    capacity_coverage,
    capacity_trajectory,
    utilization_series,
)

__all__ = [
    "AnalyticsError",
    "InsufficientData",
    "scope_feed_ids",
    "sum_series",
    "AggregateDaily",
    "aggregate",
    "daily_stats",
    "GrowthReport",
    "growth_fit",
    "volatility",
    "ConvergenceCurve",
    "convergence",
    "pearson",
    "entropy_volume_scan",
    "shannon_entropy",
    "WeeklyProfile",
    "weekly_profile",
    "AnomalyFinding",
    "detect_anomalies",
    "CapacityTrajectory",
    "capacity_coverage",
    "capacity_trajectory",
    "utilization_series",
]
