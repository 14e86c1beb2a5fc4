"""Port-capacity coverage, utilization, and capacity trajectories.

Capacity-unknown records (no advertised ports) are excluded from both sides
of every ratio. Utilization pairs each day with the contemporaneous registry
snapshot: the latest one dated on or before that day.
"""

from __future__ import annotations

import datetime as dt
from dataclasses import dataclass

from ixmon.core import RegistrySnapshot
from ixmon.analytics.common import AnalyticsError


def _scope_records(snapshot: RegistrySnapshot, region: str | None):
    return [
        r for r in snapshot.records if r.capacity_known and (region is None or r.region == region)
    ]


def capacity_coverage(
    snapshot: RegistrySnapshot, monitored_ixp_ids: set[str], region: str | None = None
) -> float:
    """Fraction of announced port capacity covered by monitored IXPs."""
    records = _scope_records(snapshot, region)
    total = sum(r.total_capacity_bps for r in records)
    if total == 0:
        raise AnalyticsError(f"no known capacity in scope {region or 'global'}")
    covered = sum(r.total_capacity_bps for r in records if r.ixp_id in monitored_ixp_ids)
    return covered / total


def utilization_series(
    dates,
    traffic_means_bps,
    snapshots: list[RegistrySnapshot],
    monitored_ixp_ids: set[str],
) -> list[tuple[dt.date, float]]:
    """Daily utilization: observed mean traffic over provisioned capacity of
    the same monitored IXP set, capacity taken from the latest snapshot dated
    on or before each day."""
    if len(dates) != len(traffic_means_bps):
        raise ValueError("dates and traffic means must align")
    if not snapshots:
        raise AnalyticsError("no registry snapshots")
    ordered = sorted(snapshots, key=lambda s: s.snapshot_date)
    out = []
    for day, traffic in zip(dates, traffic_means_bps):
        eligible = [s for s in ordered if s.snapshot_date <= day]
        if not eligible:
            continue
        snap = eligible[-1]
        capacity = sum(
            r.total_capacity_bps
            for r in snap.records
            if r.capacity_known and r.ixp_id in monitored_ixp_ids
        )
        if capacity == 0:
            raise AnalyticsError(f"zero known capacity for scope on {day}")
        out.append((day, float(traffic) / capacity))
    return out


@dataclass(frozen=True)
class CapacityTrajectory:
    dates: tuple  # snapshot dates
    total_capacity_bps: tuple[float, ...]
    # per-IXP capacity changes between consecutive snapshots, including
    # negative deltas (registries occasionally report reductions)
    deltas: tuple[tuple[dt.date, str, float], ...]


def capacity_trajectory(
    snapshots: list[RegistrySnapshot], region: str | None = None
) -> CapacityTrajectory:
    if len(snapshots) < 2:
        raise AnalyticsError("need at least 2 snapshots for a trajectory")
    ordered = sorted(snapshots, key=lambda s: s.snapshot_date)
    totals = []
    per_ixp: list[dict[str, float]] = []
    for snap in ordered:
        caps = {r.ixp_id: r.total_capacity_bps for r in _scope_records(snap, region)}
        per_ixp.append(caps)
        totals.append(sum(caps.values()))
    deltas = []
    for prev, cur, snap in zip(per_ixp, per_ixp[1:], ordered[1:]):
        for ixp_id in sorted(set(prev) | set(cur)):
            change = cur.get(ixp_id, 0.0) - prev.get(ixp_id, 0.0)
            if change != 0.0:
                deltas.append((snap.snapshot_date, ixp_id, change))
    return CapacityTrajectory(
        dates=tuple(s.snapshot_date for s in ordered),
        total_capacity_bps=tuple(totals),
        deltas=tuple(deltas),
    )
