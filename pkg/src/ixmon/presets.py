"""Built-in fleet presets with planted, recoverable parameters.

The ``paper-regions`` preset plants one fleet per region with published
regional anchors (amplitude, weekend behavior, utilization target, volume
share); analytics run against it should recover the planted values. Peak
times other than Australia's 20:25 are invented defaults. Feed volumes within
a region follow a geometric ladder so convergence curves are non-trivial, and
each region's largest feed is federated (two member IXPs) when the region has
three or more feeds. A globally distributed federated feed can be included to
exercise its exclusion from regional scopes.
"""

from __future__ import annotations

from dataclasses import dataclass

from ixmon.core import WEEKEND_DAYS, FeedDescriptor, IxpRecord
from ixmon.simulate.model import TrafficModel

#: Traffic share ladder within a region (largest feed last).
VOLUME_RATIO = 0.7

#: Fraction of regional capacity left unmonitored so coverage lands near the
#: published 87% median.
COVERAGE_TARGET = 0.87


@dataclass(frozen=True)
class RegionPreset:
    slug: str
    timezones: tuple[str, ...]
    diurnal_amplitude: float
    peak_minute: int
    weekend_peak_delta: float
    util_target: float
    volume_bps: float  # regional aggregate daily mean anchor
    city: str


REGION_PRESETS: dict[str, RegionPreset] = {
    "Africa": RegionPreset("af", ("Africa/Lagos", "Africa/Nairobi"), 3.26, 1230, -0.0005, 0.0875, 3.6e12, "Lagos"),
    "Asia-Pacific": RegionPreset("ap", ("Asia/Singapore", "Asia/Tokyo"), 3.47, 1260, -0.037, 0.0799, 24.7e12, "Singapore"),
    "Australia": RegionPreset("au", ("Australia/Brisbane", "Australia/Perth"), 3.47, 1225, 0.0028, 0.0357, 1.7e12, "Brisbane"),
    "Europe": RegionPreset("eu", ("Europe/Berlin", "Europe/London"), 3.15, 1260, -0.016, 0.0927, 70.2e12, "Frankfurt"),
    "Middle East": RegionPreset("me", ("Asia/Dubai", "Asia/Riyadh"), 1.9, 1370, 0.0, 0.075, 1.3e12, "Dubai"),
    "N. America": RegionPreset("na", ("America/New_York", "America/Chicago"), 2.19, 1260, 0.002, 0.0496, 13.6e12, "Ashburn"),
    "S. America": RegionPreset("sa", ("America/Sao_Paulo", "America/Bogota"), 4.7, 1270, -0.088, 0.060, 29.0e12, "Sao Paulo"),
}

_KINDS = ("api", "html", "plot_image")


def _geometric_weights(n: int) -> list[float]:
    raw = [VOLUME_RATIO ** (n - 1 - k) for k in range(n)]
    total = sum(raw)
    return [w / total for w in raw]


def paper_regions_fleet(
    base_url: str,
    feeds_per_region: int = 2,
    seed: int = 0,
    sim_epoch: int = 1672531200,
    interval_s: int = 300,
    poll_period_s: int | None = None,
    noise_cv: float = 0.05,
    growth_rate: float = 0.0,
    growth_segments: tuple[tuple[int, float], ...] = (),
    include_global_federated: bool = True,
    volume_scale: float = 1.0,
) -> tuple[list[tuple[FeedDescriptor, TrafficModel]], list[IxpRecord]]:
    """Build the regional fleets plus a matching registry."""
    poll_period_s = poll_period_s or interval_s
    fleet: list[tuple[FeedDescriptor, TrafficModel]] = []
    records: list[IxpRecord] = []
    kind_cursor = 0

    for region in sorted(REGION_PRESETS):
        preset = REGION_PRESETS[region]
        weights = _geometric_weights(feeds_per_region)
        monitored_capacity = 0.0
        for k, weight in enumerate(weights):
            feed_id = f"{preset.slug}-{k:02d}"
            base = preset.volume_bps * volume_scale * weight
            tz = preset.timezones[k % len(preset.timezones)]
            federated = feeds_per_region >= 3 and k == feeds_per_region - 1
            member_ids = (
                (f"ixp-{feed_id}-a", f"ixp-{feed_id}-b") if federated else (f"ixp-{feed_id}",)
            )
            kind = _KINDS[kind_cursor % len(_KINDS)]
            kind_cursor += 1

            capacity = base / preset.util_target
            monitored_capacity += capacity
            per_ixp = capacity / len(member_ids)
            for ixp_id in member_ids:
                records.append(
                    IxpRecord(
                        ixp_id=ixp_id,
                        name=f"IX {ixp_id}",
                        region=region,
                        city=preset.city,
                        timezone=tz,
                        port_speeds_bps=(per_ixp / 2, per_ixp / 2),
                        traffic_url=f"{base_url}/feeds/{feed_id}",
                        feed_kind=kind,
                    )
                )
            fleet.append(
                (
                    FeedDescriptor(
                        feed_id=feed_id,
                        kind=kind,
                        endpoint=f"{base_url}/feeds/{feed_id}",
                        interval_s=interval_s,
                        timezone=tz,
                        member_ixp_ids=frozenset(member_ids),
                        poll_period_s=poll_period_s,
                    ),
                    TrafficModel(
                        base_bps=base,
                        timezone=tz,
                        diurnal_amplitude=preset.diurnal_amplitude,
                        peak_local_time=preset.peak_minute,
                        weekend_peak_delta=preset.weekend_peak_delta,
                        weekend_days=WEEKEND_DAYS[region],
                        noise_cv=noise_cv,
                        growth_rate=growth_rate,
                        anchor_ts=sim_epoch,
                        growth_segments=growth_segments,
                        seed=seed * 1_000_003 + kind_cursor,
                    ),
                )
            )

        # unmonitored capacity sized to land coverage near the target, plus
        # one capacity-unknown record per region (kept, flagged, excluded)
        unmonitored = monitored_capacity * (1.0 / COVERAGE_TARGET - 1.0)
        records.append(
            IxpRecord(
                ixp_id=f"ixp-{preset.slug}-dark",
                name=f"IX {preset.slug} dark",
                region=region,
                city=preset.city,
                timezone=preset.timezones[0],
                port_speeds_bps=(unmonitored,),
            )
        )
        records.append(
            IxpRecord(
                ixp_id=f"ixp-{preset.slug}-nocap",
                name=f"IX {preset.slug} nocap",
                region=region,
                city=preset.city,
                timezone=preset.timezones[0],
                port_speeds_bps=(),
            )
        )

    if include_global_federated:
        member_ids = ("ixp-gf-eu", "ixp-gf-na", "ixp-gf-ap")
        regions = ("Europe", "N. America", "Asia-Pacific")
        base = 2.0e12 * volume_scale
        capacity = base / 0.08
        for ixp_id, region in zip(member_ids, regions):
            preset = REGION_PRESETS[region]
            records.append(
                IxpRecord(
                    ixp_id=ixp_id,
                    name=f"IX {ixp_id}",
                    region=region,
                    city=preset.city,
                    timezone=preset.timezones[0],
                    port_speeds_bps=(capacity / len(member_ids),),
                    traffic_url=f"{base_url}/feeds/gf-00",
                    feed_kind="api",
                )
            )
        fleet.append(
            (
                FeedDescriptor(
                    feed_id="gf-00",
                    kind="api",
                    endpoint=f"{base_url}/feeds/gf-00",
                    interval_s=interval_s,
                    timezone="UTC",
                    member_ixp_ids=frozenset(member_ids),
                    poll_period_s=poll_period_s,
                    global_federated=True,
                ),
                TrafficModel(
                    base_bps=base,
                    timezone="UTC",
                    diurnal_amplitude=1.6,
                    peak_local_time=1140,
                    noise_cv=noise_cv,
                    growth_rate=growth_rate,
                    anchor_ts=sim_epoch,
                    growth_segments=growth_segments,
                    seed=seed * 1_000_003 + 9999,
                ),
            )
        )
    return fleet, records


def flat_fleet(
    base_url: str,
    n_feeds: int = 1,
    base_bps: float = 10e9,
    seed: int = 0,
    interval_s: int = 300,
    poll_period_s: int | None = None,
    kinds: tuple[str, ...] = _KINDS,
) -> tuple[list[tuple[FeedDescriptor, TrafficModel]], list[IxpRecord]]:
    """Constant-rate feeds; the degenerate fixture for determinism checks."""
    poll_period_s = poll_period_s or interval_s
    fleet, records = [], []
    for k in range(n_feeds):
        feed_id = f"flat-{k:02d}"
        ixp_id = f"ixp-{feed_id}"
        kind = kinds[k % len(kinds)]
        records.append(
            IxpRecord(
                ixp_id=ixp_id,
                name=f"IX {feed_id}",
                region="Europe",
                city="Amsterdam",
                timezone="UTC",
                port_speeds_bps=(base_bps * 10, base_bps * 10),
                traffic_url=f"{base_url}/feeds/{feed_id}",
                feed_kind=kind,
            )
        )
        fleet.append(
            (
                FeedDescriptor(
                    feed_id=feed_id,
                    kind=kind,
                    endpoint=f"{base_url}/feeds/{feed_id}",
                    interval_s=interval_s,
                    timezone="UTC",
                    member_ixp_ids=frozenset({ixp_id}),
                    poll_period_s=poll_period_s,
                ),
                TrafficModel(base_bps=base_bps, seed=seed * 1_000_003 + k),
            )
        )
    return fleet, records
