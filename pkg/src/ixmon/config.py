"""Run configuration: one JSON file drives every subcommand.

A run is fully determined by (config, seed) apart from wall-clock network
timing. All thresholds live here with explicit defaults; the CLI can override
the common ones. ``wall_epoch`` pins the simulated clock so that separate
processes sharing a config agree on simulated time.
"""

from __future__ import annotations

import datetime as dt
import json
import re
import time
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

from ixmon.core import (
    FeedDescriptor,
    IxmonError,
    IxpRecord,
    RegistrySnapshot,
    format_registry_text,
    validate_fleet,
)
from ixmon.collector import CollectorSettings
from ixmon.presets import flat_fleet, paper_regions_fleet
from ixmon.simulate.model import EventSpec, TrafficModel
from ixmon.timebase import AcceleratedClock


class ConfigError(IxmonError):
    pass


_RATE_RE = re.compile(r"^(\d+(?:\.\d+)?)\s*([KMGT]?)(?:bps)?$", re.IGNORECASE)
_RATE_UNITS = {"": 1.0, "K": 1e3, "M": 1e6, "G": 1e9, "T": 1e12}


def parse_rate(text: str | float | int) -> float:
    """'10G' / '2.5Tbps' / 1e9 -> bits per second."""
    if isinstance(text, (int, float)):
        return float(text)
    m = _RATE_RE.match(text.strip())
    if not m:
        raise ConfigError(f"cannot parse rate {text!r}")
    return float(m.group(1)) * _RATE_UNITS[m.group(2).upper()]


@dataclass(frozen=True)
class Thresholds:
    headroom_factor: float = 1.0
    completeness: float = 0.9
    cross_check_tolerance: float = 0.05
    plot_e2e_tolerance: float = 0.024  # digitization accuracy bound on own plots
    attrition_failures: int = 30
    attrition_span_s: float = 86400.0
    stale_after_s: float = 50.0
    failover_tick_s: float = 10.0
    demote_after: int = 3
    politeness_s: float = 1.0
    max_workers: int = 8
    http_timeout_s: float = 10.0
    anomaly_z: float = 3.0
    anomaly_ratio: float = 0.10
    anomaly_min_baseline: int = 6
    convergence_ma_days: int = 7
    growth_min_days: int = 30
    profile_min_weeks: int = 4
    scheduler_idle_s: float = 0.02

    def collector_settings(self) -> CollectorSettings:
        return CollectorSettings(
            max_workers=self.max_workers,
            politeness_s=self.politeness_s,
            http_timeout_s=self.http_timeout_s,
            attrition_failures=self.attrition_failures,
            attrition_span_s=self.attrition_span_s,
            stale_after_s=self.stale_after_s,
            failover_tick_s=self.failover_tick_s,
            demote_after=self.demote_after,
            headroom_factor=self.headroom_factor,
            cross_check_tolerance=self.cross_check_tolerance,
            scheduler_idle_s=self.scheduler_idle_s,
        )


@dataclass(frozen=True)
class RunConfig:
    seed: int = 0
    sim_epoch: int = 1672531200  # 2023-01-01 UTC
    accel: float = 1.0
    wall_epoch: float | None = None
    duration_s: int = 7 * 86400  # simulated data horizon
    store: str = "ixmon-store"
    out: str = "reports"
    host: str = "127.0.0.1"
    port: int = 8123
    role: str = "main"
    node_id: str | None = None
    registry_date: str = "2023-01-01"
    scopes: tuple[str, ...] | None = None
    fleet: dict = field(default_factory=lambda: {"preset": "paper-regions", "feeds_per_region": 2})
    thresholds: Thresholds = Thresholds()

    @property
    def base_url(self) -> str:
        return f"http://{self.host}:{self.port}"

    @property
    def effective_node_id(self) -> str:
        return self.node_id or self.role

    def make_clock(self) -> AcceleratedClock:
        wall_epoch = self.wall_epoch if self.wall_epoch is not None else time.time()
        return AcceleratedClock(self.sim_epoch, wall_epoch, self.accel)

    def snapshot_date(self) -> dt.date:
        return dt.date.fromisoformat(self.registry_date)

    # -- fleet construction -------------------------------------------------

    def build_fleet(self) -> tuple[list[tuple[FeedDescriptor, TrafficModel]], list[IxpRecord]]:
        fleet, records = self._assemble_fleet()
        try:
            validate_fleet([feed for feed, _ in fleet])
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        return fleet, records

    def _assemble_fleet(self):
        spec = dict(self.fleet)
        preset = spec.pop("preset", None)
        if preset == "paper-regions":
            spec.setdefault("seed", self.seed)
            spec.setdefault("sim_epoch", self.sim_epoch)
            if "growth_segments" in spec:
                spec["growth_segments"] = tuple(tuple(seg) for seg in spec["growth_segments"])
            return paper_regions_fleet(self.base_url, **spec)
        if preset == "flat":
            spec.setdefault("seed", self.seed)
            if "base_bps" in spec:
                spec["base_bps"] = parse_rate(spec["base_bps"])
            return flat_fleet(self.base_url, **spec)
        if preset is not None:
            raise ConfigError(f"unknown fleet preset {preset!r}")
        if "feeds" not in spec:
            raise ConfigError("fleet needs a 'preset' or explicit 'feeds'")
        return self._explicit_fleet(spec)

    def _explicit_fleet(self, spec: dict):
        fleet = []
        for entry in spec["feeds"]:
            e = dict(entry)
            model_spec = dict(e.pop("model"))
            events = tuple(EventSpec(**ev) for ev in model_spec.pop("events", ()))
            if "weekend_days" in model_spec:
                model_spec["weekend_days"] = frozenset(model_spec["weekend_days"])
            if "growth_segments" in model_spec:
                model_spec["growth_segments"] = tuple(
                    tuple(seg) for seg in model_spec["growth_segments"]
                )
            model_spec["base_bps"] = parse_rate(model_spec["base_bps"])
            model_spec.setdefault("anchor_ts", self.sim_epoch)
            model = TrafficModel(events=events, **model_spec)
            e.setdefault("endpoint", f"{self.base_url}/feeds/{e['feed_id']}")
            e["member_ixp_ids"] = frozenset(e["member_ixp_ids"])
            fleet.append((FeedDescriptor(**e), model))
        records = [
            IxpRecord(
                ixp_id=r["ixp_id"],
                name=r.get("name", r["ixp_id"]),
                region=r["region"],
                city=r.get("city", ""),
                timezone=r.get("timezone", "UTC"),
                port_speeds_bps=tuple(parse_rate(s) for s in r.get("port_speeds_bps", ())),
                traffic_url=r.get("traffic_url"),
                feed_kind=r.get("feed_kind"),
            )
            for r in spec.get("registry_records", ())
        ]
        return fleet, records

    def registry_snapshot(self) -> RegistrySnapshot:
        _, records = self.build_fleet()
        return RegistrySnapshot(snapshot_date=self.snapshot_date(), records=tuple(records))

    def registry_text(self) -> str:
        _, records = self.build_fleet()
        return format_registry_text(records)

    # -- (de)serialization ----------------------------------------------------

    @classmethod
    def from_dict(cls, raw: dict) -> "RunConfig":
        data = dict(raw)
        thresholds = Thresholds(**data.pop("thresholds", {}))
        if "scopes" in data and data["scopes"] is not None:
            data["scopes"] = tuple(data["scopes"])
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(thresholds=thresholds, **data)

    @classmethod
    def from_file(cls, path: str | Path) -> "RunConfig":
        try:
            raw = json.loads(Path(path).read_text())
        except FileNotFoundError:
            raise ConfigError(f"config file {path} not found") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {path} is not valid JSON: {exc}") from None
        return cls.from_dict(raw)

    def to_json(self) -> str:
        data = asdict(self)
        data["thresholds"] = asdict(self.thresholds)
        if data["scopes"] is not None:
            data["scopes"] = list(data["scopes"])
        return json.dumps(data, indent=2, sort_keys=True)

    def override(self, **kwargs) -> "RunConfig":
        kwargs = {k: v for k, v in kwargs.items() if v is not None}
        return replace(self, **kwargs) if kwargs else self
