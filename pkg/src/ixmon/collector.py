"""Polling scheduler, sample validation, and main/backup failover.

Two nodes may run against one store. The main node polls from the start; the
backup watches data freshness (per-node write markers in the store, wall
clock) and promotes itself when the newest write is older than the staleness
threshold. It demotes again after observing the main's writes fresh for a few
consecutive checks. Arbitration is entirely data-driven; a brief dual-writer
interval is harmless because appends are idempotent per grid point.

Scheduling note: poll cadence is tracked in simulated time (it must keep up
with the data), while per-host politeness spacing and all failover thresholds
are wall-clock (they protect real servers and detect real outages).
"""

from __future__ import annotations

import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from urllib.parse import urlparse

import requests

from ixmon.core import (
    FeedDescriptor,
    RegistrySnapshot,
    feed_capacity_bps,
    validate_sample,
)
from ixmon.digitize import PlotError, digitize_plot
from ixmon.extract import ExtractionError, extract_api, extract_html
from ixmon.simulate.render import PlotConfig
from ixmon.store import Store


@dataclass(frozen=True)
class CollectorSettings:
    max_workers: int = 8
    politeness_s: float = 1.0  # wall seconds between requests to one host
    http_timeout_s: float = 10.0
    attrition_failures: int = 30
    attrition_span_s: float = 86400.0  # sim seconds of consecutive failure
    stale_after_s: float = 50.0  # wall; backup promotes past this age
    failover_tick_s: float = 10.0  # wall
    demote_after: int = 3
    marker_interval_s: float = 5.0  # wall; active node's heartbeat cadence
    headroom_factor: float = 1.0
    cross_check_tolerance: float = 0.05
    scheduler_idle_s: float = 0.02


@dataclass(frozen=True)
class NodeRole:
    role: str  # "main" | "backup"
    active: bool
    last_observed_freshness_s: float = 0.0


@dataclass
class _FeedRuntime:
    feed: FeedDescriptor
    next_poll_at: float  # sim time
    consecutive_failures: int = 0
    first_failure_sim: float | None = None
    in_flight: bool = False
    polls: int = 0
    stored: int = 0
    rejected: int = 0
    quarantined: int = 0


@dataclass
class PollOutcome:
    fetched: int = 0
    stored: int = 0
    rejected: int = 0
    quarantined: bool = False
    failed: bool = False
    error: str = ""


class FailoverMonitor:
    """Freshness-driven promotion/demotion state machine for the backup node."""

    def __init__(self, store: Store, clock, settings: CollectorSettings, node_id: str,
                 main_node_id: str = "main"):
        self.store = store
        self.clock = clock
        self.settings = settings
        self.node_id = node_id
        self.main_node_id = main_node_id
        self.role = NodeRole(role="backup", active=False)
        self._fresh_checks = 0
        self._started_wall = clock.wall()

    def tick(self) -> str | None:
        """Run one freshness check; returns "promoted"/"demoted" on a transition."""
        wall = self.clock.wall()
        try:
            newest = self.store.newest_marker_wall()
        except OSError as exc:  # store unreachable: hold the current role
            self.store_log_safe(wall, "warn", "-", "store_unreachable", str(exc))
            return None
        age = wall - (newest if newest is not None else self._started_wall)
        self.role = replace(self.role, last_observed_freshness_s=age)

        if not self.role.active:
            if age > self.settings.stale_after_s:
                self.role = replace(self.role, active=True)
                self._fresh_checks = 0
                self.store.log_event(wall, "info", "-", "promoted",
                                     f"node={self.node_id} freshness_age={age:.1f}s")
                return "promoted"
            return None

        main_wall = self.store.marker_wall(self.main_node_id)
        fresh = main_wall is not None and (wall - main_wall) < self.settings.stale_after_s
        self._fresh_checks = self._fresh_checks + 1 if fresh else 0
        if self._fresh_checks >= self.settings.demote_after:
            self.role = replace(self.role, active=False)
            self._fresh_checks = 0
            self.store.log_event(wall, "info", "-", "demoted",
                                 f"node={self.node_id} main_fresh_checks={self.settings.demote_after}")
            return "demoted"
        return None

    def store_log_safe(self, wall, level, feed, event, detail):
        try:
            self.store.log_event(wall, level, feed, event, detail)
        except OSError:
            pass


class CollectorNode:
    """One collector process: schedules polls, extracts, validates, stores."""

    def __init__(
        self,
        feeds,
        store: Store,
        clock,
        node_id: str = "main",
        role: str = "main",
        settings: CollectorSettings = CollectorSettings(),
        registry: RegistrySnapshot | None = None,
        collect_from: int | None = None,
        plot_config: PlotConfig = PlotConfig(),
    ):
        if role not in ("main", "backup"):
            raise ValueError(f"role must be main or backup, got {role!r}")
        self.store = store
        self.clock = clock
        self.node_id = node_id
        self.role = role
        self.settings = settings
        self.registry = registry
        self.plot_config = plot_config
        self.collect_from = collect_from
        now = clock.now()
        self._runtime = {f.feed_id: _FeedRuntime(feed=f, next_poll_at=now) for f in feeds}
        self.monitor = (
            FailoverMonitor(store, clock, settings, node_id) if role == "backup" else None
        )
        self.request_log: list[tuple[str, float, float]] = []  # (feed_id, sim_ts, wall_ts)
        self._log_lock = threading.Lock()
        self._host_last: dict[str, float] = {}
        self._host_lock = threading.Lock()
        self._local = threading.local()

    # -- polling ------------------------------------------------------------

    @property
    def active(self) -> bool:
        return True if self.role == "main" else self.monitor.role.active

    def _session(self) -> requests.Session:
        if not hasattr(self._local, "session"):
            self._local.session = requests.Session()
        return self._local.session

    def _window_for(self, feed: FeedDescriptor) -> tuple[int, int] | None:
        """Inclusive grid bounds to request next, resuming from the store."""
        step = feed.interval_s
        latest = self.store.latest_timestamp(feed.feed_id)
        start = self.collect_from if self.collect_from is not None else int(self.clock.now()) - 86400
        t0 = latest + step if latest is not None else (start // step) * step
        t1 = int(self.clock.now()) // step * step
        if feed.kind == "plot_image":
            t1 = min(t1, t0 + (self.plot_config.columns - 1) * step)
        if t0 > t1:
            return None
        return t0, t1

    def poll_once(self, feed: FeedDescriptor) -> PollOutcome:
        """Fetch -> extract -> validate -> append; never raises."""
        out = PollOutcome()
        window = self._window_for(feed)
        wall = self.clock.wall()
        if window is None:
            return out
        t0, t1 = window
        try:
            resp = self._session().get(
                feed.endpoint,
                params={"t0": t0, "t1": t1},
                timeout=self.settings.http_timeout_s,
            )
            if resp.status_code != 200:
                raise IOError(f"HTTP {resp.status_code}")
            result = self._extract(feed, resp, (t0, t1))
        except (requests.RequestException, IOError, ExtractionError, PlotError, ValueError) as exc:
            out.failed = True
            out.error = f"{type(exc).__name__}: {exc}"
            self.store.log_event(wall, "warn", feed.feed_id, "poll_failed", out.error)
            return out

        out.fetched = len(result.samples)
        for w in result.warnings:
            self.store.log_event(wall, "warn", feed.feed_id, "extract_warning", w)
        if result.quarantined:
            out.quarantined = True
            self.store.log_event(
                wall, "warn", feed.feed_id, "quarantined",
                f"{len(result.samples)} samples held back (cross-check failed)",
            )
            return out

        capacity = feed_capacity_bps(feed, self.registry)
        accepted_ts, accepted_vs = [], []
        for sample in result.samples:
            reason = validate_sample(sample, capacity, self.settings.headroom_factor)
            if reason is None:
                accepted_ts.append(sample.timestamp)
                accepted_vs.append(sample.inbound_bps)
            else:
                out.rejected += 1
                self.store.log_event(
                    wall, "warn", feed.feed_id, "rejected", f"ts={sample.timestamp} reason={reason}"
                )
        if accepted_ts:
            out.stored = self.store.append(feed.feed_id, feed.interval_s, accepted_ts, accepted_vs)
        return out

    def _extract(self, feed: FeedDescriptor, resp, window: tuple[int, int]):
        if feed.kind == "api":
            return extract_api(resp.content, feed)
        if feed.kind == "html":
            return extract_html(resp.content, feed)
        # The response advertises the window it actually rendered; trust it
        # over our ask (a stale page keeps showing its old window).
        t0 = int(resp.headers.get("X-Window-T0", window[0]))
        t1 = int(resp.headers.get("X-Window-T1", window[1]))
        return digitize_plot(
            resp.content,
            feed,
            (t0, t1 + feed.interval_s),
            self.plot_config,
            self.settings.cross_check_tolerance,
        )

    def _note_result(self, rt: _FeedRuntime, outcome: PollOutcome) -> None:
        rt.polls += 1
        rt.stored += outcome.stored
        rt.rejected += outcome.rejected
        rt.quarantined += int(outcome.quarantined)
        now = self.clock.now()
        if outcome.failed:
            rt.consecutive_failures += 1
            if rt.first_failure_sim is None:
                rt.first_failure_sim = now
            span = now - rt.first_failure_sim
            if (
                rt.consecutive_failures >= self.settings.attrition_failures
                and span >= self.settings.attrition_span_s
                and rt.feed.status == "active"
            ):
                rt.feed = replace(rt.feed, status="attrited")
                self.store.log_event(
                    self.clock.wall(), "error", rt.feed.feed_id, "attrited",
                    f"{rt.consecutive_failures} consecutive failures over {span:.0f}s",
                )
        else:
            rt.consecutive_failures = 0
            rt.first_failure_sim = None

    def _host_ready(self, endpoint: str, wall: float) -> bool:
        host = urlparse(endpoint).netloc
        with self._host_lock:
            last = self._host_last.get(host)
            if last is not None and wall - last < self.settings.politeness_s:
                return False
            self._host_last[host] = wall
            return True

    # -- main loop -----------------------------------------------------------

    def run(self, until_sim: float | None = None, stop_event: threading.Event | None = None) -> dict:
        """Drive polling until the simulated deadline or stop; returns a summary."""
        stop = stop_event or threading.Event()
        self.store.log_event(self.clock.wall(), "info", "-", "node_start",
                             f"node={self.node_id} role={self.role}")
        last_tick_wall = self.clock.wall()
        last_marker_wall = -1e18
        with ThreadPoolExecutor(max_workers=self.settings.max_workers) as pool:
            while not stop.is_set():
                now = self.clock.now()
                wall = self.clock.wall()
                if until_sim is not None and now >= until_sim:
                    break
                if self.monitor and wall - last_tick_wall >= self.settings.failover_tick_s:
                    self.monitor.tick()
                    last_tick_wall = wall
                # heartbeat through the store while actively scraping; its
                # staleness is exactly what the backup's monitor watches
                if self.active and wall - last_marker_wall >= self.settings.marker_interval_s:
                    self.store.touch_marker(self.node_id, wall)
                    last_marker_wall = wall
                if self.active:
                    for rt in self._runtime.values():
                        if rt.in_flight or rt.feed.status != "active" or rt.next_poll_at > now:
                            continue
                        if not self._host_ready(rt.feed.endpoint, wall):
                            continue
                        rt.in_flight = True
                        rt.next_poll_at = now + rt.feed.poll_period_s
                        with self._log_lock:
                            self.request_log.append((rt.feed.feed_id, now, wall))
                        pool.submit(self._poll_job, rt)
                self.clock.sleep_wall(self.settings.scheduler_idle_s)
        # drain: one final poll per feed so stored data reaches the horizon
        if self.active and not stop.is_set():
            for rt in self._runtime.values():
                if rt.feed.status == "active" and not rt.in_flight:
                    self._note_result(rt, self.poll_once(rt.feed))
        self.store.log_event(self.clock.wall(), "info", "-", "node_stop", f"node={self.node_id}")
        return self.summary()

    def _poll_job(self, rt: _FeedRuntime) -> None:
        try:
            outcome = self.poll_once(rt.feed)
            self._note_result(rt, outcome)
        except Exception as exc:  # scheduler must survive anything
            self.store_log_safe("error", rt.feed.feed_id, "poll_crash", f"{type(exc).__name__}: {exc}")
        finally:
            rt.in_flight = False

    def store_log_safe(self, level, feed, event, detail):
        try:
            self.store.log_event(self.clock.wall(), level, feed, event, detail)
        except OSError:
            pass

    def summary(self) -> dict:
        rts = self._runtime.values()
        return {
            "node_id": self.node_id,
            "role": self.role,
            "feeds": len(self._runtime),
            "polls": sum(rt.polls for rt in rts),
            "stored": sum(rt.stored for rt in rts),
            "rejected": sum(rt.rejected for rt in rts),
            "quarantined": sum(rt.quarantined for rt in rts),
            "attrited": sorted(rt.feed.feed_id for rt in rts if rt.feed.status == "attrited"),
        }

    def feed_status(self, feed_id: str) -> str:
        return self._runtime[feed_id].feed.status
