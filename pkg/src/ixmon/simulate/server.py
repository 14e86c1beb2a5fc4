"""HTTP service exposing a fleet of synthetic feeds in their native formats.

Each feed answers GET /feeds/<feed_id> in its declared format with data fresh
up to the simulated clock. Requests may pass inclusive grid bounds ``t0``/
``t1``; plot responses carry the actually rendered window in the
``X-Window-T0`` / ``X-Window-T1`` headers so the digitizing client never has
to trust x-axis pixels. POST /ctl/<feed_id> injects faults (none, stale,
error, delay_ms:<n>) to exercise collector resilience. GET /registry/<date>
serves registry snapshot text; GET /healthz reports liveness.
"""

from __future__ import annotations

import json
import threading
import time
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from urllib.parse import parse_qs, urlparse

from ixmon.core import FeedDescriptor
from ixmon.simulate.model import TrafficModel, generate_series
from ixmon.simulate.render import (
    PlotConfig,
    PlotWindowTooLong,
    render_api,
    render_html,
    render_plot,
)
from ixmon.timebase import RealClock

_FAULTS = ("none", "stale", "error")


class _Server(ThreadingHTTPServer):
    daemon_threads = True
    request_queue_size = 128  # burst of concurrent pollers must not hit SYN drops


class FeedServer:
    """Owns the HTTP server thread and per-feed fault state."""

    def __init__(
        self,
        fleet,
        bind: tuple[str, int] = ("127.0.0.1", 0),
        clock=None,
        registry_texts: dict[str, str] | None = None,
        plot_config: PlotConfig = PlotConfig(),
    ):
        self.fleet: dict[str, tuple[FeedDescriptor, TrafficModel]] = {}
        endpoints = set()
        for feed, model in fleet:
            if feed.feed_id in self.fleet:
                raise ValueError(f"duplicate feed_id {feed.feed_id!r}")
            if feed.endpoint in endpoints:
                raise ValueError(f"duplicate endpoint {feed.endpoint!r}")
            endpoints.add(feed.endpoint)
            self.fleet[feed.feed_id] = (feed, model)
        self.clock = clock or RealClock()
        self.registry_texts = dict(registry_texts or {})
        self.plot_config = plot_config
        self._faults: dict[str, tuple[str, int]] = {}  # feed_id -> (fault, stale_asof)
        self._fault_lock = threading.Lock()
        self.request_count = 0

        server = _Server(bind, _Handler)
        server.owner = self
        self._server = server
        self._thread: threading.Thread | None = None

    @property
    def address(self) -> tuple[str, int]:
        return self._server.server_address[:2]

    def url(self, feed_id: str) -> str:
        host, port = self.address
        return f"http://{host}:{port}/feeds/{feed_id}"

    def start(self) -> "FeedServer":
        self._thread = threading.Thread(target=self._server.serve_forever, daemon=True)
        self._thread.start()
        return self

    def stop(self) -> None:
        self._server.shutdown()
        self._server.server_close()
        if self._thread:
            self._thread.join(timeout=5)

    def set_fault(self, feed_id: str, fault: str) -> None:
        feed, _ = self.fleet[feed_id]
        asof = int(self.clock.now()) // feed.interval_s * feed.interval_s
        with self._fault_lock:
            self._faults[feed_id] = (fault, asof)

    def get_fault(self, feed_id: str) -> tuple[str, int]:
        with self._fault_lock:
            return self._faults.get(feed_id, ("none", 0))


def serve(fleet, bind=("127.0.0.1", 0), clock=None, registry_texts=None, plot_config=PlotConfig()) -> FeedServer:
    """Start serving a fleet; returns the running server."""
    return FeedServer(fleet, bind, clock, registry_texts, plot_config).start()


class _Handler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"
    disable_nagle_algorithm = True  # multi-segment PNG bodies stall on delayed ACKs otherwise

    def log_message(self, fmt, *args):  # quiet by default
        pass

    @property
    def owner(self) -> FeedServer:
        return self.server.owner

    def _send(self, status: int, body: bytes, content_type: str, headers: dict | None = None):
        self.send_response(status)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(body)))
        for k, v in (headers or {}).items():
            self.send_header(k, str(v))
        self.end_headers()
        self.wfile.write(body)

    def _error(self, status: int, message: str):
        self._send(status, json.dumps({"error": message}).encode(), "application/json")

    def do_GET(self):
        self.owner.request_count += 1
        parsed = urlparse(self.path)
        parts = [p for p in parsed.path.split("/") if p]
        if parts == ["healthz"]:
            self._send(200, b"ok", "text/plain")
            return
        if len(parts) == 2 and parts[0] == "feeds":
            self._serve_feed(parts[1], parse_qs(parsed.query))
            return
        if len(parts) == 2 and parts[0] == "registry":
            text = self.owner.registry_texts.get(parts[1])
            if text is None:
                self._error(404, f"no registry snapshot {parts[1]}")
                return
            self._send(200, text.encode(), "text/plain")
            return
        self._error(404, "unknown path")

    def do_POST(self):
        parsed = urlparse(self.path)
        parts = [p for p in parsed.path.split("/") if p]
        if len(parts) == 2 and parts[0] == "ctl":
            feed_id = parts[1]
            if feed_id not in self.owner.fleet:
                self._error(404, f"unknown feed {feed_id!r}")
                return
            length = int(self.headers.get("Content-Length", 0))
            try:
                doc = json.loads(self.rfile.read(length) or b"{}")
                fault = doc["fault"]
            except (json.JSONDecodeError, KeyError):
                self._error(400, "body must be {\"fault\": ...}")
                return
            if fault not in _FAULTS and not fault.startswith("delay_ms:"):
                self._error(400, f"unknown fault {fault!r}")
                return
            self.owner.set_fault(feed_id, fault)
            self._send(200, json.dumps({"feed_id": feed_id, "fault": fault}).encode(), "application/json")
            return
        self._error(404, "unknown path")

    def _serve_feed(self, feed_id: str, query: dict):
        entry = self.owner.fleet.get(feed_id)
        if entry is None:
            self._error(404, f"unknown feed {feed_id!r}")
            return
        feed, model = entry
        fault, stale_asof = self.owner.get_fault(feed_id)
        if fault == "error":
            self._error(500, "injected fault")
            return
        if fault.startswith("delay_ms:"):
            time.sleep(int(fault.split(":", 1)[1]) / 1000.0)

        step = feed.interval_s
        now_grid = int(self.owner.clock.now()) // step * step
        horizon = stale_asof if fault == "stale" else now_grid
        config = self.owner.plot_config
        default_span = min(86400, config.columns * step) if feed.kind == "plot_image" else 86400

        try:
            t1 = int(query["t1"][0]) if "t1" in query else horizon
            t0 = int(query["t0"][0]) if "t0" in query else t1 - default_span + step
        except ValueError:
            self._error(400, "t0/t1 must be integers")
            return
        t1 = min(t1, horizon)

        if feed.kind == "plot_image" and fault == "stale":
            # a frozen page keeps showing its old window regardless of the ask
            t1 = stale_asof
            t0 = t1 - default_span + step

        series = generate_series(model, t0, t1 + step, step, feed.feed_id) if t0 <= t1 else None
        if feed.kind == "api":
            body = render_api(series) if series else render_api(_empty(feed))
            self._send(200, body, "application/json")
        elif feed.kind == "html":
            body = render_html(series) if series else render_html(_empty(feed))
            self._send(200, body, "text/html")
        else:
            if series is None or len(series) == 0:
                self._error(400, "empty plot window")
                return
            try:
                body = render_plot(series, config)
            except PlotWindowTooLong as exc:
                self._error(400, str(exc))
                return
            self._send(
                200,
                body,
                "image/png",
                headers={"X-Window-T0": t0, "X-Window-T1": t1},
            )


def _empty(feed: FeedDescriptor):
    from ixmon.core import TimeSeries

    return TimeSeries(feed.feed_id, feed.interval_s, [], [])
