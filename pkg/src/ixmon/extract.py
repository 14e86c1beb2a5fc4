"""Turn fetched API/HTML payloads into validated traffic samples."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from html.parser import HTMLParser

from ixmon.core import FeedDescriptor, IxmonError, TrafficSample, snap_to_grid


class ExtractionError(IxmonError):
    """Payload could not be turned into samples."""


class MalformedPayload(ExtractionError):
    pass


class SchemaMismatch(ExtractionError):
    pass


class DataBlockAbsent(ExtractionError):
    pass


class DataBlockAmbiguous(ExtractionError):
    pass


@dataclass(frozen=True)
class CrossCheck:
    """Footer text value vs. digitized curve value at the same instant."""

    text_value_bps: float
    curve_value_bps: float

    @property
    def relative_deviation(self) -> float:
        denom = max(self.text_value_bps, self.curve_value_bps)
        if denom == 0:
            return 0.0
        return abs(self.text_value_bps - self.curve_value_bps) / denom


@dataclass
class ExtractionResult:
    samples: list[TrafficSample]
    method: str
    cross_check: CrossCheck | None = None
    warnings: list[str] = field(default_factory=list)
    quarantined: bool = False  # cross-check exceeded tolerance; hold samples back


def extract_api(body: bytes, feed: FeedDescriptor) -> ExtractionResult:
    """Parse the JSON feed format; inbound rates only, grid-snapped.

    An empty sample array is a valid payload (zero samples).
    """
    try:
        doc = json.loads(body.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise MalformedPayload(f"not a JSON document: {exc}") from exc
    if not isinstance(doc, dict) or "samples" not in doc:
        raise SchemaMismatch("missing 'samples' key")
    if not isinstance(doc.get("interval_s"), int):
        raise SchemaMismatch("missing or non-integer 'interval_s'")
    raw = doc["samples"]
    if not isinstance(raw, list):
        raise SchemaMismatch("'samples' must be an array")

    samples = []
    for i, rec in enumerate(raw):
        if not isinstance(rec, dict) or "ts" not in rec or "in_bps" not in rec:
            raise SchemaMismatch(f"sample {i}: expected object with 'ts' and 'in_bps'")
        ts, in_bps = rec["ts"], rec["in_bps"]
        if not isinstance(ts, int) or isinstance(ts, bool):
            raise SchemaMismatch(f"sample {i}: 'ts' must be an integer")
        if not isinstance(in_bps, (int, float)) or isinstance(in_bps, bool):
            raise SchemaMismatch(f"sample {i}: 'in_bps' must be a number")
        samples.append(
            TrafficSample(feed.feed_id, snap_to_grid(ts, feed.interval_s), float(in_bps))
        )

    warnings = []
    if doc["interval_s"] != feed.interval_s:
        warnings.append(
            f"payload interval {doc['interval_s']}s differs from declared {feed.interval_s}s"
        )
    return ExtractionResult(samples=samples, method="api", warnings=warnings)


class _DataBlockFinder(HTMLParser):
    """Collects the text of <script id="traffic-data" type="application/json"> elements."""

    def __init__(self):
        super().__init__()
        self.blocks: list[str] = []
        self._in_block = False
        self._buf: list[str] = []

    def handle_starttag(self, tag, attrs):
        if tag != "script":
            return
        d = dict(attrs)
        if d.get("id") == "traffic-data" and d.get("type") == "application/json":
            self._in_block = True
            self._buf = []

    def handle_endtag(self, tag):
        if tag == "script" and self._in_block:
            self._in_block = False
            self.blocks.append("".join(self._buf))

    def handle_data(self, data):
        if self._in_block:
            self._buf.append(data)


def extract_html(body: bytes, feed: FeedDescriptor) -> ExtractionResult:
    """Locate the embedded traffic-data block, then parse it as the API format."""
    try:
        text = body.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise MalformedPayload(f"not UTF-8 HTML: {exc}") from exc
    finder = _DataBlockFinder()
    finder.feed(text)
    if not finder.blocks:
        raise DataBlockAbsent("no traffic-data element in page")
    if len(finder.blocks) > 1:
        raise DataBlockAmbiguous(f"{len(finder.blocks)} traffic-data elements in page")
    result = extract_api(finder.blocks[0].encode(), feed)
    result.method = "html"
    return result
