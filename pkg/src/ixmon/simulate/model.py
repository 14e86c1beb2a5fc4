"""Synthetic IXP traffic generator.

The generated rate at a grid timestamp is a pure function of (model, ts):

    base * growth(ts) * diurnal(local time) * weekend(local weekday)
         * events(ts) * noise(seed, ts)

Noise is counter-based (hashed from the timestamp), so any two windows agree
on their overlap and the HTTP server can regenerate arbitrary slices without
shared state. The diurnal term is a raised cosine around ``peak_local_time``
with mean 1, scaled so the peak-to-trough ratio equals ``diurnal_amplitude``;
its trough therefore sits at 2/(amplitude+1) of the mean, twelve hours after
the peak.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ixmon.core import TimeSeries
from ixmon.timebase import YEAR_S, local_fields

EVENT_KINDS = ("surge", "outage", "level_shift")


@dataclass(frozen=True)
class EventSpec:
    """Traffic disturbance: a multiplier applied inside [start, end).

    ``level_shift`` persists from ``start`` onward (``end`` only bounds the
    required start < end ordering); ``outage`` forces the rate to zero.
    """

    start: int
    end: int
    multiplier: float
    kind: str

    def __post_init__(self):
        if self.kind not in EVENT_KINDS:
            raise ValueError(f"unknown event kind {self.kind!r}")
        if self.start >= self.end:
            raise ValueError("event start must precede end")
        if self.kind == "outage":
            if self.multiplier != 0:
                raise ValueError("outage events must have multiplier 0")
        elif self.multiplier <= 0:
            raise ValueError(f"{self.kind} multiplier must be > 0")


@dataclass(frozen=True)
class TrafficModel:
    base_bps: float
    timezone: str = "UTC"
    diurnal_amplitude: float = 1.0
    peak_local_time: int = 1260  # minutes past local midnight
    weekend_peak_delta: float = 0.0
    weekend_days: frozenset[int] = frozenset({5, 6})  # Monday = 0
    noise_cv: float = 0.0
    growth_rate: float = 0.0  # linear fraction per year from anchor_ts
    anchor_ts: int = 0
    growth_segments: tuple[tuple[int, float], ...] = ()  # (start_ts, rate/yr), overrides growth_rate
    events: tuple[EventSpec, ...] = ()
    seed: int = 0

    def __post_init__(self):
        if self.base_bps < 0:
            raise ValueError("base_bps must be non-negative")
        if self.diurnal_amplitude < 1:
            raise ValueError("diurnal_amplitude must be >= 1")
        if self.noise_cv < 0:
            raise ValueError("noise_cv must be non-negative")
        if not 0 <= self.peak_local_time < 1440:
            raise ValueError("peak_local_time must be a minute of day")
        if self.growth_segments != tuple(sorted(self.growth_segments)):
            raise ValueError("growth_segments must be sorted by start")


def _splitmix64(x: np.ndarray) -> np.ndarray:
    z = x + np.uint64(0x9E3779B97F4A7C15)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


def _uniform01(h: np.ndarray) -> np.ndarray:
    # 53 significant bits, offset to the open interval (0, 1)
    return ((h >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53


def noise_factors(seed: int, timestamps: np.ndarray, cv: float) -> np.ndarray:
    """Multiplicative log-normal noise with mean 1 and the given coefficient
    of variation, keyed on (seed, timestamp)."""
    if cv == 0:
        return np.ones(len(timestamps))
    ts = np.asarray(timestamps, dtype=np.uint64)
    key = np.uint64((seed * 0xD1342543DE82EF95) & 0xFFFFFFFFFFFFFFFF)
    h1 = _splitmix64(ts ^ key)
    h2 = _splitmix64(h1)
    u1, u2 = _uniform01(h1), _uniform01(h2)
    z = np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2)
    sigma2 = np.log1p(cv * cv)
    return np.exp(-0.5 * sigma2 + np.sqrt(sigma2) * z)


def growth_factor(model: TrafficModel, timestamps: np.ndarray) -> np.ndarray:
    ts = np.asarray(timestamps, dtype=np.float64)
    if not model.growth_segments:
        return np.maximum(1.0 + model.growth_rate * (ts - model.anchor_ts) / YEAR_S, 0.0)
    # Piecewise-linear and continuous: factor is 1 at the first segment start
    # and each segment grows linearly at its own annual rate from the level
    # the previous segment reached.
    out = np.ones_like(ts)
    level = 1.0
    for i, (seg_start, rate) in enumerate(model.growth_segments):
        is_last = i + 1 == len(model.growth_segments)
        dt_years = (ts - seg_start) / YEAR_S
        if not is_last:
            seg_years = (model.growth_segments[i + 1][0] - seg_start) / YEAR_S
            dt_years = np.minimum(dt_years, seg_years)
        out = np.where(ts >= seg_start, level * (1.0 + rate * dt_years), out)
        if not is_last:
            level *= 1.0 + rate * seg_years
    return np.maximum(out, 0.0)


def _diurnal(model: TrafficModel, timestamps: np.ndarray) -> np.ndarray:
    _, weekday, sec = local_fields(timestamps, model.timezone)
    minute = sec / 60.0
    cosine = 0.5 * (1.0 + np.cos(2.0 * np.pi * (minute - model.peak_local_time) / 1440.0))
    a = model.diurnal_amplitude
    lo, hi = 2.0 / (a + 1.0), 2.0 * a / (a + 1.0)
    shape = lo + (hi - lo) * cosine
    weekend = np.isin(weekday, list(model.weekend_days))
    return shape * np.where(weekend, 1.0 + model.weekend_peak_delta, 1.0)


def _event_factor(model: TrafficModel, timestamps: np.ndarray) -> np.ndarray:
    ts = np.asarray(timestamps, dtype=np.int64)
    out = np.ones(len(ts))
    for ev in model.events:
        if ev.kind == "level_shift":
            out = np.where(ts >= ev.start, out * ev.multiplier, out)
        else:
            inside = (ts >= ev.start) & (ts < ev.end)
            out = np.where(inside, out * ev.multiplier, out)
    return out


def values_at(model: TrafficModel, timestamps: np.ndarray) -> np.ndarray:
    """Ground-truth inbound rate at each grid timestamp."""
    ts = np.asarray(timestamps, dtype=np.int64)
    if ts.size == 0:
        return np.zeros(0)
    v = model.base_bps * growth_factor(model, ts) * _diurnal(model, ts)
    v = v * _event_factor(model, ts) * noise_factors(model.seed, ts, model.noise_cv)
    return v


def grid_range(start: int, end: int, interval_s: int) -> np.ndarray:
    """Grid timestamps in the half-open window [start, end)."""
    first = -(-int(start) // interval_s) * interval_s
    return np.arange(first, int(end), interval_s, dtype=np.int64)


def generate_series(
    model: TrafficModel, start: int, end: int, interval_s: int, feed_id: str = "sim"
) -> TimeSeries:
    """Deterministic ground-truth series over [start, end)."""
    if start >= end:
        raise ValueError("start must precede end")
    ts = grid_range(start, end, interval_s)
    return TimeSeries(feed_id, interval_s, ts, values_at(model, ts))
