"""Clocks and local-time arithmetic.

The simulated clock is a pure function of wall time, so separate processes
(simulator, main node, backup node) agree on "now" without any coordination:
they only need the same epoch parameters from the shared config.
"""

from __future__ import annotations

import datetime as dt
import time
from functools import lru_cache
from zoneinfo import ZoneInfo

import numpy as np

DAY_S = 86400
WEEK_S = 7 * DAY_S
YEAR_S = 365 * DAY_S


class RealClock:
    """Wall clock; simulated and wall time coincide."""

    accel = 1.0

    def now(self) -> float:
        return time.time()

    def wall(self) -> float:
        return time.time()

    def sleep_wall(self, seconds: float) -> None:
        if seconds > 0:
            time.sleep(seconds)


class AcceleratedClock:
    """Simulated clock advancing ``accel`` times faster than wall time.

    now() = sim_epoch + (wall - wall_epoch) * accel. Deterministic given the
    three parameters, so independent processes stay in lockstep.
    """

    def __init__(self, sim_epoch: float, wall_epoch: float, accel: float):
        if accel <= 0:
            raise ValueError("accel must be positive")
        self.sim_epoch = float(sim_epoch)
        self.wall_epoch = float(wall_epoch)
        self.accel = float(accel)

    def now(self) -> float:
        return self.sim_epoch + (time.time() - self.wall_epoch) * self.accel

    def wall(self) -> float:
        return time.time()

    def sleep_wall(self, seconds: float) -> None:
        if seconds > 0:
            time.sleep(seconds)


@lru_cache(maxsize=None)
def _zone(tz_name: str) -> ZoneInfo:
    return ZoneInfo(tz_name)


@lru_cache(maxsize=100_000)
def _day_offset_s(tz_name: str, utc_day: int) -> int:
    """UTC offset (seconds) of a zone, sampled at midday of a UTC day.

    Offsets are applied per UTC day; a DST transition inside a day is only
    picked up from the next day on. Good enough for day/slot bucketing and,
    critically, identical on the generator and analytics sides.
    """
    instant = dt.datetime.fromtimestamp(utc_day * DAY_S + DAY_S // 2, tz=_zone(tz_name))
    return int(instant.utcoffset().total_seconds())


def tz_offsets(timestamps: np.ndarray, tz_name: str) -> np.ndarray:
    """Per-sample UTC offset in seconds (day-granular, see _day_offset_s)."""
    ts = np.asarray(timestamps, dtype=np.int64)
    days = ts // DAY_S
    uniq, inverse = np.unique(days, return_inverse=True)
    offs = np.array([_day_offset_s(tz_name, int(d)) for d in uniq], dtype=np.int64)
    return offs[inverse]


def local_fields(timestamps: np.ndarray, tz_name: str):
    """Split timestamps into (local_day_index, weekday, second_of_day).

    Weekday follows the Monday=0 convention; day index counts days since
    1970-01-01 in local time.
    """
    ts = np.asarray(timestamps, dtype=np.int64)
    loc = ts + tz_offsets(ts, tz_name)
    day_idx = loc // DAY_S
    weekday = (day_idx + 3) % 7  # 1970-01-01 was a Thursday
    sec_of_day = loc % DAY_S
    return day_idx, weekday, sec_of_day


def day_index_to_date(day_idx: int) -> dt.date:
    return dt.date(1970, 1, 1) + dt.timedelta(days=int(day_idx))


def date_to_day_index(d: dt.date) -> int:
    return (d - dt.date(1970, 1, 1)).days
