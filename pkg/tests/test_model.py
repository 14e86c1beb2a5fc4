import numpy as np
import pytest

from ixmon.simulate.model import (
    EventSpec,
    TrafficModel,
    generate_series,
    grid_range,
    noise_factors,
    values_at,
)
from ixmon.timebase import DAY_S, YEAR_S

EPOCH = 1672531200


def test_degenerate_model_is_constant():
    m = TrafficModel(base_bps=10e9)
    s = generate_series(m, 0, DAY_S, 300)
    assert len(s) == 288
    assert np.all(s.values == 10e9)


def test_generation_deterministic_per_seed():
    m = TrafficModel(base_bps=5e9, diurnal_amplitude=3.0, noise_cv=0.2, seed=42)
    a = generate_series(m, 0, DAY_S, 300)
    b = generate_series(m, 0, DAY_S, 300)
    assert np.array_equal(a.values, b.values)
    other = TrafficModel(base_bps=5e9, diurnal_amplitude=3.0, noise_cv=0.2, seed=43)
    assert not np.array_equal(generate_series(other, 0, DAY_S, 300).values, a.values)


def test_windows_agree_on_overlap():
    # counter-based noise: values are a function of the timestamp, not the window
    m = TrafficModel(base_bps=5e9, diurnal_amplitude=2.5, noise_cv=0.15, seed=7)
    full = values_at(m, grid_range(0, 10 * DAY_S, 300))
    part = values_at(m, grid_range(3 * DAY_S, 7 * DAY_S, 300))
    assert np.array_equal(full[3 * 288 : 7 * 288], part)


def test_growth_recovered_by_least_squares():
    # independent oracle: OLS fit on daily means of the generated output
    m = TrafficModel(base_bps=100.0, growth_rate=0.10, anchor_ts=0)
    s = generate_series(m, 0, YEAR_S, 300)
    daily = s.values.reshape(365, 288).mean(axis=1)
    x = np.arange(365, dtype=float)
    slope, intercept = np.polyfit(x, daily, 1)
    recovered = (slope * x[-1] + intercept) / intercept - 1.0
    planted = 0.10 * 364 / 365  # growth across the fitted span
    assert recovered == pytest.approx(planted, abs=0.001)


def test_piecewise_growth_segments_continuous():
    m = TrafficModel(
        base_bps=100.0,
        growth_segments=((0, 0.234), (YEAR_S, 0.169)),
    )
    ts = np.array([0, YEAR_S - 300, YEAR_S, YEAR_S + 300, 2 * YEAR_S])
    v = values_at(m, ts)
    assert v[0] == pytest.approx(100.0)
    assert v[2] == pytest.approx(100.0 * 1.234)
    assert v[1] == pytest.approx(v[2], rel=1e-4)  # continuity at the knee
    assert v[4] == pytest.approx(100.0 * 1.234 * 1.169)


def test_peak_lands_at_configured_local_time():
    m = TrafficModel(base_bps=1e9, diurnal_amplitude=4.7, peak_local_time=1225,
                     timezone="Australia/Brisbane")
    s = generate_series(m, EPOCH, EPOCH + DAY_S, 300)
    peak_ts = int(s.timestamps[np.argmax(s.values)])
    # Brisbane is UTC+10
    local_minute = ((peak_ts + 10 * 3600) % DAY_S) // 60
    assert abs(local_minute - 1225) <= 5


def test_amplitude_hits_target_ratio():
    m = TrafficModel(base_bps=1e9, diurnal_amplitude=4.7)
    s = generate_series(m, 0, DAY_S, 300)
    assert s.values.max() / s.values.min() == pytest.approx(4.7, rel=1e-3)
    assert s.values.mean() == pytest.approx(1e9, rel=1e-3)


def test_outage_event_zeroes_window():
    ev = EventSpec(start=3000, end=6000, multiplier=0.0, kind="outage")
    m = TrafficModel(base_bps=1e9, events=(ev,))
    s = generate_series(m, 0, DAY_S, 300)
    inside = (s.timestamps >= 3000) & (s.timestamps < 6000)
    assert np.all(s.values[inside] == 0)
    assert np.all(s.values[~inside] > 0)


def test_surge_and_level_shift_semantics():
    surge = EventSpec(start=6000, end=9000, multiplier=2.0, kind="surge")
    shift = EventSpec(start=30000, end=30300, multiplier=0.5, kind="level_shift")
    m = TrafficModel(base_bps=1e9, events=(surge, shift))
    s = generate_series(m, 0, DAY_S, 300)
    v = dict(zip(s.timestamps.tolist(), s.values.tolist()))
    assert v[6000] == 2e9
    assert v[9000] == 1e9  # surge window is half-open
    assert v[30000] == 0.5e9
    assert v[86100] == 0.5e9  # level shift persists to the end


def test_weekend_scaling():
    m = TrafficModel(base_bps=1e9, weekend_peak_delta=-0.1, weekend_days=frozenset({5, 6}))
    # 1970-01-03 was a Saturday: day indices 2 and 3 are the weekend
    s = generate_series(m, 0, 7 * DAY_S, 300)
    days = s.values.reshape(7, 288).mean(axis=1)
    assert days[2] == pytest.approx(0.9e9)
    assert days[3] == pytest.approx(0.9e9)
    assert days[0] == pytest.approx(1e9)


def test_noise_is_mean_one_and_cv_matches():
    f = noise_factors(9, np.arange(0, 100_000 * 300, 300), 0.3)
    assert f.mean() == pytest.approx(1.0, abs=0.01)
    assert f.std() == pytest.approx(0.3, abs=0.01)
    assert np.all(f > 0)


def test_event_spec_validation():
    with pytest.raises(ValueError):
        EventSpec(start=10, end=5, multiplier=1.0, kind="surge")
    with pytest.raises(ValueError):
        EventSpec(start=0, end=10, multiplier=1.0, kind="outage")
    with pytest.raises(ValueError):
        EventSpec(start=0, end=10, multiplier=0.0, kind="surge")
    with pytest.raises(ValueError):
        EventSpec(start=0, end=10, multiplier=1.0, kind="blackout")


def test_model_validation():
    with pytest.raises(ValueError):
        TrafficModel(base_bps=-1)
    with pytest.raises(ValueError):
        TrafficModel(base_bps=1, diurnal_amplitude=0.5)
    with pytest.raises(ValueError):
        TrafficModel(base_bps=1, noise_cv=-0.1)
    with pytest.raises(ValueError):
        TrafficModel(base_bps=1, peak_local_time=1500)
