import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ixmon.analytics import convergence, pearson
from ixmon.analytics.convergence import ZeroVariance, moving_average
from ixmon.analytics.common import InsufficientData


class TestPearson:
    def test_self_correlation(self):
        x = np.array([1.0, 2, 3, 4, 5])
        assert pearson(x, x) == pytest.approx(1.0)

    def test_anti_correlation(self):
        x = np.array([1.0, 2, 3, 4, 5])
        assert pearson(x, -x) == pytest.approx(-1.0)

    def test_hand_computed_example(self):
        x = np.array([1.0, 2, 3, 4, 5])
        y = np.array([2.0, 1, 4, 3, 6])
        # brute-force formula
        dx, dy = x - x.mean(), y - y.mean()
        expected = (dx * dy).sum() / np.sqrt((dx**2).sum() * (dy**2).sum())
        assert pearson(x, y) == pytest.approx(float(expected), rel=1e-12)

    def test_zero_variance(self):
        with pytest.raises(ZeroVariance):
            pearson([1.0, 1.0, 1.0], [1.0, 2.0, 3.0])

    @given(
        st.lists(st.floats(-1e6, 1e6, allow_nan=False), min_size=3, max_size=40),
        st.floats(0.001, 1e3),
        st.floats(-1e6, 1e6, allow_nan=False),
    )
    @settings(max_examples=100)
    def test_affine_invariance(self, values, scale, shift):
        x = np.array(values)
        spread = x.max() - x.min()
        if spread < 1e-6 * (abs(shift) / scale + np.abs(x).max() + 1.0):
            return  # shift would absorb the variation in float precision
        y = np.sin(x) + x  # deterministic partner series
        try:
            base = pearson(x, y)
        except ZeroVariance:
            return
        transformed = pearson(scale * x + shift, y)
        assert transformed == pytest.approx(base, abs=1e-6)
        assert abs(base) <= 1.0 + 1e-12


def test_moving_average_centered():
    v = np.arange(10.0)
    ma = moving_average(v, 7)
    assert len(ma) == 4
    assert ma[0] == pytest.approx(3.0)  # mean of 0..6
    with pytest.raises(InsufficientData):
        moving_average(np.arange(5.0), 7)


def _trended(n_days=60, base=100.0, slope=0.5, seed=None, events=None):
    v = base + slope * np.arange(n_days)
    if events:
        for day, factor in events:
            v[day:] *= factor
    return v


class TestConvergence:
    def test_single_feed_point(self):
        curve = convergence({"only": _trended()})
        assert curve.points() == [(1.0, 1.0)]
        assert curve.share_r90 == 1.0 and curve.share_r95 == 1.0

    def test_identical_feeds_converge_at_first_prefix(self):
        arr = _trended()
        curve = convergence({"a": arr, "b": arr.copy(), "c": arr.copy(), "d": arr.copy()})
        assert curve.share_r95 == pytest.approx(0.25)
        assert all(r > 0.999 for r in curve.correlations)

    def test_final_point_exact(self):
        rng = np.random.default_rng(1)
        feeds = {f"f{i}": _trended(seed=i) * rng.uniform(0.5, 2.0) + rng.normal(0, 1, 60)
                 for i in range(5)}
        curve = convergence(feeds)
        assert curve.traffic_shares[-1] == 1.0
        assert curve.correlations[-1] == 1.0
        assert np.all(np.diff(curve.traffic_shares) > 0)

    def test_level_shift_delays_convergence(self):
        # a small feed with an abrupt halving mid-window (the single-IXP
        # disruption case) vs. the same fleet without the event
        small_clean = _trended(n_days=120, base=30.0, slope=0.12)
        small_shift = _trended(n_days=120, base=30.0, slope=0.12, events=[(60, 0.5)])
        large = _trended(n_days=120, base=300.0, slope=1.0)
        control = convergence({"small": small_clean, "large": large})
        shifted = convergence({"small": small_shift, "large": large})
        assert shifted.share_r90 > control.share_r90
        assert control.correlations[0] > shifted.correlations[0]

    def test_constant_prefix_reports_undefined(self):
        feeds = {"flat": np.full(30, 5.0), "grow": _trended(30, base=500.0)}
        curve = convergence(feeds)
        assert curve.correlations[0] is None
        assert curve.correlations[-1] == 1.0

    def test_volume_order_ties_break_by_feed_id(self):
        arr = _trended()
        curve = convergence({"b": arr.copy(), "a": arr.copy()})
        assert curve.feed_order == ("a", "b")

    def test_mismatched_grids_rejected(self):
        from ixmon.analytics.common import AnalyticsError

        with pytest.raises(AnalyticsError):
            convergence({"a": np.ones(30), "b": np.ones(31)})
