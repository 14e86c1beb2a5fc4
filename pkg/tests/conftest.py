import numpy as np
import pytest

from ixmon.core import FeedDescriptor
from ixmon.simulate.model import TrafficModel, generate_series

DAY = 86400
EPOCH = 1672531200  # 2023-01-01 UTC


def make_feed(feed_id="f1", kind="api", interval_s=300, timezone="UTC",
              ixps=("ix1",), poll_period_s=None, endpoint=None, **kw):
    return FeedDescriptor(
        feed_id=feed_id,
        kind=kind,
        endpoint=endpoint or f"http://127.0.0.1:9/feeds/{feed_id}",
        interval_s=interval_s,
        timezone=timezone,
        member_ixp_ids=frozenset(ixps),
        poll_period_s=poll_period_s or interval_s,
        **kw,
    )


@pytest.fixture
def feed():
    return make_feed()


@pytest.fixture
def plot_feed():
    return make_feed(feed_id="p1", kind="plot_image")


def diurnal_day(base=50e9, amplitude=3.5, noise=0.05, seed=1, feed_id="f1", days=1):
    model = TrafficModel(
        base_bps=base, diurnal_amplitude=amplitude, noise_cv=noise, seed=seed
    )
    return generate_series(model, 0, days * DAY, 300, feed_id)


def assert_series_equal(a, b):
    assert a.interval_s == b.interval_s
    assert np.array_equal(a.timestamps, b.timestamps)
    assert np.array_equal(a.values, b.values)
