#!/usr/bin/env python3
"""Render traffic plots across rate scales, digitize them back, and print the
per-image recovery error. Optionally keeps the PNGs for eyeballing."""

import argparse
import sys
from pathlib import Path

import numpy as np

from ixmon.core import FeedDescriptor
from ixmon.digitize import digitize_plot
from ixmon.simulate.model import TrafficModel, generate_series
from ixmon.simulate.render import render_plot

DAY = 86400


def run(args):
    feed = FeedDescriptor(
        feed_id="showcase", kind="plot_image", endpoint="http://localhost/feeds/showcase",
        interval_s=300, timezone="UTC", member_ixp_ids=frozenset({"ix"}),
        poll_period_s=300,
    )
    out = Path(args.out) if args.out else None
    if out:
        out.mkdir(parents=True, exist_ok=True)

    print(f"{'base rate':>12} {'amplitude':>9} {'noise':>6} {'MARD':>8} {'cross-dev':>9}")
    rng = np.random.default_rng(args.seed)
    for base in (1e8, 1e9, 47.3e9, 2.5e11, 1e12):
        amplitude = float(rng.uniform(1.5, 4.7))
        noise = float(rng.uniform(0.0, 0.08))
        model = TrafficModel(
            base_bps=base, diurnal_amplitude=amplitude, noise_cv=noise,
            peak_local_time=1260, seed=int(rng.integers(0, 2**31)),
        )
        series = generate_series(model, 0, DAY, 300, feed.feed_id)
        png = render_plot(series)
        result = digitize_plot(png, feed, (0, DAY))
        got = np.array([s.inbound_bps for s in result.samples])
        mard = np.mean(np.abs(got - series.values) / series.values)
        dev = result.cross_check.relative_deviation if result.cross_check else float("nan")
        print(f"{base:12.3g} {amplitude:9.2f} {noise:6.3f} {mard:8.4%} {dev:9.4%}")
        if out:
            (out / f"plot-{base:.0e}.png").write_bytes(png)
    if out:
        print(f"images kept in {out}")
    return 0


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--out", type=str, default=None, help="directory to keep PNGs")
    p.add_argument("--seed", type=int, default=7)
    sys.exit(run(p.parse_args()))
