"""Report generation: every statistic family as one JSON document, plus CSV
tables shaped like the coverage and convergence summaries.

Output is deterministic for a given (store contents, config): keys sorted, no
timestamps, floats via repr.
"""

from __future__ import annotations

import csv
import datetime as dt
import json
from pathlib import Path

import numpy as np

from ixmon import analytics
from ixmon.analytics.common import AnalyticsError, InsufficientData, feed_region
from ixmon.core import REGIONS, WEEKEND_DAYS, FeedDescriptor, RegistrySnapshot
from ixmon.store import Store


def _jsonable(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, dt.date):
        return obj.isoformat()
    if isinstance(obj, (list, tuple)):
        return [_jsonable(x) for x in obj]
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, float) and obj != obj:  # NaN
        return None
    return obj


def _write_json(path: Path, doc) -> Path:
    path.write_text(json.dumps(_jsonable(doc), indent=2, sort_keys=True) + "\n")
    return path


class ReportContext:
    """Everything analyze needs, resolved once: series, stats, scopes."""

    def __init__(
        self,
        store: Store,
        feeds: dict[str, FeedDescriptor],
        snapshots: list[RegistrySnapshot],
        window: tuple[int, int],
        thresholds,
        scopes: tuple[str, ...] | None = None,
    ):
        if not snapshots:
            raise AnalyticsError("no registry snapshots available")
        self.store = store
        self.feeds = feeds
        self.snapshots = sorted(snapshots, key=lambda s: s.snapshot_date)
        self.registry = self.snapshots[-1]
        self.window = window
        self.thresholds = thresholds

        stored = set(store.feeds())
        self.series: dict[str, object] = {}
        for fid, feed in feeds.items():
            if fid in stored:
                self.series[fid] = store.query(fid, window[0], window[1])
        if not self.series:
            raise AnalyticsError("store holds no data for any configured feed")
        self.tz = {fid: feeds[fid].timezone for fid in self.series}
        self.stats = {
            fid: analytics.daily_stats(s, self.tz[fid], thresholds.completeness)
            for fid, s in self.series.items()
        }
        present_regions = sorted(
            {
                r
                for fid in self.series
                for r in [feed_region(feeds[fid], self.registry)]
                if r is not None and not feeds[fid].global_federated
            }
        )
        self.scopes = tuple(scopes) if scopes else tuple(["global"] + present_regions)

    def scope_feeds(self, scope: str) -> list[str]:
        ids = analytics.scope_feed_ids(
            {fid: self.feeds[fid] for fid in self.series}, self.registry, scope
        )
        return [fid for fid in ids if fid in self.series]

    def scope_weekend(self, scope: str) -> frozenset[int]:
        return WEEKEND_DAYS.get(scope, frozenset({5, 6}))

    def scope_series_uniform(self, scope: str):
        """Scope series resampled to a common (coarsest) interval."""
        ids = self.scope_feeds(scope)
        chosen = {fid: self.series[fid] for fid in ids}
        if not chosen:
            return {}
        target = max(s.interval_s for s in chosen.values())
        return {fid: s.resample(target) for fid, s in chosen.items()}


def growth_report(ctx: ReportContext) -> dict:
    out = {}
    for scope in ctx.scopes:
        ids = ctx.scope_feeds(scope)
        if not ids:
            continue
        try:
            agg = analytics.aggregate({fid: ctx.stats[fid] for fid in ids})
        except AnalyticsError as exc:
            out[scope] = {"error": str(exc)}
            continue
        scope_doc = {"feeds": list(agg.feed_ids), "days": len(agg.dates), "metrics": {}}
        for metric in ("mean", "p95", "p5"):
            values = agg.metric(metric)
            entry = {}
            try:
                fit = analytics.growth_fit(
                    list(agg.dates), values, metric, ctx.thresholds.growth_min_days
                )
                entry["window"] = [fit.window[0], fit.window[1]]
                entry["percent_growth"] = fit.percent_growth
                entry["slope_bps_per_day"] = fit.fit_slope_bps_per_day
                entry["r_squared"] = fit.r_squared
            except InsufficientData as exc:
                entry["error"] = str(exc)
            try:
                abs_std, rel_pct = analytics.volatility(values)
                entry["volatility_abs_std_bps"] = abs_std
                entry["volatility_relative_pct"] = rel_pct
            except InsufficientData:
                pass
            scope_doc["metrics"][metric] = entry
        out[scope] = scope_doc
    return out


def convergence_report(ctx: ReportContext) -> dict:
    out = {}
    for scope in ctx.scopes:
        ids = ctx.scope_feeds(scope)
        if len(ids) < 1:
            continue
        try:
            agg_dates = analytics.aggregate({fid: ctx.stats[fid] for fid in ids}).dates
            daily = {}
            for fid in ids:
                by_date = {s.local_date: s.mean_bps for s in ctx.stats[fid] if s.complete}
                daily[fid] = np.array([by_date[d] for d in agg_dates])
            curve = analytics.convergence(daily, ctx.thresholds.convergence_ma_days)
        except (AnalyticsError, KeyError) as exc:
            out[scope] = {"error": str(exc)}
            continue
        out[scope] = {
            "feed_order": list(curve.feed_order),
            "points": [
                {"traffic_share": s, "pearson_r": r} for s, r in curve.points()
            ],
            "share_r90": curve.share_r90,
            "share_r95": curve.share_r95,
        }
    return out


def entropy_report(ctx: ReportContext) -> dict:
    # min_days relaxed to 1 here: the report stays useful on short runs; the
    # trend analysis itself calls the scan with its documented 7-day floor.
    try:
        points = analytics.entropy_volume_scan(
            dict(ctx.series), ctx.tz, min_days=1, completeness=ctx.thresholds.completeness
        )
    except InsufficientData as exc:
        return {"error": str(exc)}
    ranks_v = np.argsort(np.argsort([p.mean_bps for p in points]))
    ranks_h = np.argsort(np.argsort([p.mean_daily_entropy_bits for p in points]))
    rho = None
    if len(points) >= 3:
        try:
            rho = analytics.pearson(ranks_v.astype(float), ranks_h.astype(float))
        except AnalyticsError:
            rho = None
    return {
        "points": [
            {
                "feed_id": p.feed_id,
                "mean_bps": p.mean_bps,
                "mean_daily_entropy_bits": p.mean_daily_entropy_bits,
                "days": p.n_days,
            }
            for p in points
        ],
        "spearman_volume_entropy": rho,
    }


def profile_report(ctx: ReportContext) -> dict:
    out = {}
    for scope in ctx.scopes:
        chosen = ctx.scope_series_uniform(scope)
        if not chosen:
            continue
        try:
            prof = analytics.weekly_profile(
                chosen,
                ctx.tz,
                weekend_days=ctx.scope_weekend(scope),
                min_weeks=ctx.thresholds.profile_min_weeks,
                completeness=ctx.thresholds.completeness,
            )
        except (AnalyticsError, InsufficientData) as exc:
            out[scope] = {"error": str(exc)}
            continue
        out[scope] = {
            "interval_s": prof.interval_s,
            "weeks_used": prof.weeks_used,
            "weekend_days": sorted(prof.weekend_days),
            "peak_to_trough_weekday": prof.peak_to_trough_weekday,
            "peak_to_trough_weekend": prof.peak_to_trough_weekend,
            "peak_time_weekday_min": prof.peak_time_weekday_min,
            "peak_time_weekend_min": prof.peak_time_weekend_min,
            "trough_time_weekday_min": prof.trough_time_weekday_min,
            "weekend_peak_delta": prof.weekend_peak_delta,
            "late_night_share": prof.late_night_share,
            "morning_dip": prof.morning_dip,
            "grid_mean": float(prof.grid.mean()),
        }
    return out


def anomaly_report(ctx: ReportContext) -> dict:
    out = {}
    for scope in ctx.scopes:
        chosen = ctx.scope_series_uniform(scope)
        if not chosen:
            continue
        agg = analytics.sum_series(list(chosen.values()), feed_id=f"agg-{scope}")
        tz = "UTC"
        ids = ctx.scope_feeds(scope)
        zones = {ctx.tz[fid] for fid in ids}
        if len(zones) == 1:
            tz = zones.pop()
        try:
            findings = analytics.detect_anomalies(
                agg,
                tz,
                threshold_z=ctx.thresholds.anomaly_z,
                ratio_threshold=ctx.thresholds.anomaly_ratio,
                min_baseline=ctx.thresholds.anomaly_min_baseline,
                completeness=ctx.thresholds.completeness,
            )
        except InsufficientData as exc:
            out[scope] = {"error": str(exc)}
            continue
        out[scope] = {
            "timezone": tz,
            "findings": [
                {
                    "local_date": f.local_date,
                    "weekday": f.weekday,
                    "score": f.score if np.isfinite(f.score) else None,
                    "windows": [
                        {"start_min": a, "end_min": b, "ratio": r} for a, b, r in f.windows
                    ],
                }
                for f in findings
            ],
        }
    return out


def utilization_report(ctx: ReportContext) -> dict:
    out = {}
    for scope in ctx.scopes:
        ids = ctx.scope_feeds(scope)
        if not ids:
            continue
        try:
            agg = analytics.aggregate({fid: ctx.stats[fid] for fid in ids})
            monitored = {i for fid in ids for i in ctx.feeds[fid].member_ixp_ids}
            series = analytics.utilization_series(
                list(agg.dates), agg.mean_bps, ctx.snapshots, monitored
            )
        except AnalyticsError as exc:
            out[scope] = {"error": str(exc)}
            continue
        out[scope] = {
            "daily": [{"date": d, "utilization": u} for d, u in series],
            "mean_utilization": float(np.mean([u for _, u in series])) if series else None,
        }
    return out


def coverage_report(ctx: ReportContext) -> dict:
    monitored = {i for fid, f in ctx.feeds.items() for i in f.member_ixp_ids}
    out = {}
    for scope in ("global",) + REGIONS:
        region = None if scope == "global" else scope
        try:
            frac = analytics.capacity_coverage(ctx.registry, monitored, region)
        except AnalyticsError:
            continue
        out[scope] = frac
    if len(ctx.snapshots) >= 2:
        traj = analytics.capacity_trajectory(ctx.snapshots)
        out["capacity_trajectory"] = {
            "dates": list(traj.dates),
            "total_capacity_bps": list(traj.total_capacity_bps),
            "deltas": [
                {"date": d, "ixp_id": i, "delta_bps": c} for d, i, c in traj.deltas
            ],
        }
    return out


def write_reports(ctx: ReportContext, out_dir: str | Path) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = [
        _write_json(out / "growth.json", growth_report(ctx)),
        _write_json(out / "convergence.json", convergence_report(ctx)),
        _write_json(out / "entropy.json", entropy_report(ctx)),
        _write_json(out / "profiles.json", profile_report(ctx)),
        _write_json(out / "anomalies.json", anomaly_report(ctx)),
        _write_json(out / "utilization.json", utilization_report(ctx)),
        _write_json(out / "coverage.json", coverage_report(ctx)),
    ]
    written.append(write_coverage_table(ctx, out / "table1.csv"))
    written.append(write_convergence_table(ctx, out / "table2.csv"))
    return written


def write_coverage_table(ctx: ReportContext, path: Path) -> Path:
    """Regional distribution and capacity coverage (Table 1 shape)."""
    monitored = {i for f in ctx.feeds.values() for i in f.member_ixp_ids}
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["region", "ixps", "monitored", "capacity_coverage_pct"])
        for region in REGIONS:
            records = [r for r in ctx.registry.records if r.region == region]
            if not records:
                continue
            mon = sum(1 for r in records if r.ixp_id in monitored)
            try:
                cov = analytics.capacity_coverage(ctx.registry, monitored, region) * 100.0
                cov_s = f"{cov:.1f}"
            except AnalyticsError:
                cov_s = ""
            w.writerow([region, len(records), mon, cov_s])
    return path


def write_convergence_table(ctx: ReportContext, path: Path) -> Path:
    """Observed-traffic shares needed for R>0.90 / R>0.95 (Table 2 shape)."""
    doc = convergence_report(ctx)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["region", "pct_obs_traffic_r090", "pct_obs_traffic_r095"])
        for scope in ctx.scopes:
            if scope == "global" or scope not in doc or "error" in doc[scope]:
                continue
            row = doc[scope]
            fmt = lambda v: f"{v * 100.0:.1f}" if v is not None else ""
            w.writerow([scope, fmt(row["share_r90"]), fmt(row["share_r95"])])
    return path
