"""Command-line entry point wiring simulator, collector, store, and analytics.

Subcommands: simulate (serve a synthetic fleet + export ground truth),
collect (run one collector node), analyze (write report files), report
(write the CSV summary tables), e2e (simulate -> collect -> analyze ->
verify against ground truth). Exit codes: 0 success, 1 criterion failure,
2 usage/config error.
"""

from __future__ import annotations

import argparse
import json
import signal
import sys
import threading
import time
from pathlib import Path

import numpy as np

from ixmon.collector import CollectorNode
from ixmon.config import ConfigError, RunConfig, Thresholds, parse_rate
from ixmon.core import IxmonError, format_registry_text
from ixmon.reports import ReportContext, write_reports, write_convergence_table, write_coverage_table
from ixmon.simulate.model import generate_series
from ixmon.simulate.server import serve
from ixmon.store import Store


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="run configuration JSON")
    p.add_argument("--seed", type=int, help="override config seed")
    p.add_argument("--accel", type=float, help="override clock acceleration")
    p.add_argument("--out", type=Path, help="override output directory")
    p.add_argument("--store", type=Path, help="override store root")
    p.add_argument("--duration", type=int, help="override simulated data horizon (seconds)")
    p.add_argument("--port", type=int, help="override simulator port")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ixmon", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="serve a synthetic feed fleet and export ground truth")
    _add_common(p)
    p.add_argument("--serve-for", type=float, default=0.0, help="wall seconds to serve (0 = until interrupted)")
    p.add_argument("--feeds", type=int, help="shortcut: N constant feeds (flat preset)")
    p.add_argument("--flat", type=str, help="shortcut: constant rate for --feeds, e.g. 10G")
    p.add_argument("--no-truth", action="store_true", help="skip ground-truth CSV export")

    p = sub.add_parser("collect", help="run one collector node until the data horizon")
    _add_common(p)
    p.add_argument("--role", choices=("main", "backup"), help="override node role")
    p.add_argument("--node-id", type=str, help="override node id")

    p = sub.add_parser("analyze", help="compute all reports from the store")
    _add_common(p)
    p.add_argument("--scope", action="append", help="limit to a region or feed_id (repeatable)")
    p.add_argument("--table2", action="store_true", help="also print the convergence table path")

    p = sub.add_parser("report", help="write the coverage/convergence CSV tables")
    _add_common(p)
    p.add_argument("--scope", action="append", help="limit to a region or feed_id (repeatable)")

    p = sub.add_parser("e2e", help="simulate + collect + analyze, verified against ground truth")
    _add_common(p)
    return parser


def _load_config(args) -> RunConfig:
    cfg = RunConfig.from_file(args.config) if args.config else _default_e2e_config()
    cfg = cfg.override(
        seed=args.seed,
        accel=args.accel,
        duration_s=args.duration,
        port=args.port,
        out=str(args.out) if args.out else None,
        store=str(args.store) if args.store else None,
    )
    if getattr(args, "role", None):
        cfg = cfg.override(role=args.role)
    if getattr(args, "node_id", None):
        cfg = cfg.override(node_id=args.node_id)
    if getattr(args, "scope", None):
        cfg = cfg.override(scopes=tuple(args.scope))
    if getattr(args, "feeds", None):
        fleet = {"preset": "flat", "n_feeds": args.feeds}
        if args.flat:
            fleet["base_bps"] = parse_rate(args.flat)
        cfg = cfg.override(fleet=fleet)
    return cfg


def _default_e2e_config() -> RunConfig:
    """Self-contained quick run: one week of data for a small regional fleet,
    accelerated so collection takes about a minute against the local server."""
    return RunConfig(
        duration_s=7 * 86400,
        accel=10080.0,
        port=0,
        fleet={"preset": "paper-regions", "feeds_per_region": 1, "poll_period_s": 3600},
        thresholds=Thresholds(politeness_s=0.0),
    )


def _export_truth(cfg: RunConfig, fleet, out_dir: Path) -> list[Path]:
    truth_dir = out_dir / "truth"
    truth_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for feed, model in fleet:
        series = generate_series(
            model, cfg.sim_epoch, cfg.sim_epoch + cfg.duration_s, feed.interval_s, feed.feed_id
        )
        path = truth_dir / f"{feed.feed_id}.csv"
        path.write_text(series.to_csv())
        paths.append(path)
    return paths


def cmd_simulate(args) -> int:
    cfg = _load_config(args)
    fleet, records = cfg.build_fleet()
    clock = cfg.make_clock()
    if not args.no_truth:
        _export_truth(cfg, fleet, Path(cfg.out))
        print(f"ground truth: {cfg.out}/truth/ ({len(fleet)} feeds)")
    registry_texts = {cfg.registry_date: format_registry_text(records)}
    server = serve(fleet, (cfg.host, cfg.port), clock, registry_texts)
    host, port = server.address
    print(f"simulator listening on http://{host}:{port} feeds={len(fleet)} accel={cfg.accel}")
    sys.stdout.flush()

    stop = threading.Event()
    signal.signal(signal.SIGTERM, lambda *_: stop.set())
    try:
        deadline = time.time() + args.serve_for if args.serve_for > 0 else None
        while not stop.is_set() and (deadline is None or time.time() < deadline):
            time.sleep(0.1)
    except KeyboardInterrupt:
        pass
    finally:
        server.stop()
    return 0


def cmd_collect(args) -> int:
    cfg = _load_config(args)
    fleet, _ = cfg.build_fleet()
    store = Store(cfg.store)
    snapshot = cfg.registry_snapshot()
    store.ingest_registry(cfg.registry_text(), snapshot.snapshot_date)
    node = CollectorNode(
        feeds=[feed for feed, _ in fleet],
        store=store,
        clock=cfg.make_clock(),
        node_id=cfg.effective_node_id,
        role=cfg.role,
        settings=cfg.thresholds.collector_settings(),
        registry=snapshot,
        collect_from=cfg.sim_epoch,
    )
    summary = node.run(until_sim=cfg.sim_epoch + cfg.duration_s)
    failovers = len(store.read_events("promoted")) + len(store.read_events("demoted"))
    summary["failover_events"] = failovers
    print(json.dumps(summary, sort_keys=True))
    return 0


def _report_context(cfg: RunConfig) -> ReportContext:
    store = Store(cfg.store)
    fleet, _ = cfg.build_fleet()
    feeds = {feed.feed_id: feed for feed, _ in fleet}
    dates = store.registry_dates()
    if not dates:
        snapshot = cfg.registry_snapshot()
        store.ingest_registry(cfg.registry_text(), snapshot.snapshot_date)
        dates = store.registry_dates()
    snapshots = [store.load_registry(d) for d in dates]
    return ReportContext(
        store,
        feeds,
        snapshots,
        window=(cfg.sim_epoch, cfg.sim_epoch + cfg.duration_s),
        thresholds=cfg.thresholds,
        scopes=cfg.scopes,
    )


def cmd_analyze(args) -> int:
    cfg = _load_config(args)
    ctx = _report_context(cfg)
    for path in write_reports(ctx, cfg.out):
        print(path)
    return 0


def cmd_report(args) -> int:
    cfg = _load_config(args)
    ctx = _report_context(cfg)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    print(write_coverage_table(ctx, out / "table1.csv"))
    print(write_convergence_table(ctx, out / "table2.csv"))
    return 0


def cmd_e2e(args) -> int:
    cfg = _load_config(args)
    fleet, records = cfg.build_fleet()
    clock = cfg.make_clock()
    server = serve(fleet, (cfg.host, cfg.port), clock, {cfg.registry_date: format_registry_text(records)})
    host, port = server.address
    # feeds must point at the ephemeral port actually bound
    cfg = cfg.override(port=port)
    fleet, records = cfg.build_fleet()
    print(f"e2e: simulator on http://{host}:{port}, {len(fleet)} feeds, "
          f"{cfg.duration_s / 86400:.1f} simulated days at accel {cfg.accel}")

    failures: list[str] = []
    try:
        store = Store(cfg.store)
        snapshot = cfg.registry_snapshot()
        store.ingest_registry(cfg.registry_text(), snapshot.snapshot_date)
        node = CollectorNode(
            feeds=[feed for feed, _ in fleet],
            store=store,
            clock=clock,
            node_id=cfg.effective_node_id,
            role="main",
            settings=cfg.thresholds.collector_settings(),
            registry=snapshot,
            collect_from=cfg.sim_epoch,
        )
        summary = node.run(until_sim=cfg.sim_epoch + cfg.duration_s)
        print("collect summary:", json.dumps(summary, sort_keys=True))

        failures += _verify_against_truth(cfg, fleet, store)

        ctx = _report_context(cfg)
        paths = write_reports(ctx, cfg.out)
        print(f"reports: {len(paths)} files in {cfg.out}")
    finally:
        server.stop()

    for line in failures:
        print(f"E2E FAIL {line}")
    if not failures:
        print("E2E PASS all checks")
    return 1 if failures else 0


def _verify_against_truth(cfg: RunConfig, fleet, store: Store) -> list[str]:
    """Stored data must match the generator: exactly for api/html feeds,
    within the digitization tolerance for plot feeds, with no gaps."""
    failures = []
    for feed, model in fleet:
        step = feed.interval_s
        end = (cfg.sim_epoch + cfg.duration_s) // step * step - 2 * step
        truth = generate_series(model, cfg.sim_epoch, end, step, feed.feed_id)
        stored = store.query(feed.feed_id, cfg.sim_epoch, end)
        gaps = stored.gaps(cfg.sim_epoch, end)
        if gaps:
            failures.append(f"{feed.feed_id}: {len(gaps)} gaps, first {gaps[0]}")
            continue
        if len(stored) != len(truth):
            failures.append(f"{feed.feed_id}: {len(stored)} samples, expected {len(truth)}")
            continue
        if feed.kind in ("api", "html"):
            if not np.array_equal(stored.values, truth.values):
                bad = int(np.flatnonzero(stored.values != truth.values)[0])
                failures.append(
                    f"{feed.feed_id}: exact round-trip violated at ts={int(stored.timestamps[bad])}"
                )
        else:
            rel = np.abs(stored.values - truth.values) / np.where(truth.values > 0, truth.values, 1.0)
            mard = float(rel.mean())
            if mard > cfg.thresholds.plot_e2e_tolerance:
                failures.append(
                    f"{feed.feed_id}: digitization MARD {mard:.4%} > "
                    f"{cfg.thresholds.plot_e2e_tolerance:.4%}"
                )
    return failures


_COMMANDS = {
    "simulate": cmd_simulate,
    "collect": cmd_collect,
    "analyze": cmd_analyze,
    "report": cmd_report,
    "e2e": cmd_e2e,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except IxmonError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
