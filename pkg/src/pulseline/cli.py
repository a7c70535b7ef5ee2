"""Command-line interface.

Subcommands:
    serve            run the HTTP gateway
    simulate-device  run the band simulator; write packets or POST bursts
    eval             replay a dataset through both estimator paths
    cost-study       tiered-vs-baseline cost comparison over a query file
    export-user      dump one user's data as JSON (consent surface)
    delete-user      remove one user and all their data
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from .config import ServiceConfig, load_config


def _config_from(args) -> ServiceConfig:
    return load_config(getattr(args, "config", None))


def cmd_serve(args) -> int:
    import uvicorn

    from .gateway.app import create_app
    from .interpreter.client import HttpChatClient
    from .orchestrator.offline import OfflineAgentClient

    config = _config_from(args)
    if args.data_dir:
        config.gateway.data_dir = args.data_dir
    Path(config.gateway.data_dir).mkdir(parents=True, exist_ok=True)
    client = (HttpChatClient(config.live_model) if args.client == "live"
              else OfflineAgentClient())
    static_dir = args.static
    if static_dir is None:
        candidate = Path(__file__).resolve().parents[3] / "frontend" / "dist"
        static_dir = str(candidate) if candidate.is_dir() else None
    from .orchestrator.audit import AuditLog
    audit = AuditLog(Path(config.gateway.data_dir) / "audit.jsonl")
    app = create_app(config=config, client=client, audit=audit,
                     static_dir=static_dir)

    import threading
    import time as _time

    def pump():  # scheduler + delivery retries
        orch = app.state.orchestrator
        while True:
            _time.sleep(args.tick)
            try:
                orch.scheduler.advance()
                orch.flush_outbound()
            except Exception as exc:  # keep the pump alive
                print(f"scheduler tick failed: {exc}", file=sys.stderr)

    threading.Thread(target=pump, daemon=True).start()
    host = args.host or config.gateway.host
    port = args.port or config.gateway.port
    uvicorn.run(app, host=host, port=port, log_level="info")
    return 0


def cmd_simulate_device(args) -> int:
    from .wire.codec import decode
    from .wire.simulator import DeviceConfig, simulate_device
    from .wire.synth import preset_source

    source = preset_source(args.preset)
    records = simulate_device(DeviceConfig(), source, n_cycles=args.cycles,
                              start_ts=args.start_ts, device_id=args.device_id)
    delivered = [packet for record in records for packet in record.delivered]
    if args.out:
        data = b"".join(delivered)
        Path(args.out).write_bytes(data)
        print(f"wrote {len(delivered)} packets ({len(data)} bytes) to {args.out}")
    if args.gateway:
        import httpx

        bursts = []
        for packet in delivered:
            burst = decode(packet, device_id=args.device_id)
            payload = burst.to_json_dict()
            payload["anomaly"] = args.preset != "normal"
            bursts.append(payload)
        response = httpx.post(
            f"{args.gateway.rstrip('/')}/v1/sensors",
            json={"device_id": args.device_id, "bursts": bursts},
            headers={"Authorization": f"Bearer {args.token}"},
            timeout=30.0,
        )
        print(f"gateway: {response.status_code} {response.text}")
        if response.status_code != 200:
            return 1
    if not args.out and not args.gateway:
        for record in records:
            print(f"cycle {record.index}: ts={record.burst.ts} "
                  f"transmit={record.transmit_s:.2f}s "
                  f"delivered={len(record.delivered)}")
    return 0


def cmd_eval(args) -> int:
    from .evalharness.compare import run_comparison
    from .evalharness.dataset import make_synthetic_dataset
    from .interpreter.client import HttpChatClient
    from .interpreter.stubs import WaveformOracleClient

    config = _config_from(args)
    dataset = args.dataset
    if dataset is None:
        if not args.synthetic:
            print("either --dataset DIR or --synthetic is required",
                  file=sys.stderr)
            return 2
        dataset = Path(args.out) / "synthetic_dataset"
        make_synthetic_dataset(dataset)
        print(f"generated synthetic dataset at {dataset}")
    client = (HttpChatClient(config.live_model) if args.client == "live"
              else WaveformOracleClient())
    report = run_comparison(dataset, client, out_dir=args.out,
                            dsp_settings=config.dsp,
                            interp_settings=config.interpreter,
                            render_figures=not args.no_figures)
    computed = report.to_json_dict()["computed"]
    print(json.dumps({"computed": computed, "reference": report.reference},
                     indent=2, sort_keys=True))
    print(f"report written to {args.out}")
    return 0


def cmd_cost_study(args) -> int:
    from .evalharness.figures import render_cost_figure
    from .router.costs import bundled_queries_path, cost_study, load_queries

    config = _config_from(args)
    queries_path = args.queries or bundled_queries_path()
    queries = load_queries(queries_path)
    summary = cost_study(queries, settings=config.router)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "cost_summary.json").write_text(
        json.dumps(summary.to_json_dict(), indent=2, sort_keys=True) + "\n",
        encoding="utf-8")
    with (out / "per_query_costs.csv").open("w", newline="",
                                            encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["query_id", "tier", "tiered_usd",
                         "tiered_with_overhead_usd", "baseline_usd"])
        for q in summary.queries:
            writer.writerow([q.query_id, q.tier, f"{q.tiered_usd:.10f}",
                             f"{q.tiered_with_overhead_usd:.10f}",
                             f"{q.baseline_usd:.10f}"])
    if not args.no_figures:
        render_cost_figure(summary, out)
    print(json.dumps(summary.to_json_dict()["totals"], indent=2))
    print(f"study written to {out}")
    return 0


def _open_store(args):
    from .orchestrator.storage import Store

    config = _config_from(args)
    data_dir = args.data_dir or config.gateway.data_dir
    db = Path(data_dir) / "service.db"
    if not db.exists():
        print(f"no store at {db}", file=sys.stderr)
        return None
    return Store(str(db))


def cmd_export_user(args) -> int:
    from .orchestrator.storage import StorageFailure

    store = _open_store(args)
    if store is None:
        return 2
    try:
        data = store.export_user(args.phone)
    except StorageFailure as exc:
        print(str(exc), file=sys.stderr)
        return 1
    text = json.dumps(data, indent=2, sort_keys=True)
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
        print(f"exported to {args.out}")
    else:
        print(text)
    return 0


def cmd_delete_user(args) -> int:
    from .orchestrator.storage import StorageFailure

    store = _open_store(args)
    if store is None:
        return 2
    try:
        store.delete_user(args.phone)
    except StorageFailure as exc:
        print(str(exc), file=sys.stderr)
        return 1
    print(f"deleted {args.phone} and all associated data")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pulseline",
        description="Wearable vitals backend: gateway, simulator, and "
                    "evaluation jobs.")
    parser.add_argument("--config", help="YAML config file", default=None)
    sub = parser.add_subparsers(dest="command", required=True)

    serve = sub.add_parser("serve", help="run the HTTP gateway")
    serve.add_argument("--host", default=None)
    serve.add_argument("--port", type=int, default=None)
    serve.add_argument("--data-dir", default=None)
    serve.add_argument("--client", choices=["offline", "live"],
                       default="offline")
    serve.add_argument("--static", default=None,
                       help="serve this directory at / (defaults to "
                            "frontend/dist when present)")
    serve.add_argument("--tick", type=float, default=5.0,
                       help="scheduler/retry pump interval, seconds")
    serve.set_defaults(func=cmd_serve)

    sim = sub.add_parser("simulate-device",
                         help="run the four-state band simulator")
    sim.add_argument("--preset", default="normal",
                     choices=["normal", "high-hr", "low-spo2"])
    sim.add_argument("--cycles", type=int, default=1)
    sim.add_argument("--device-id", default="sim-0")
    sim.add_argument("--start-ts", type=int, default=1_700_000_000)
    sim.add_argument("--out", default=None,
                     help="write concatenated binary packets to this file")
    sim.add_argument("--gateway", default=None,
                     help="POST decoded bursts to this gateway base URL")
    sim.add_argument("--token", default="",
                     help="bearer token for --gateway uploads")
    sim.set_defaults(func=cmd_simulate_device)

    ev = sub.add_parser("eval", help="run the estimator comparison")
    ev.add_argument("--dataset", default=None,
                    help="dataset directory (s<N>_<activity>.csv files)")
    ev.add_argument("--synthetic", action="store_true",
                    help="generate and use a synthetic dataset")
    ev.add_argument("--client", choices=["stub", "live"], default="stub")
    ev.add_argument("--out", required=True, help="output directory")
    ev.add_argument("--no-figures", action="store_true")
    ev.set_defaults(func=cmd_eval)

    study = sub.add_parser("cost-study",
                           help="tiered-vs-baseline cost comparison")
    study.add_argument("--queries", default=None,
                       help="line-delimited query file (default: bundled "
                            "30-query sample)")
    study.add_argument("--out", required=True)
    study.add_argument("--no-figures", action="store_true")
    study.set_defaults(func=cmd_cost_study)

    export = sub.add_parser("export-user", help="dump one user's data")
    export.add_argument("--phone", required=True)
    export.add_argument("--data-dir", default=None)
    export.add_argument("--out", default=None)
    export.set_defaults(func=cmd_export_user)

    delete = sub.add_parser("delete-user",
                            help="remove a user and all their data")
    delete.add_argument("--phone", required=True)
    delete.add_argument("--data-dir", default=None)
    delete.set_defaults(func=cmd_delete_user)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
