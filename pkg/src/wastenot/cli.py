"""Operator command line.

    wastenot serve     --config server.toml [--port 8000] [--no-scheduler]
    wastenot gen-trays --seed 7 --date 2023-03-20 [--profile profile.json] [--out -]
    wastenot aggregate --date 2023-03-20 [--config server.toml]
    wastenot simulate  --spec sim.json --out report.json

Exit codes: 0 success, 1 usage/configuration error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from datetime import date
from pathlib import Path

from wastenot import simulate as sim
from wastenot.aggregate import Aggregator, DailyScheduler
from wastenot.config import BadConfig, load_config
from wastenot.ingest import MalformedDocument, SyntheticProfile, default_profile
from wastenot.store import StorageUnavailable, Store

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_RUNTIME = 2


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on bad usage; our contract reserves 2 for runtime failures.
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _build_parser() -> _Parser:
    parser = _Parser(prog="wastenot", description="food-waste campaign service")
    sub = parser.add_subparsers(dest="command", required=True)

    serve = sub.add_parser("serve", parents=[], help="run the HTTP API")
    serve.add_argument("--config", type=Path, default=None, help="TOML config file")
    serve.add_argument("--host", default=None)
    serve.add_argument("--port", type=int, default=None)
    serve.add_argument(
        "--no-scheduler", action="store_true", help="do not start the daily aggregation thread"
    )

    gen = sub.add_parser("gen-trays", help="generate a synthetic tray batch")
    gen.add_argument("--seed", type=int, required=True)
    gen.add_argument("--date", required=True, help="YYYY-MM-DD")
    gen.add_argument("--profile", type=Path, default=None, help="profile JSON file")
    gen.add_argument("--config", type=Path, default=None, help="TOML config (for the timezone)")
    gen.add_argument("--out", default="-", help="output path, '-' for stdout")

    agg = sub.add_parser("aggregate", help="recompute one day's dashboard aggregates")
    agg.add_argument("--date", required=True, help="YYYY-MM-DD")
    agg.add_argument("--config", type=Path, default=None)

    simp = sub.add_parser("simulate", help="replay a campaign against the in-process API")
    simp.add_argument("--spec", type=Path, default=None, help="simulation spec JSON")
    simp.add_argument("--out", type=Path, default=None, help="write the report JSON here")

    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(name)s %(message)s")
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "serve":
            return _cmd_serve(args)
        if args.command == "gen-trays":
            return _cmd_gen_trays(args)
        if args.command == "aggregate":
            return _cmd_aggregate(args)
        if args.command == "simulate":
            return _cmd_simulate(args)
        raise AssertionError(f"unreachable command {args.command!r}")
    except (BadConfig, sim.BadSpec, MalformedDocumentCli) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (StorageUnavailable, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


class MalformedDocumentCli(Exception):
    """Usage-level wrapper for bad input files handed to the CLI."""


def _open_store(config) -> Store:
    if config.data_dir:
        return Store.open(config.data_dir, max_blob_bytes=config.max_photo_bytes)
    return Store.memory(max_blob_bytes=config.max_photo_bytes)


def _cmd_serve(args) -> int:
    import uvicorn

    from wastenot.service import create_app

    config = load_config(args.config)
    if args.port is not None:
        config = replace(config, port=args.port)
    if args.host is not None:
        config = replace(config, host=args.host)

    store = _open_store(config)
    app = create_app(config, store=store)
    scheduler = None
    if config.scheduler_enabled and not args.no_scheduler:
        scheduler = DailyScheduler(
            app.state.ctx.aggregator, config.campaign.tzinfo, run_at=config.scheduler_run_at
        )
        scheduler.start()
        logger.info("daily scheduler armed for %s local time", config.scheduler_run_at)
    try:
        uvicorn.run(app, host=config.host, port=config.port, log_level="info")
    except SystemExit as exc:  # uvicorn startup failure (e.g. port in use)
        return EXIT_RUNTIME if exc.code else EXIT_OK
    finally:
        if scheduler is not None:
            scheduler.stop()
    return EXIT_OK


def _parse_date(raw: str) -> date:
    try:
        return date.fromisoformat(raw)
    except ValueError:
        raise MalformedDocumentCli(f"--date must be YYYY-MM-DD, got {raw!r}") from None


def _cmd_gen_trays(args) -> int:
    from wastenot.ingest import generate_synthetic_day, serialize_tray_batch

    day = _parse_date(args.date)
    config = load_config(args.config)
    if args.profile is not None:
        try:
            with args.profile.open() as handle:
                profile = SyntheticProfile.from_dict(json.load(handle))
        except FileNotFoundError:
            raise MalformedDocumentCli(f"profile file not found: {args.profile}") from None
        except (json.JSONDecodeError, MalformedDocument, ValueError) as exc:
            raise MalformedDocumentCli(f"invalid profile: {exc}") from None
    else:
        profile = default_profile()
    batch = serialize_tray_batch(
        generate_synthetic_day(args.seed, day, profile, config.campaign.tzinfo)
    )
    if args.out == "-":
        print(batch)
    else:
        Path(args.out).write_text(batch + "\n")
        print(f"wrote {profile.trays_per_day} trays to {args.out}", file=sys.stderr)
    return EXIT_OK


def _cmd_aggregate(args) -> int:
    day = _parse_date(args.date)
    config = load_config(args.config)
    store = _open_store(config)
    aggregator = Aggregator(store, config.model, config.campaign.severity_thresholds)
    daily = aggregator.run_daily_job(day)
    print(json.dumps(daily.to_doc(), indent=2))
    return EXIT_OK


def _cmd_simulate(args) -> int:
    spec = sim.SimulationSpec.load(args.spec) if args.spec else sim.SimulationSpec()
    report = sim.run_simulation(spec)
    if args.out is not None:
        sim.write_report(report, args.out)
    summary = {k: report[k] for k in ("n_users", "total_actions", "reward_eligible_count", "runtime_seconds")}
    print(json.dumps(summary))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
