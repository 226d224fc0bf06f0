"""Command-line pipeline: scan | serve | aggregate | attribute | notify | stats.

Every command exits 0 on success, 1 on runtime errors, 2 on configuration
errors, and reports failures as a single machine-parsable ``error: ...``
line on stderr.
"""

from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys
from datetime import datetime, timedelta, timezone

from . import insights
from .attribution import AttributionResolver, AttributionResult
from .config import ConfigError, ServiceConfig, load_config
from .history import FixtureHistory, GitCloneHistory, HistoryUnavailable
from .ledger import LedgerError, ThanksLedger
from .notify import (
    ConfigurationError,
    Dispatcher,
    DigestTemplates,
    DispatchMode,
    IdempotencyLedger,
    MailTransport,
    build_reports,
)
from .registry import Ecosystem, PackageCoordinates, RegistryClient, load_override_map
from .scanner import SourceDocument, scan

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_CONFIG = 2


def _fail(message: str, code: int) -> int:
    print("error: %s" % message, file=sys.stderr)
    return code


def _parse_window(args) -> tuple[datetime | None, datetime | None]:
    start = datetime.fromisoformat(args.start) if getattr(args, "start", None) else None
    end = datetime.fromisoformat(args.end) if getattr(args, "end", None) else None
    return start, end


def _registry_client(config: ServiceConfig) -> RegistryClient:
    overrides = {}
    if config.override_map_path:
        overrides = load_override_map(config.override_map_path)
    return RegistryClient(
        pypi_template=config.pypi_url_template,
        npm_template=config.npm_url_template,
        overrides=overrides,
        fixture_dir=config.registry_fixture_dir,
    )


def _history_factory(config: ServiceConfig):
    def history_for(coordinates: PackageCoordinates):
        if config.history_fixture_dir:
            bundle = os.path.join(
                config.history_fixture_dir,
                coordinates.ecosystem.value,
                coordinates.package_name.replace("/", "__"),
            )
            if os.path.isdir(bundle):
                return FixtureHistory(bundle)
        clone_dir = os.path.join(
            config.cache_dir, "clones", coordinates.package_name.replace("/", "__")
        )
        if not os.path.isdir(clone_dir):
            if coordinates.repository_url is None:
                raise HistoryUnavailable("no repository URL to clone")
            subprocess.run(
                ["git", "clone", "--quiet", coordinates.repository_url, clone_dir],
                check=True,
            )
        return GitCloneHistory(clone_dir)

    return history_for


def cmd_scan(args, config: ServiceConfig) -> int:
    deny = config.deny_list()
    for path in args.files:
        try:
            with open(path, "r", encoding="utf-8") as fh:
                text = fh.read()
            doc = SourceDocument.from_path(path, text)
        except (OSError, ValueError) as exc:
            return _fail(str(exc), EXIT_RUNTIME)
        for anchor in scan(doc, deny):
            record = anchor.to_dict()
            record["file"] = path
            print(json.dumps(record, ensure_ascii=False))
    return EXIT_OK


def cmd_serve(args, config: ServiceConfig) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(config)
    uvicorn.run(app, host=config.listen_host, port=config.listen_port)
    return EXIT_OK


def cmd_aggregate(args, config: ServiceConfig) -> int:
    start, end = _parse_window(args)
    ledger = ThanksLedger(config.ledger_path)
    for obj in ledger.aggregate_objects(start, end):
        print(json.dumps(obj.to_dict(), ensure_ascii=False))
    return EXIT_OK


def cmd_attribute(args, config: ServiceConfig) -> int:
    start, end = _parse_window(args)
    ledger = ThanksLedger(config.ledger_path)
    objects = ledger.aggregate_objects(start, end)
    resolver = AttributionResolver(
        _registry_client(config),
        _history_factory(config),
        parallelism=config.resolver_parallelism,
    )
    results = resolver.attribute_many(objects)
    os.makedirs(config.cache_dir, exist_ok=True)
    cache_path = os.path.join(config.cache_dir, "attributions.json")
    with open(cache_path, "w", encoding="utf-8") as fh:
        json.dump({"results": [r.to_dict() for r in results]}, fh, ensure_ascii=False, indent=2)
    if args.review:
        for entry in resolver.review_queue:
            print(json.dumps(entry.to_dict(), ensure_ascii=False))
    else:
        print(
            json.dumps(
                {
                    "attributed": len(results),
                    "unresolved": len(resolver.review_queue),
                    "cache": cache_path,
                }
            )
        )
    return EXIT_OK


def cmd_notify(args, config: ServiceConfig) -> int:
    if args.send == args.dry_run:
        return _fail("exactly one of --dry-run or --send is required", EXIT_CONFIG)
    start, end = _parse_window(args)
    try:
        templates = DigestTemplates(config.template_dir)
    except ConfigurationError as exc:
        return _fail(str(exc), EXIT_CONFIG)
    transport = None
    if args.send:
        if not config.mail_host:
            return _fail("Send mode requires mail transport configuration", EXIT_CONFIG)
        transport = MailTransport(
            host=config.mail_host,
            port=config.mail_port,
            username=config.mail_username,
            password=config.mail_password,
        )
    ledger = ThanksLedger(config.ledger_path)
    objects = ledger.aggregate_objects(start, end)
    cache_path = os.path.join(config.cache_dir, "attributions.json")
    try:
        with open(cache_path, "r", encoding="utf-8") as fh:
            cached = json.load(fh)
    except OSError as exc:
        return _fail("no attribution cache (run attribute first): %s" % exc, EXIT_RUNTIME)
    results = [AttributionResult.from_dict(r) for r in cached["results"]]
    known = {o.object_key for o in objects}
    results = [r for r in results if r.object_key in known and r.contributors]
    window_stamp = args.window_stamp or (start.date().isoformat() if start else "all")
    reports = build_reports(
        results,
        objects,
        window=(start.isoformat() if start else "", end.isoformat() if end else ""),
        context_preamble=config.context_preamble,
    )
    dispatcher = Dispatcher(
        templates=templates,
        outbox_dir=config.outbox_dir,
        idempotency_ledger=IdempotencyLedger(
            os.path.join(config.cache_dir, "dispatch.ndjson")
        ),
        transport=transport,
        sender=config.mail_sender,
        parallelism=config.dispatch_parallelism,
    )
    mode = DispatchMode.SEND if args.send else DispatchMode.DRY_RUN
    try:
        summary = dispatcher.dispatch(reports, mode, window_stamp)
    except ConfigurationError as exc:
        return _fail(str(exc), EXIT_CONFIG)
    print(json.dumps(summary.to_dict()))
    return EXIT_OK if summary.failed == 0 else EXIT_RUNTIME


def cmd_stats(args, config: ServiceConfig) -> int:
    ledger = ThanksLedger(config.ledger_path)
    start, end = _parse_window(args)
    stats = insights.package_stats(
        ledger.events(), Ecosystem(args.ecosystem), args.package, start, end
    )
    if args.format == "table":
        print(insights.stats_table(stats))
    else:
        print(json.dumps(stats.to_dict(), ensure_ascii=False))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="thanksd")
    parser.add_argument("--config", help="path to TOML config file")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("scan", help="print anchors for source files")
    p.add_argument("files", nargs="+")
    p.set_defaults(handler=cmd_scan)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.set_defaults(handler=cmd_serve)

    p = sub.add_parser("aggregate", help="print thanked objects for a window")
    p.add_argument("--start")
    p.add_argument("--end")
    p.set_defaults(handler=cmd_aggregate)

    p = sub.add_parser("attribute", help="resolve and cache attributions")
    p.add_argument("--start")
    p.add_argument("--end")
    p.add_argument("--review", action="store_true", help="list unresolved objects")
    p.set_defaults(handler=cmd_attribute)

    p = sub.add_parser("notify", help="build and dispatch contributor digests")
    p.add_argument("--start")
    p.add_argument("--end")
    p.add_argument("--dry-run", action="store_true")
    p.add_argument("--send", action="store_true")
    p.add_argument("--window-stamp", dest="window_stamp")
    p.set_defaults(handler=cmd_notify)

    p = sub.add_parser("stats", help="print per-package stats")
    p.add_argument("package")
    p.add_argument("--ecosystem", choices=[e.value for e in Ecosystem], required=True)
    p.add_argument("--start")
    p.add_argument("--end")
    p.add_argument("--format", choices=["json", "table"], default="json")
    p.set_defaults(handler=cmd_stats)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = load_config(args.config)
        config.validate()
    except ConfigError as exc:
        return _fail(str(exc), EXIT_CONFIG)
    try:
        return args.handler(args, config)
    except LedgerError as exc:
        return _fail(str(exc), EXIT_RUNTIME)
    except HistoryUnavailable as exc:
        return _fail(str(exc), EXIT_RUNTIME)
    except (OSError, ValueError, subprocess.CalledProcessError) as exc:
        return _fail(str(exc), EXIT_RUNTIME)


if __name__ == "__main__":
    sys.exit(main())
