"""Command-line interface.

Exit codes: 0 = clean scan (or successful eval/explain), 1 = pairs
found, 2 = fatal error. CI can therefore gate on the exit status alone.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import __version__
from .pipeline import (
    FatalScanError,
    Report,
    ReportFormat,
    ScanConfig,
    ScanMode,
    emit_report,
    evaluate,
    explain_rules,
    report_from_dict,
    run_scan,
)
from .proximity import SchemaError
from .pyflow.sinks import CatalogError, load_catalog
from .repowalk import DEFAULT_MAX_BLOB_BYTES


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="harvest",
        description="Detect database credentials together with the assets they protect.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    scan = sub.add_parser("scan", help="scan a directory or git repository")
    scan.add_argument("path", help="directory (or repository, with --history) to scan")
    scan.add_argument("--history", action="store_true",
                      help="walk the full git commit history instead of the working tree")
    scan.add_argument("--flow-history", action="store_true",
                      help="run data-flow analysis on every historical snapshot (slow)")
    scan.add_argument("--sinks", default=None, metavar="FILE",
                      help="sink catalog: 'builtin', 'paper-compat', or a YAML file "
                           "(default: $HARVEST_SINKS or builtin)")
    scan.add_argument("--secrets-in", default=None, metavar="FILE",
                      help="external secret findings to pair (harvest-secrets/1 format)")
    scan.add_argument("--window", type=int, default=3,
                      help="neighboring-lines window for the heuristic (default 3)")
    scan.add_argument("--threshold", type=float, default=0.5,
                      help="Jaro-Winkler similarity threshold (default 0.5)")
    scan.add_argument("--max-blob-bytes", type=int, default=DEFAULT_MAX_BLOB_BYTES,
                      help="skip blobs larger than this (default 5 MiB)")
    scan.add_argument("--format", choices=["json", "text"], default="json")
    scan.add_argument("--out", default=None, metavar="FILE",
                      help="write the report here instead of stdout")

    ev = sub.add_parser("eval", help="score a report against labeled ground truth")
    ev.add_argument("--report", required=True, metavar="FILE")
    ev.add_argument("--truth", required=True, metavar="FILE")

    sub.add_parser("explain-rules", help="print grammars, sink catalog, and heuristic knobs")
    return parser


def _cmd_scan(args: argparse.Namespace) -> int:
    sinks = args.sinks or os.environ.get("HARVEST_SINKS") or "builtin"
    try:
        cfg = ScanConfig(
            target=args.path,
            mode=ScanMode.HISTORY if args.history else ScanMode.WORKTREE,
            sink_catalog=sinks,
            secrets_report=args.secrets_in,
            window=args.window,
            threshold=args.threshold,
            max_blob_bytes=args.max_blob_bytes,
            flow_history=args.flow_history,
            output=args.out,
            format=ReportFormat(args.format),
        )
        report = run_scan(cfg)
    except (FatalScanError, ValueError) as e:
        print(f"harvest: fatal: {e}", file=sys.stderr)
        return 2
    payload = emit_report(report, cfg.format)
    if cfg.output:
        with open(cfg.output, "wb") as fh:
            fh.write(payload)
    else:
        sys.stdout.buffer.write(payload)
        sys.stdout.flush()
    return 1 if report.pairs else 0


def _cmd_eval(args: argparse.Namespace) -> int:
    try:
        with open(args.report, "r", encoding="utf-8") as fh:
            report: Report = report_from_dict(json.load(fh))
        result = evaluate(report, args.truth)
    except (OSError, json.JSONDecodeError, KeyError, ValueError, SchemaError) as e:
        print(f"harvest: fatal: {e}", file=sys.stderr)
        return 2
    rows = list(result.per_kind.items()) + [("Overall", result.overall)]
    width = max(len(name) for name, _ in rows)
    for name, row in rows:
        print(
            f"{name:<{width}}  precision {row.precision:.4f} ({row.tp}, {row.fp})  "
            f"recall {row.recall:.4f} ({row.tp}, {row.fn})  f1 {row.f1:.4f}"
        )
    return 0


def _cmd_explain(_: argparse.Namespace) -> int:
    sinks = os.environ.get("HARVEST_SINKS") or "builtin"
    try:
        sys.stdout.write(explain_rules(load_catalog(sinks)))
    except CatalogError as e:
        print(f"harvest: fatal: {e}", file=sys.stderr)
        return 2
    return 0


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "scan":
        return _cmd_scan(args)
    if args.command == "eval":
        return _cmd_eval(args)
    return _cmd_explain(args)


if __name__ == "__main__":
    sys.exit(main())
