"""harvest: find database credentials together with the assets they protect.

Three complementary detectors feed one merged report: connection-string
pattern matching, constant data-flow analysis into database-driver
sinks, and a neighboring-lines similarity heuristic for whatever the
first two cannot see.
"""

from __future__ import annotations

__version__ = "0.1.0"

from .model import (
    AssetClass,
    AssetIdentifier,
    DatabaseKind,
    DetectionMethod,
    Diagnostic,
    SecretAssetPair,
    SecretCredential,
    Severity,
    SourceLocation,
    classify_asset,
    make_asset,
    merge_pairs,
    pair_identity,
)
from .pipeline import (
    EvalResult,
    Report,
    ReportFormat,
    ScanConfig,
    ScanMode,
    emit_report,
    evaluate,
    explain_rules,
    metrics_from_counts,
    run_scan,
)

__all__ = [
    "AssetClass",
    "AssetIdentifier",
    "DatabaseKind",
    "DetectionMethod",
    "Diagnostic",
    "EvalResult",
    "Report",
    "ReportFormat",
    "ScanConfig",
    "ScanMode",
    "SecretAssetPair",
    "SecretCredential",
    "Severity",
    "SourceLocation",
    "classify_asset",
    "emit_report",
    "evaluate",
    "explain_rules",
    "make_asset",
    "merge_pairs",
    "metrics_from_counts",
    "pair_identity",
    "run_scan",
]
