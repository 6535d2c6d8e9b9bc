"""Scan orchestration, report emission, and evaluation metrics.

Stage order: connection-string matching over every file version, then
constant data flow over the latest snapshot's Python modules (optionally
over every historical snapshot), then the neighboring-lines heuristic
over secrets the first two stages did not cover. The merged, sorted
output makes two runs over the same input byte-identical.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum

from . import proximity, pyflow, repowalk
from .connstr import compile_rules, scan_text
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
    merge_pairs,
    pair_identity,
)
from .proximity import SchemaError
from .pyflow.sinks import SinkSpec, load_catalog

REPORT_SCHEMA_VERSION = "harvest-report/1"
TRUTH_SCHEMA_VERSION = "harvest-truth/1"


class ScanMode(Enum):
    WORKTREE = "worktree"
    HISTORY = "history"


class ReportFormat(Enum):
    JSON = "json"
    TEXT = "text"


@dataclass
class ScanConfig:
    target: str
    mode: ScanMode = ScanMode.WORKTREE
    sink_catalog: str = "builtin"
    secrets_report: str | None = None
    window: int = proximity.DEFAULT_WINDOW
    threshold: float = proximity.DEFAULT_THRESHOLD
    max_blob_bytes: int = repowalk.DEFAULT_MAX_BLOB_BYTES
    flow_history: bool = False
    output: str | None = None
    format: ReportFormat = ReportFormat.JSON

    def __post_init__(self) -> None:
        if self.window < 0:
            raise ValueError("window must be >= 0")
        if not 0.0 <= self.threshold <= 1.0:
            raise ValueError("threshold must be in [0, 1]")


@dataclass(frozen=True)
class ScanCounts:
    files: int = 0
    blobs: int = 0
    commits: int = 0


@dataclass
class Report:
    schema_version: str
    scanned: ScanCounts
    pairs: list[SecretAssetPair]
    diagnostics: list[Diagnostic]


class FatalScanError(Exception):
    """Scan cannot proceed (bad target, bad catalog); exit code 2."""


def _diag_sort_key(d: Diagnostic):
    loc = d.location
    return (
        loc.file_path if loc else "",
        loc.line if loc else 0,
        d.code,
        d.message,
        d.severity.value,
    )


def run_scan(cfg: ScanConfig) -> Report:
    """Run all three stages over the target and merge the results."""
    try:
        catalog = load_catalog(cfg.sink_catalog)
    except pyflow.CatalogError as e:
        raise FatalScanError(f"sink catalog: {e}") from e

    diagnostics: list[Diagnostic] = []
    commits = 0
    if cfg.mode is ScanMode.HISTORY:
        try:
            commits = len(repowalk.history_commits(cfg.target))
            versions = list(
                repowalk.enumerate_history(cfg.target, diagnostics, cfg.max_blob_bytes)
            )
            snapshot, head_commit = repowalk.snapshot_files(
                cfg.target, diagnostics, cfg.max_blob_bytes
            )
        except (repowalk.NotARepository, repowalk.CorruptObject) as e:
            raise FatalScanError(f"{type(e).__name__}: {e}") from e
    else:
        try:
            versions = list(
                repowalk.enumerate_worktree(cfg.target, diagnostics, cfg.max_blob_bytes)
            )
        except NotADirectoryError as e:
            raise FatalScanError(f"target is not a directory: {e}") from e
        snapshot = {v.path: v.content for v in versions}
        head_commit = None

    # Stage 1: connection-string pattern matching over every file version.
    pairs: list[SecretAssetPair] = []
    for version in versions:
        ctx = SourceLocation(version.path, 1, commit_id=version.commit_id)
        pairs.extend(scan_text(version.content, ctx, diagnostics))

    # Stage 2: constant data flow over the latest snapshot (per-snapshot
    # flow across all history is opt-in; it is quadratic in repo size).
    flow_pairs, _ = pyflow.analyze_project(snapshot, catalog, diagnostics, head_commit)
    pairs.extend(flow_pairs)
    if cfg.mode is ScanMode.HISTORY and cfg.flow_history:
        try:
            for commit in repowalk.history_commits(cfg.target):
                if head_commit is not None and commit.hexsha == head_commit:
                    continue
                files, commit_id = repowalk.snapshot_files(
                    cfg.target, diagnostics, cfg.max_blob_bytes, commit=commit
                )
                historical, _ = pyflow.analyze_project(files, catalog, diagnostics, commit_id)
                pairs.extend(historical)
        except (repowalk.NotARepository, repowalk.CorruptObject) as e:
            raise FatalScanError(f"{type(e).__name__}: {e}") from e

    # Stage 3: proximity heuristic over findings the first stages missed.
    covered_values = {p.credential.password for p in pairs}
    if cfg.secrets_report is not None:
        try:
            findings = proximity.ingest_secrets(cfg.secrets_report)
        except (OSError, SchemaError) as e:
            raise FatalScanError(f"secrets report: {e}") from e
        content_by_path = {v.path: v.content for v in versions}
        content_by_path.update(snapshot)
        located = []
        for finding in findings:
            content = content_by_path.get(finding.location.file_path)
            if content is None:
                diagnostics.append(
                    Diagnostic(
                        Severity.WARNING,
                        "finding-path-unknown",
                        f"secrets report references {finding.location.file_path!r}, "
                        "which is not in the scanned tree",
                        finding.location,
                    )
                )
                continue
            located.append((finding, content))
    else:
        located = []
        for version in versions:
            ctx = SourceLocation(version.path, 1, commit_id=version.commit_id)
            for finding in proximity.builtin_detect_secrets(version.content, ctx):
                located.append((finding, version.content))

    for finding, content in sorted(
        located, key=lambda fc: (fc[0].location.file_path, fc[0].location.line, fc[0].value)
    ):
        if finding.value in covered_values:
            continue
        pair = proximity.pair_by_proximity(
            finding, content.splitlines(), cfg.window, cfg.threshold, diagnostics
        )
        if pair is not None:
            pairs.append(pair)

    merged = merge_pairs(pairs)
    seen_diags: set[Diagnostic] = set()
    unique_diags = []
    for diag in sorted(diagnostics, key=_diag_sort_key):
        if diag not in seen_diags:
            seen_diags.add(diag)
            unique_diags.append(diag)
    return Report(
        schema_version=REPORT_SCHEMA_VERSION,
        scanned=ScanCounts(
            files=len(versions),
            blobs=len({v.content_digest for v in versions}),
            commits=commits,
        ),
        pairs=merged,
        diagnostics=unique_diags,
    )


# --- serialization -----------------------------------------------------------


def _location_dict(loc: SourceLocation | None) -> dict | None:
    if loc is None:
        return None
    return {
        "commit_id": loc.commit_id,
        "file_path": loc.file_path,
        "line": loc.line,
        "column": loc.column,
    }


def _pair_dict(p: SecretAssetPair) -> dict:
    return {
        "kind": p.kind.value,
        "method": p.method.value,
        "credential": {"username": p.credential.username, "password": p.credential.password},
        "asset": {
            "host": p.asset.host,
            "port": p.asset.port,
            "database_name": p.asset.database_name,
            "scheme": p.asset.scheme,
            "asset_class": p.asset.asset_class.value,
        },
        "secret_location": _location_dict(p.secret_location),
        "asset_location": _location_dict(p.asset_location),
        "sink_call_location": _location_dict(p.sink_call_location),
        "similarity_score": p.similarity_score,
    }


def report_to_dict(report: Report) -> dict:
    return {
        "schema_version": report.schema_version,
        "scanned": {
            "files": report.scanned.files,
            "blobs": report.scanned.blobs,
            "commits": report.scanned.commits,
        },
        "pairs": [_pair_dict(p) for p in report.pairs],
        "diagnostics": [
            {
                "severity": d.severity.value,
                "code": d.code,
                "message": d.message,
                "location": _location_dict(d.location),
            }
            for d in report.diagnostics
        ],
    }


def report_from_dict(data: dict) -> Report:
    """Parse an emitted JSON report back into a Report."""

    def loc(d: dict | None) -> SourceLocation | None:
        if d is None:
            return None
        return SourceLocation(d["file_path"], d["line"], d.get("column"), d.get("commit_id"))

    pairs = []
    for p in data.get("pairs", []):
        pairs.append(
            SecretAssetPair(
                kind=DatabaseKind(p["kind"]),
                credential=SecretCredential(
                    password=p["credential"]["password"],
                    username=p["credential"].get("username"),
                ),
                asset=AssetIdentifier(
                    host=p["asset"]["host"],
                    port=p["asset"].get("port"),
                    database_name=p["asset"].get("database_name"),
                    scheme=p["asset"].get("scheme"),
                    asset_class=AssetClass(p["asset"]["asset_class"]),
                ),
                secret_location=loc(p["secret_location"]),
                asset_location=loc(p["asset_location"]),
                method=DetectionMethod(p["method"]),
                similarity_score=p.get("similarity_score"),
                sink_call_location=loc(p.get("sink_call_location")),
            )
        )
    scanned = data.get("scanned", {})
    return Report(
        schema_version=data.get("schema_version", REPORT_SCHEMA_VERSION),
        scanned=ScanCounts(
            files=scanned.get("files", 0),
            blobs=scanned.get("blobs", 0),
            commits=scanned.get("commits", 0),
        ),
        pairs=pairs,
        diagnostics=[
            Diagnostic(
                Severity(d["severity"]), d["code"], d["message"],
                loc(d.get("location")),
            )
            for d in data.get("diagnostics", [])
        ],
    )


def emit_report(report: Report, format: ReportFormat = ReportFormat.JSON) -> bytes:
    """Serialize a report; JSON output is stable-keyed and deterministic."""
    if format is ReportFormat.JSON:
        text = json.dumps(report_to_dict(report), indent=2, sort_keys=True, ensure_ascii=True)
        return (text + "\n").encode("ascii")
    return _emit_text(report).encode("utf-8")


def _emit_text(report: Report) -> str:
    lines = [
        f"scanned {report.scanned.files} files "
        f"({report.scanned.blobs} distinct blobs, {report.scanned.commits} commits)",
        f"secret-asset pairs: {len(report.pairs)}",
    ]
    by_file: dict[str, list[SecretAssetPair]] = {}
    for p in report.pairs:
        by_file.setdefault(p.secret_location.file_path, []).append(p)
    for path in sorted(by_file):
        lines.append("")
        lines.append(path)
        for p in by_file[path]:
            asset = p.asset.host
            if p.asset.port:
                asset += f":{p.asset.port}"
            if p.asset.database_name:
                asset += f"/{p.asset.database_name}"
            user = p.credential.username or "-"
            extra = ""
            if p.similarity_score is not None:
                extra = f" similarity={p.similarity_score:.3f}"
            if p.sink_call_location is not None:
                extra = (
                    f" sink={p.sink_call_location.file_path}:{p.sink_call_location.line}"
                )
            lines.append(
                f"  [{p.asset.asset_class.value}] {p.kind.value} {p.method.value} "
                f"line {p.secret_location.line}: user={user} password={p.credential.password} "
                f"-> {asset} (asset at {p.asset_location.file_path}:{p.asset_location.line})"
                + extra
            )
    if report.diagnostics:
        lines.append("")
        lines.append(f"diagnostics: {len(report.diagnostics)}")
        for d in report.diagnostics:
            where = ""
            if d.location is not None:
                where = f" [{d.location.file_path}:{d.location.line}]"
            lines.append(f"  {d.severity.value} {d.code}: {d.message}{where}")
    return "\n".join(lines) + "\n"


# --- evaluation --------------------------------------------------------------


@dataclass(frozen=True)
class MetricRow:
    tp: int
    fp: int
    fn: int
    precision: float
    recall: float
    f1: float


@dataclass
class EvalResult:
    per_kind: dict[str, MetricRow]
    overall: MetricRow


def metrics_from_counts(tp: int, fp: int, fn: int) -> MetricRow:
    """precision = tp/(tp+fp), recall = tp/(tp+fn), f1 = harmonic mean;
    all 0 when their denominator is 0."""
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return MetricRow(tp=tp, fp=fp, fn=fn, precision=precision, recall=recall, f1=f1)


@dataclass(frozen=True)
class TruthRecord:
    key: tuple
    kind: str


def load_truth(path: str) -> list[TruthRecord]:
    """Ground truth: a JSON document with a 'pairs' list whose records
    mirror the identity key fields plus the database kind."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as e:
        raise SchemaError(f"ground truth: {e}") from e
    if not isinstance(data, dict) or data.get("schema_version") != TRUTH_SCHEMA_VERSION:
        raise SchemaError(f"ground truth: expected schema_version {TRUTH_SCHEMA_VERSION!r}")
    records = []
    seen = set()
    for i, rec in enumerate(data.get("pairs", []), start=1):
        try:
            key = (
                rec["password"],
                rec.get("username"),
                rec["host"],
                rec.get("port"),
                rec["file_path"],
                rec["line"],
            )
            kind = rec["kind"]
        except (KeyError, TypeError) as e:
            raise SchemaError(f"truth record {i}: missing field {e}") from e
        if kind not in {k.value for k in DatabaseKind}:
            raise SchemaError(f"truth record {i}: unknown kind {kind!r}")
        if key in seen:
            raise SchemaError(f"truth record {i}: duplicate identity key")
        seen.add(key)
        records.append(TruthRecord(key=key, kind=kind))
    return records


def evaluate(report: Report, truth_path: str) -> EvalResult:
    """Compare a report against labeled ground truth on identity keys."""
    truth = load_truth(truth_path)
    truth_by_key = {t.key: t for t in truth}
    counts: dict[str, dict[str, int]] = {}

    def bump(kind: str, what: str) -> None:
        counts.setdefault(kind, {"tp": 0, "fp": 0, "fn": 0})[what] += 1

    reported_keys = set()
    for pair in report.pairs:
        key = pair_identity(pair)
        reported_keys.add(key)
        hit = truth_by_key.get(key)
        if hit is not None:
            bump(hit.kind, "tp")
        else:
            bump(pair.kind.value, "fp")
    for t in truth:
        if t.key not in reported_keys:
            bump(t.kind, "fn")

    per_kind = {
        kind: metrics_from_counts(c["tp"], c["fp"], c["fn"])
        for kind, c in sorted(counts.items())
    }
    overall = metrics_from_counts(
        sum(c["tp"] for c in counts.values()),
        sum(c["fp"] for c in counts.values()),
        sum(c["fn"] for c in counts.values()),
    )
    return EvalResult(per_kind=per_kind, overall=overall)


# --- explain -----------------------------------------------------------------


def explain_rules(catalog: list[SinkSpec] | None = None) -> str:
    """Human-readable summary of grammars, sinks, and heuristic knobs."""
    if catalog is None:
        catalog = load_catalog("builtin")
    lines = ["connection-string grammars:"]
    for rule in compile_rules():
        lines.append(f"  {rule.group.value}: {rule.description}")
        lines.append(
            "    kinds: " + ", ".join(sorted(k.value for k in rule.kinds))
        )
    drivers: dict[str, list[SinkSpec]] = {}
    for spec in catalog:
        drivers.setdefault(spec.driver, []).append(spec)
    lines.append("")
    lines.append(f"data-flow sink catalog ({len(drivers)} drivers, {len(catalog)} sinks):")
    for driver in sorted(drivers, key=str.lower):
        for spec in drivers[driver]:
            roles = []
            for idx, role in spec.positional_roles:
                roles.append(f"arg{idx}={role.value}")
            for name, role in spec.keyword_roles:
                roles.append(f"{name}={role.value}")
            kind = spec.kind.value if spec.kind else "from DSN"
            lines.append(f"  {driver}: {spec.callee_path} [{kind}] {' '.join(roles)}")
    lines.append("")
    lines.append("proximity heuristic:")
    lines.append(
        f"  window: +/-{proximity.DEFAULT_WINDOW} lines around the secret "
        f"(secret's own line included)"
    )
    lines.append(f"  similarity: Jaro-Winkler over full line texts, threshold {proximity.DEFAULT_THRESHOLD}")
    lines.append(f"  IP candidates:  {proximity.IP_CANDIDATE_RE.pattern}")
    lines.append(f"  DNS candidates: {proximity.DNS_CANDIDATE_RE.pattern}")
    return "\n".join(lines) + "\n"
