"""Neighboring-lines heuristic: pair leftover secrets with nearby hosts.

Secrets the pattern and data-flow stages could not pair (for example
credentials in comments or in languages the flow engine does not parse)
are matched against IP/DNS candidates within three lines above or below,
ranked by Jaro-Winkler similarity between the secret line and each
candidate line. Related keys tend to share a prefix (``mysql-user`` /
``mysql-password`` / ``mysql-host``), which is exactly what the
Winkler prefix boost rewards. Candidates scoring below 0.5 are dropped.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum

from .model import (
    DatabaseKind,
    DetectionMethod,
    Diagnostic,
    SecretAssetPair,
    SecretCredential,
    Severity,
    SourceLocation,
    make_asset,
)

DEFAULT_WINDOW = 3
DEFAULT_THRESHOLD = 0.5

IP_CANDIDATE_RE = re.compile(r"\b(?:\d{1,3}\.){3}\d{1,3}\b")
DNS_CANDIDATE_RE = re.compile(r"\b[A-Za-z0-9][A-Za-z0-9-.]*\.\D{2,4}\b")

INGEST_SCHEMA_VERSION = "harvest-secrets/1"


class HostHint(Enum):
    IP = "Ip"
    DNS = "Dns"


@dataclass(frozen=True)
class SecretFinding:
    value: str
    location: SourceLocation
    rule_id: str
    source_tool: str

    def __post_init__(self) -> None:
        if not self.value:
            raise ValueError("secret value must be non-empty")


@dataclass(frozen=True)
class AssetCandidate:
    host: str
    line: int
    kind_hint: HostHint
    line_text: str


class SchemaError(Exception):
    """Secrets ingestion file violates the documented schema."""

    def __init__(self, message: str, record: int | None = None):
        where = f"record {record}: " if record is not None else ""
        super().__init__(where + message)
        self.record = record


def jaro(s1: str, s2: str) -> float:
    """Jaro similarity in [0, 1].

    Characters match within a window of floor(max(|s1|,|s2|)/2) - 1;
    with m matches and t mismatched aligned positions the score is
    (m/|s1| + m/|s2| + (m - t/2)/m) / 3. Equal strings score 1, no
    matches score 0.
    """
    if s1 == s2:
        return 1.0
    len1, len2 = len(s1), len(s2)
    if not len1 or not len2:
        return 0.0
    window = max(max(len1, len2) // 2 - 1, 0)
    matched1 = [False] * len1
    matched2 = [False] * len2
    m = 0
    for i, ch in enumerate(s1):
        lo = max(0, i - window)
        hi = min(len2, i + window + 1)
        for j in range(lo, hi):
            if not matched2[j] and s2[j] == ch:
                matched1[i] = True
                matched2[j] = True
                m += 1
                break
    if m == 0:
        return 0.0
    t = 0
    k = 0
    for i in range(len1):
        if matched1[i]:
            while not matched2[k]:
                k += 1
            if s1[i] != s2[k]:
                t += 1
            k += 1
    return (m / len1 + m / len2 + (m - t / 2) / m) / 3.0


def jaro_winkler(s1: str, s2: str, prefix_scale: float = 0.1) -> float:
    """Jaro score boosted by the shared prefix: j + l*p*(1-j), prefix
    length l capped at 4, scale p = 0.1."""
    j = jaro(s1, s2)
    prefix = 0
    for a, b in zip(s1[:4], s2[:4]):
        if a != b:
            break
        prefix += 1
    return j + prefix * prefix_scale * (1.0 - j)


def _valid_ip(text: str) -> bool:
    return all(int(octet) <= 255 for octet in text.split("."))


def candidate_assets(
    lines: list[str], secret_line: int, window: int = DEFAULT_WINDOW
) -> list[AssetCandidate]:
    """IP and DNS candidates within the window around the secret line.

    The secret's own line is included; IP matches with an octet over 255
    are discarded.
    """
    lo = max(1, secret_line - window)
    hi = min(len(lines), secret_line + window)
    out: list[AssetCandidate] = []
    seen: set[tuple[str, int]] = set()
    for lineno in range(lo, hi + 1):
        text = lines[lineno - 1]
        for m in IP_CANDIDATE_RE.finditer(text):
            if _valid_ip(m.group(0)) and (m.group(0), lineno) not in seen:
                seen.add((m.group(0), lineno))
                out.append(AssetCandidate(m.group(0), lineno, HostHint.IP, text))
        for m in DNS_CANDIDATE_RE.finditer(text):
            if (m.group(0), lineno) not in seen:
                seen.add((m.group(0), lineno))
                out.append(AssetCandidate(m.group(0), lineno, HostHint.DNS, text))
    return out


# Commented-out credentials are in scope here: comments never reach the
# data-flow stage, which is exactly when this heuristic earns its keep.
_SECRET_ASSIGN_RE = re.compile(
    r"""^\s*(?:(?:\#+|//+|--|;)\s*)?
        (?P<key>[^=:\#\n]{0,120}?(?:password|passwd|pwd|secret)[\w .-]*?)\s*[:=]\s*
        (?P<quote>["'])(?P<value>[^"']{4,}?)(?P=quote)""",
    re.IGNORECASE | re.VERBOSE,
)

_PLACEHOLDER_VALUE_RE = re.compile(r"^\*+$|\$\{[^}]*\}|\{\{[^}]*\}\}|^<[^<>]*>$|^(?:x{4,}|X{4,})$")


def builtin_detect_secrets(content: str, ctx: SourceLocation) -> list[SecretFinding]:
    """Fallback secret detector for when no external report is supplied.

    Flags assignments whose left side names a password/secret and whose
    right side is a quoted literal of length >= 4 that is not a
    placeholder. Deliberately has no entropy filter: low-entropy
    passwords protect real assets too.
    """
    findings = []
    for lineno, line in enumerate(content.splitlines(), start=1):
        m = _SECRET_ASSIGN_RE.match(line)
        if m is None:
            continue
        value = m.group("value")
        if _PLACEHOLDER_VALUE_RE.search(value):
            continue
        findings.append(
            SecretFinding(
                value=value,
                location=SourceLocation(
                    ctx.file_path, lineno, m.start("value") + 1, ctx.commit_id
                ),
                rule_id="keyword-assignment",
                source_tool="builtin",
            )
        )
    return findings


_ESCAPES = {"\\\\": "\\", "\\t": "\t", "\\n": "\n", "\\r": "\r"}


def _unescape(field: str, record: int) -> str:
    out: list[str] = []
    i = 0
    while i < len(field):
        ch = field[i]
        if ch == "\\":
            pair = field[i : i + 2]
            if pair not in _ESCAPES:
                raise SchemaError(f"invalid escape {pair!r}", record)
            out.append(_ESCAPES[pair])
            i += 2
        else:
            out.append(ch)
            i += 1
    return "".join(out)


def ingest_secrets(path: str) -> list[SecretFinding]:
    """Read an external detectors' findings file.

    Format: first line is the schema version string
    ``harvest-secrets/1``; each following non-empty line is one record of
    five tab-separated fields (tool, rule, path, line, secret value).
    Tabs, newlines and backslashes inside fields are escaped as \\t, \\n,
    \\r and \\\\. Records duplicating (value, path, line) merge into one
    finding. Raises SchemaError with the offending record number.
    """
    with open(path, "r", encoding="utf-8") as fh:
        raw = fh.read()
    lines = raw.splitlines()
    if not lines or lines[0].strip() != INGEST_SCHEMA_VERSION:
        raise SchemaError(f"missing or wrong header (expected {INGEST_SCHEMA_VERSION!r})")
    findings: list[SecretFinding] = []
    seen: set[tuple[str, str, int]] = set()
    for record, line in enumerate(lines[1:], start=1):
        if not line.strip():
            continue
        fields = line.split("\t")
        if len(fields) != 5:
            raise SchemaError(f"expected 5 tab-separated fields, got {len(fields)}", record)
        tool, rule, rel_path, line_text, value = (_unescape(f, record) for f in fields)
        if not line_text.isdigit() or int(line_text) < 1:
            raise SchemaError(f"line must be a positive integer, got {line_text!r}", record)
        if not value:
            raise SchemaError("secret value must be non-empty", record)
        key = (value, rel_path, int(line_text))
        if key in seen:
            continue
        seen.add(key)
        try:
            location = SourceLocation(rel_path, int(line_text))
        except ValueError as e:
            raise SchemaError(str(e), record) from e
        findings.append(
            SecretFinding(value=value, location=location, rule_id=rule, source_tool=tool)
        )
    return findings


def _infer_kind(secret_line: str, asset_line: str) -> DatabaseKind:
    combined = (secret_line + " " + asset_line).lower()
    if "mysql" in combined:
        return DatabaseKind.MYSQL
    if "postgres" in combined:
        return DatabaseKind.POSTGRESQL
    if "mongo" in combined:
        return DatabaseKind.MONGODB
    if "mssql" in combined or "sqlserver" in combined or "sql server" in combined:
        return DatabaseKind.SQLSERVER
    return DatabaseKind.UNKNOWN


def pair_by_proximity(
    finding: SecretFinding,
    lines: list[str],
    window: int = DEFAULT_WINDOW,
    threshold: float = DEFAULT_THRESHOLD,
    diagnostics: list[Diagnostic] | None = None,
) -> SecretAssetPair | None:
    """Pick the most line-similar nearby host for a secret, if any.

    Similarity is Jaro-Winkler over the full secret line and candidate
    line texts; ties break on smaller line distance, then smaller line
    number, then host text. Returns None when no candidate reaches the
    threshold.
    """
    secret_line = finding.location.line
    if secret_line > len(lines):
        if diagnostics is not None:
            diagnostics.append(
                Diagnostic(
                    Severity.WARNING,
                    "finding-out-of-range",
                    f"secret reported at {finding.location.file_path}:{secret_line} "
                    f"but the file has {len(lines)} lines",
                    finding.location,
                )
            )
        return None
    secret_text = lines[secret_line - 1]
    best: tuple[float, int, int, str] | None = None
    best_candidate: AssetCandidate | None = None
    for cand in candidate_assets(lines, secret_line, window):
        if cand.host == finding.value:
            continue
        score = jaro_winkler(secret_text, cand.line_text)
        rank = (-score, abs(cand.line - secret_line), cand.line, cand.host)
        if best is None or rank < best:
            best = rank
            best_candidate = cand
    if best_candidate is None or -best[0] < threshold:
        return None
    score = -best[0]
    return SecretAssetPair(
        kind=_infer_kind(secret_text, best_candidate.line_text),
        credential=SecretCredential(password=finding.value),
        asset=make_asset(best_candidate.host),
        secret_location=finding.location,
        asset_location=SourceLocation(
            finding.location.file_path, best_candidate.line, commit_id=finding.location.commit_id
        ),
        method=DetectionMethod.PROXIMITY_HEURISTIC,
        similarity_score=score,
    )
