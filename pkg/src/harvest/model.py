"""Shared domain types for secret-asset pair detection.

A *secret-asset pair* is a database credential together with the asset
identifier (host, port, database name) it protects, plus the source
locations of both halves and the detection method that found them.
This module also owns host sensitivity classification and the
deterministic merge/dedup step that combines the three detector stages.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum


class DatabaseKind(Enum):
    MYSQL = "MySQL"
    POSTGRESQL = "PostgreSQL"
    MONGODB = "MongoDB"
    SQLSERVER = "SQLServer"
    GENERIC_ODBC = "GenericODBC"
    GENERIC_JDBC = "GenericJDBC"
    UNKNOWN = "Unknown"


class AssetClass(Enum):
    LOOPBACK = "Loopback"
    PRIVATE_RANGE = "PrivateRange"
    PUBLIC_IP = "PublicIP"
    DNS_NAME = "DnsName"
    PLACEHOLDER = "Placeholder"


class DetectionMethod(Enum):
    PATTERN_MATCH = "PatternMatch"
    DATA_FLOW = "DataFlow"
    PROXIMITY_HEURISTIC = "ProximityHeuristic"


# Survivor selection on duplicate pairs: data flow wins over pattern
# matching, which wins over the neighboring-lines heuristic.
METHOD_PRECEDENCE = {
    DetectionMethod.DATA_FLOW: 3,
    DetectionMethod.PATTERN_MATCH: 2,
    DetectionMethod.PROXIMITY_HEURISTIC: 1,
}

# Template markers that mean "this host is a variable, not a real asset":
# ${var}, {{var}}, <var>, {var}, %(var)s, %s, $VAR.
_PLACEHOLDER_RE = re.compile(
    r"\$\{[^}]*\}|\{\{[^}]*\}\}|<[^<>]*>|\{[A-Za-z_]\w*\}|%\(\w+\)s?|%[sdv]\b|^\$\w+$"
)

_HEX40_RE = re.compile(r"^[0-9a-f]{40}$")


class Severity(Enum):
    INFO = "info"
    WARNING = "warning"
    ERROR = "error"


@dataclass(frozen=True)
class SourceLocation:
    """A position in the scanned repository.

    ``commit_id`` is absent when scanning a working tree. Paths are
    repository-relative, forward-slashed, and may not escape the root.
    """

    file_path: str
    line: int
    column: int | None = None
    commit_id: str | None = None

    def __post_init__(self) -> None:
        if self.line < 1:
            raise ValueError(f"line must be >= 1, got {self.line}")
        if self.column is not None and self.column < 1:
            raise ValueError(f"column must be >= 1, got {self.column}")
        if "\\" in self.file_path or self.file_path.startswith("/"):
            raise ValueError(f"file_path must be relative with forward slashes: {self.file_path!r}")
        if ".." in self.file_path.split("/"):
            raise ValueError(f"file_path escapes the repository root: {self.file_path!r}")
        if self.commit_id is not None and not _HEX40_RE.match(self.commit_id):
            raise ValueError(f"commit_id must be 40 lowercase hex chars: {self.commit_id!r}")


@dataclass(frozen=True)
class Diagnostic:
    """A non-fatal finding about the scan itself (skips, partial matches)."""

    severity: Severity
    code: str
    message: str
    location: SourceLocation | None = None


@dataclass(frozen=True)
class SecretCredential:
    password: str
    username: str | None = None

    def __post_init__(self) -> None:
        if not self.password:
            raise ValueError("password must be non-empty")


def classify_asset(host: str) -> AssetClass:
    """Classify a host string by how sensitive the asset behind it is.

    Loopback and RFC-1918 addresses are reachable only locally; a public
    IP or DNS name points at an asset an outside attacker could reach;
    a templated host (``${...}``, ``{{...}}``, ``<...>``) is not a real
    asset at all.
    """
    if not host or any(ch.isspace() for ch in host):
        raise ValueError(f"host must be non-empty without whitespace: {host!r}")
    if _PLACEHOLDER_RE.search(host) or any(ch in host for ch in "{}<>"):
        return AssetClass.PLACEHOLDER
    bare = host[1:-1] if host.startswith("[") and host.endswith("]") else host
    if bare.lower() == "localhost":
        return AssetClass.LOOPBACK
    octets = _parse_ipv4(bare)
    if octets is not None:
        a, b = octets[0], octets[1]
        if a == 127:
            return AssetClass.LOOPBACK
        if a == 10 or (a == 172 and 16 <= b <= 31) or (a == 192 and b == 168):
            return AssetClass.PRIVATE_RANGE
        return AssetClass.PUBLIC_IP
    if ":" in bare:
        cls = _classify_ipv6(bare)
        if cls is not None:
            return cls
    return AssetClass.DNS_NAME


def _parse_ipv4(s: str) -> tuple[int, int, int, int] | None:
    parts = s.split(".")
    if len(parts) != 4:
        return None
    octets = []
    for p in parts:
        if not p.isdigit() or len(p) > 3:
            return None
        v = int(p)
        if v > 255:
            return None
        octets.append(v)
    return tuple(octets)  # type: ignore[return-value]


def _classify_ipv6(s: str) -> AssetClass | None:
    import ipaddress

    try:
        addr = ipaddress.IPv6Address(s)
    except ValueError:
        return None
    if addr.is_loopback:
        return AssetClass.LOOPBACK
    if addr.is_private:
        return AssetClass.PRIVATE_RANGE
    return AssetClass.PUBLIC_IP


@dataclass(frozen=True)
class AssetIdentifier:
    """Host/port/database-name triple locating a database asset."""

    host: str
    port: int | None = None
    database_name: str | None = None
    scheme: str | None = None
    asset_class: AssetClass = AssetClass.DNS_NAME

    def __post_init__(self) -> None:
        if not self.host or any(ch.isspace() for ch in self.host):
            raise ValueError(f"host must be non-empty without whitespace: {self.host!r}")
        if self.port is not None and not 1 <= self.port <= 65535:
            raise ValueError(f"port out of range: {self.port}")
        expected = classify_asset(self.host)
        if self.asset_class is not expected:
            raise ValueError(
                f"asset_class {self.asset_class.value} inconsistent with host "
                f"{self.host!r} (expected {expected.value})"
            )


def make_asset(
    host: str,
    port: int | None = None,
    database_name: str | None = None,
    scheme: str | None = None,
) -> AssetIdentifier:
    """Build an AssetIdentifier with the sensitivity class derived from the host."""
    return AssetIdentifier(
        host=host,
        port=port,
        database_name=database_name,
        scheme=scheme,
        asset_class=classify_asset(host),
    )


@dataclass(frozen=True)
class SecretAssetPair:
    kind: DatabaseKind
    credential: SecretCredential
    asset: AssetIdentifier
    secret_location: SourceLocation
    asset_location: SourceLocation
    method: DetectionMethod
    similarity_score: float | None = None
    sink_call_location: SourceLocation | None = None

    def __post_init__(self) -> None:
        if self.method is DetectionMethod.PROXIMITY_HEURISTIC:
            if self.similarity_score is None:
                raise ValueError("heuristic pairs must carry a similarity_score")
            # With the default 0.5 threshold every emitted score is >= 0.5;
            # the type itself only constrains the metric's range so a
            # lowered threshold knob cannot crash pair construction.
            if not 0.0 <= self.similarity_score <= 1.0:
                raise ValueError(f"similarity_score out of range: {self.similarity_score}")
        elif self.similarity_score is not None:
            raise ValueError("similarity_score is only valid for heuristic pairs")
        if self.method is DetectionMethod.DATA_FLOW:
            if self.sink_call_location is None:
                raise ValueError("data-flow pairs must carry a sink_call_location")
        elif self.sink_call_location is not None:
            raise ValueError("sink_call_location is only valid for data-flow pairs")


PairKey = tuple[str, "str | None", str, "int | None", str, int]


def pair_identity(pair: SecretAssetPair) -> PairKey:
    """Canonical duplicate key for a pair.

    Two pairs are duplicates when the same credential protects the same
    host:port and the secret sits at the same file and line. The asset
    line is deliberately excluded: the same asset can be referenced from
    afar by several stages, and pairs are counted by secret occurrence.
    """
    return (
        pair.credential.password,
        pair.credential.username,
        pair.asset.host,
        pair.asset.port,
        pair.secret_location.file_path,
        pair.secret_location.line,
    )


def _output_sort_key(p: SecretAssetPair):
    return (
        p.secret_location.file_path,
        p.secret_location.line,
        p.credential.password,
        p.credential.username or "",
        p.asset.host,
        p.asset.port or 0,
    )


def _survivor_sort_key(p: SecretAssetPair):
    # Highest method precedence first, then a total deterministic order
    # over the remaining fields so input permutations cannot matter.
    return (
        -METHOD_PRECEDENCE[p.method],
        p.asset_location.file_path,
        p.asset_location.line,
        p.kind.value,
        p.asset.database_name or "",
        p.asset.scheme or "",
        p.similarity_score or 0.0,
    )


def merge_pairs(pairs: list[SecretAssetPair]) -> list[SecretAssetPair]:
    """Deduplicate pairs found by multiple stages.

    Exactly one pair survives per identity key, chosen by method
    precedence (DataFlow > PatternMatch > ProximityHeuristic) with
    deterministic tie-breaking. Output is sorted by
    (file_path, line, password); the function is idempotent and
    insensitive to input order.
    """
    groups: dict[PairKey, list[SecretAssetPair]] = {}
    for p in pairs:
        groups.setdefault(pair_identity(p), []).append(p)
    survivors = [sorted(g, key=_survivor_sort_key)[0] for g in groups.values()]
    return sorted(survivors, key=_output_sort_key)
