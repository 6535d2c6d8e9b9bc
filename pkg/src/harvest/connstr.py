"""Connection-string detection and structural parsing.

Three grammar families cover the database connection strings seen in
source code:

* UriFamily   -- ``scheme://[user[:password]@]host[:port][/db]`` for the
  mysql/mysqlx, postgres/postgresql and mongodb/mongodb+srv schemes.
* KeyValueFamily -- ODBC / OLE-DB ``Key=Value;`` runs
  (``Driver={SQL Server};Server=10.1.2.3;Uid=sa;Pwd=x;``).
* Jdbc        -- ``jdbc:<scheme>://...`` with credentials either before
  the host or in trailing parameters.

Named capturing groups split the credential from the server part of each
match. A match without a password never becomes a pair.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace
from enum import Enum
from urllib.parse import unquote

from .model import (
    AssetClass,
    DatabaseKind,
    DetectionMethod,
    Diagnostic,
    SecretAssetPair,
    SecretCredential,
    Severity,
    SourceLocation,
    make_asset,
)


class RuleGroup(Enum):
    URI_FAMILY = "UriFamily"
    KEY_VALUE_FAMILY = "KeyValueFamily"
    JDBC = "Jdbc"


class ConnStringError(Exception):
    """A matched connection string could not be parsed into a pair."""


class NoPassword(ConnStringError):
    """Match carries no (non-empty) password; silently yields nothing."""


class InvalidPort(ConnStringError):
    pass


class MissingServer(ConnStringError):
    pass


class PlaceholderHost(ConnStringError):
    def __init__(self, host: str):
        super().__init__(f"host is an unresolved placeholder: {host}")
        self.host = host


@dataclass(frozen=True)
class ConnStringRule:
    group: RuleGroup
    pattern: re.Pattern
    kinds: frozenset[DatabaseKind]
    description: str


@dataclass(frozen=True)
class ParsedConnString:
    kind: DatabaseKind
    credential: SecretCredential
    asset: "object"  # AssetIdentifier; typed loosely to avoid import cycle noise
    raw: str
    span: tuple[int, int] = (0, 0)
    notes: tuple[str, ...] = ()


_HOST_CHARS = r"""(?:\[[0-9A-Fa-f:.]+\]|[^\s@/?#,"'`;()])+"""

_URI_PATTERN = re.compile(
    r"""
    (?<![\w+.@-])
    (?<!jdbc:)
    (?P<dbms>mongodb\+srv|mongodb|mysqlx|mysql|postgresql|postgres)
    ://
    (?:(?P<credentials>[^\s@/]+)@)?
    (?P<server>{host})
    (?P<morehosts>(?:,{host})*)
    (?:/(?P<db>[^\s?\#"'`;]*))?
    (?:\?(?P<query>[^\s"'`]*))?
    """.format(host=_HOST_CHARS),
    re.VERBOSE,
)

# Key=Value runs: recognized keys keep named captures, unknown keys are
# allowed mid-run so "Trusted_Connection=yes;" does not break a match.
_KV_VAL = r"""(?:\{[^{}\n]*\}|[^;{}"'`\n]*?)"""
_KV_PATTERN = re.compile(
    r"""
    (?<![\w=])
    (?:
      (?:
          (?:Driver|Provider)\s*=\s*(?P<dbms>{val})
        | (?:Data\s*Source|Server|Address)\s*=\s*(?P<server>{val})
        | (?:Initial\s*Catalog|Database)\s*=\s*(?P<db>{val})
        | (?:Uid|User\s*Id|Username|User)\s*=\s*(?P<user>{val})
        | (?:Pwd|Password)\s*=\s*(?P<credentials>{val})
        | Port\s*=\s*(?P<port>{val})
        | [A-Za-z][A-Za-z0-9 _.]*\s*=\s*{val}
      )
      \s*(?:;\s*|(?=["'`\n]|$))
    ){{2,}}
    """.format(val=_KV_VAL),
    re.VERBOSE | re.IGNORECASE,
)

_JDBC_PATTERN = re.compile(
    r"""
    \bjdbc:
    (?P<dbms>[A-Za-z][A-Za-z0-9.+-]*(?::[A-Za-z][A-Za-z0-9.+-]*)*?)
    ://
    (?:(?P<credentials>[^\s@/;,?#]+)@)?
    (?P<server>{host})
    (?P<morehosts>(?:,{host})*)
    (?:/(?P<db>[^\s?;\#"'`]*))?
    (?P<params>(?:[;?][^\s"'`]*)?)
    """.format(host=_HOST_CHARS),
    re.VERBOSE,
)

_URI_KINDS = {
    "mysql": DatabaseKind.MYSQL,
    "mysqlx": DatabaseKind.MYSQL,
    "postgres": DatabaseKind.POSTGRESQL,
    "postgresql": DatabaseKind.POSTGRESQL,
    "mongodb": DatabaseKind.MONGODB,
    "mongodb+srv": DatabaseKind.MONGODB,
}


def compile_rules() -> list[ConnStringRule]:
    """The three rule groups, in the precedence order used for scanning."""
    return [
        ConnStringRule(
            RuleGroup.JDBC,
            _JDBC_PATTERN,
            frozenset(DatabaseKind) - {DatabaseKind.UNKNOWN, DatabaseKind.GENERIC_ODBC},
            'jdbc:<scheme>://[user:password@]host[:port][/db][?user=..&password=..] '
            "(credentials before the host win over parameter credentials)",
        ),
        ConnStringRule(
            RuleGroup.URI_FAMILY,
            _URI_PATTERN,
            frozenset({DatabaseKind.MYSQL, DatabaseKind.POSTGRESQL, DatabaseKind.MONGODB}),
            "scheme://[user[:password]@]host[:port][/db] for schemes "
            "mysql, mysqlx, postgres, postgresql, mongodb, mongodb+srv",
        ),
        ConnStringRule(
            RuleGroup.KEY_VALUE_FAMILY,
            _KV_PATTERN,
            frozenset(
                {
                    DatabaseKind.SQLSERVER,
                    DatabaseKind.MYSQL,
                    DatabaseKind.POSTGRESQL,
                    DatabaseKind.GENERIC_ODBC,
                }
            ),
            "ODBC/OLE-DB Key=Value; runs with keys Driver/Provider, Server or "
            "Data Source, Database or Initial Catalog, Uid or User ID, "
            "Pwd or Password, Port (case-insensitive, {braced} values allowed)",
        ),
    ]


def _split_host_port(entry: str) -> tuple[str, int | None]:
    entry = entry.strip()
    if entry.startswith("["):
        close = entry.find("]")
        if close >= 0:
            host = entry[: close + 1]
            rest = entry[close + 1 :]
            if rest.startswith(":") and rest[1:].isdigit():
                return host, _check_port(rest[1:])
            return host, None
    head, sep, tail = entry.rpartition(":")
    if sep and tail.isdigit() and head:
        return head, _check_port(tail)
    return entry, None


def _check_port(digits: str) -> int:
    port = int(digits)
    if not 1 <= port <= 65535:
        raise InvalidPort(f"port {port} out of range [1, 65535]")
    return port


def _host_or_placeholder(host: str) -> str:
    from .model import classify_asset

    if classify_asset(host) is AssetClass.PLACEHOLDER:
        raise PlaceholderHost(host)
    return host


def _split_credentials(blob: str | None) -> tuple[str | None, str | None]:
    if not blob:
        return None, None
    user, sep, password = blob.partition(":")
    if not sep:
        return unquote(user) or None, None
    return unquote(user) or None, unquote(password) or None


def parse_uri_connstring(s: str) -> ParsedConnString:
    """Parse a UriFamily match into credential and asset parts.

    Userinfo is percent-decoded; comma-separated multi-host lists keep the
    first host and note the rest; the path segment becomes the database
    name. Raises NoPassword / InvalidPort / PlaceholderHost.
    """
    m = _URI_PATTERN.search(s)
    if m is None:
        raise ConnStringError(f"not a URI-family connection string: {s!r}")
    scheme = m.group("dbms")
    kind = _URI_KINDS[scheme]
    username, password = _split_credentials(m.group("credentials"))

    hosts = [m.group("server")] + [h for h in (m.group("morehosts") or "").split(",") if h]
    notes = []
    if len(hosts) > 1:
        notes.append("additional hosts ignored: " + ", ".join(h.split(":")[0] for h in hosts[1:]))
    host, port = _split_host_port(hosts[0])
    host = _host_or_placeholder(host)
    if not password:
        raise NoPassword(s)

    db = unquote(m.group("db")) if m.group("db") else None
    return ParsedConnString(
        kind=kind,
        credential=SecretCredential(password=password, username=username),
        asset=make_asset(host, port=port, database_name=db or None, scheme=scheme),
        raw=m.group(0),
        notes=tuple(notes),
    )


def _strip_braces(value: str) -> str:
    value = value.strip()
    if value.startswith("{") and value.endswith("}") and len(value) >= 2:
        return value[1:-1].strip()
    return value


def _kv_entries(run: str) -> dict[str, str]:
    entries: dict[str, str] = {}
    for segment in run.split(";"):
        key, sep, value = segment.partition("=")
        if not sep:
            continue
        key = " ".join(key.strip().lower().split())
        if key and key not in entries:
            entries[key] = _strip_braces(value)
    return entries


_KV_DRIVER_KINDS = (
    ("mysql", DatabaseKind.MYSQL),
    ("postgres", DatabaseKind.POSTGRESQL),
    ("sql server", DatabaseKind.SQLSERVER),
    ("sqlserver", DatabaseKind.SQLSERVER),
    ("mongo", DatabaseKind.MONGODB),
)


def parse_kv_connstring(s: str) -> ParsedConnString:
    """Parse an ODBC/OLE-DB Key=Value; run.

    Keys match case-insensitively, values are trimmed and {braces} are
    stripped. The Server / Data Source value may embed a port after a
    comma or colon. Raises MissingServer when no server key is present.
    """
    m = _KV_PATTERN.search(s)
    if m is None:
        raise ConnStringError(f"not a key-value connection string: {s!r}")
    entries = _kv_entries(m.group(0))

    password = entries.get("pwd") or entries.get("password")
    if not password:
        raise NoPassword(s)
    server = entries.get("server") or entries.get("data source") or entries.get("address")
    if not server:
        raise MissingServer(s)

    port: int | None = None
    for sep in (",", ":"):
        if sep in server:
            head, _, tail = server.rpartition(sep)
            if tail.isdigit() and head:
                server, port = head.strip(), _check_port(tail)
            break
    if entries.get("port", "").isdigit():
        port = _check_port(entries["port"])
    host = _host_or_placeholder(server)

    driver = entries.get("driver") or entries.get("provider") or ""
    kind = DatabaseKind.GENERIC_ODBC
    for needle, mapped in _KV_DRIVER_KINDS:
        if needle in driver.lower():
            kind = mapped
            break

    username = entries.get("uid") or entries.get("user id") or entries.get("username") or entries.get("user")
    db = entries.get("database") or entries.get("initial catalog")
    return ParsedConnString(
        kind=kind,
        credential=SecretCredential(password=password, username=username or None),
        asset=make_asset(host, port=port, database_name=db or None),
        raw=m.group(0),
    )


def _jdbc_kind(subscheme: str) -> DatabaseKind:
    low = subscheme.lower()
    if "mysql" in low:
        return DatabaseKind.MYSQL
    if "postgres" in low:
        return DatabaseKind.POSTGRESQL
    if "sqlserver" in low:
        return DatabaseKind.SQLSERVER
    if "mongo" in low:
        return DatabaseKind.MONGODB
    return DatabaseKind.GENERIC_JDBC


def parse_jdbc_connstring(s: str) -> ParsedConnString:
    """Parse a JDBC URL; credentials before the host win over parameters."""
    m = _JDBC_PATTERN.search(s)
    if m is None:
        raise ConnStringError(f"not a JDBC connection string: {s!r}")
    username, password = _split_credentials(m.group("credentials"))

    if password is None:
        params: dict[str, str] = {}
        for chunk in re.split(r"[;&?]", (m.group("params") or "").lstrip(";?")):
            key, sep, value = chunk.partition("=")
            if sep and key:
                params.setdefault(key.strip().lower(), value.strip())
        if username is None:
            username = unquote(params["user"]) if params.get("user") else None
            if username is None and params.get("username"):
                username = unquote(params["username"])
        if params.get("password"):
            password = unquote(params["password"])

    hosts = [m.group("server")] + [h for h in (m.group("morehosts") or "").split(",") if h]
    notes = []
    if len(hosts) > 1:
        notes.append("additional hosts ignored: " + ", ".join(h.split(":")[0] for h in hosts[1:]))
    host, port = _split_host_port(hosts[0])
    host = _host_or_placeholder(host)
    if not password:
        raise NoPassword(s)

    db = m.group("db") or None
    return ParsedConnString(
        kind=_jdbc_kind(m.group("dbms")),
        credential=SecretCredential(password=password, username=username),
        asset=make_asset(host, port=port, database_name=db, scheme="jdbc:" + m.group("dbms")),
        raw=m.group(0),
        notes=tuple(notes),
    )


_PARSERS = {
    RuleGroup.JDBC: parse_jdbc_connstring,
    RuleGroup.URI_FAMILY: parse_uri_connstring,
    RuleGroup.KEY_VALUE_FAMILY: parse_kv_connstring,
}


def parse_connection_string(s: str) -> ParsedConnString:
    """Parse a bare string through the three grammars (JDBC, URI, KV order).

    Used for DSN values handed over by the data-flow stage. Raises the
    same errors as the individual parsers; ConnStringError when no
    grammar matches at all.
    """
    for rule in compile_rules():
        if rule.pattern.search(s):
            return _PARSERS[rule.group](s)
    raise ConnStringError(f"no connection-string grammar matches: {s!r}")


def _overlaps(span: tuple[int, int], taken: list[tuple[int, int]]) -> bool:
    return any(span[0] < end and start < span[1] for start, end in taken)


def _group_start(m: re.Match, name: str) -> int:
    # column of the capture when it participated, else of the whole match
    return m.start(name) if m.group(name) else m.start()


def scan_text(
    content: str,
    ctx: SourceLocation,
    diagnostics: list[Diagnostic] | None = None,
) -> list[SecretAssetPair]:
    """Scan text content line by line for connection-string pairs.

    ``ctx`` supplies the file path and commit id; line numbers come from
    the match offsets. Matches without a password yield nothing; matches
    with a placeholder host yield only a diagnostic; other malformed
    matches are skipped with a diagnostic.
    """
    rules = compile_rules()
    pairs: list[SecretAssetPair] = []
    sink = diagnostics if diagnostics is not None else []

    for lineno, line in enumerate(content.splitlines(), start=1):
        taken: list[tuple[int, int]] = []
        for rule in rules:
            for m in rule.pattern.finditer(line):
                if _overlaps(m.span(), taken):
                    continue
                taken.append(m.span())
                loc = SourceLocation(
                    file_path=ctx.file_path,
                    line=lineno,
                    column=m.start() + 1,
                    commit_id=ctx.commit_id,
                )
                try:
                    parsed = _PARSERS[rule.group](m.group(0))
                except NoPassword:
                    continue
                except PlaceholderHost as e:
                    sink.append(
                        Diagnostic(
                            Severity.INFO,
                            "placeholder-host",
                            f"connection string host is a template placeholder: {e.host}",
                            loc,
                        )
                    )
                    continue
                except ConnStringError as e:
                    sink.append(
                        Diagnostic(Severity.WARNING, "malformed-connstring", str(e), loc)
                    )
                    continue
                parsed = replace(parsed, span=m.span())
                for note in parsed.notes:
                    sink.append(Diagnostic(Severity.INFO, "multi-host", note, loc))

                cred_start = _group_start(m, "credentials")
                asset_start = _group_start(m, "server")
                pairs.append(
                    SecretAssetPair(
                        kind=parsed.kind,
                        credential=parsed.credential,
                        asset=parsed.asset,
                        secret_location=SourceLocation(
                            ctx.file_path, lineno, cred_start + 1, ctx.commit_id
                        ),
                        asset_location=SourceLocation(
                            ctx.file_path, lineno, asset_start + 1, ctx.commit_id
                        ),
                        method=DetectionMethod.PATTERN_MATCH,
                    )
                )
    return pairs
