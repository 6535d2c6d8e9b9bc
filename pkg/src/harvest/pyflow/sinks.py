"""Database-driver sink catalog.

Which functions receive credentials, and through which parameters, is
data rather than engine code: the shipped catalogs are YAML documents
packaged with the scanner, and any external catalog with the same schema
can be swapped in without a code change.

Schema (one record per sink)::

    version: 1
    sinks:
      - driver: asyncpg            # human name, used in reports
        callee: asyncpg.connect    # dotted call path after import resolution
        kind: PostgreSQL           # optional; required if host+password bound
        positional:                # parameter index -> role
          0: dsn
        keywords:                  # parameter name -> role
          host: host
          user: username
          password: password

Roles: username, password, host, port, database_name (alias database),
dsn. A ``dsn``-role value is a whole connection string and is handed to
the connection-string parsers.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from importlib import resources

import yaml

from ..model import DatabaseKind
from .propagate import CallSite


class Role(Enum):
    USERNAME = "Username"
    PASSWORD = "Password"
    HOST = "Host"
    PORT = "Port"
    DATABASE_NAME = "DatabaseName"
    DSN = "Dsn"


_ROLE_NAMES = {
    "username": Role.USERNAME,
    "user": Role.USERNAME,
    "password": Role.PASSWORD,
    "host": Role.HOST,
    "port": Role.PORT,
    "database_name": Role.DATABASE_NAME,
    "database": Role.DATABASE_NAME,
    "dsn": Role.DSN,
}

_KIND_NAMES = {k.value: k for k in DatabaseKind}

BUILTIN_CATALOG = "builtin"
PAPER_COMPAT_CATALOG = "paper-compat"


class CatalogError(Exception):
    """Sink catalog file is malformed; message carries file:line."""


@dataclass(frozen=True)
class SinkSpec:
    driver: str
    callee_path: str
    positional_roles: tuple[tuple[int, Role], ...] = ()
    keyword_roles: tuple[tuple[str, Role], ...] = ()
    kind: DatabaseKind | None = None

    def __post_init__(self) -> None:
        if not self.positional_roles and not self.keyword_roles:
            raise ValueError(f"sink {self.callee_path} has no role bindings")

    @property
    def positional_map(self) -> dict[int, Role]:
        return dict(self.positional_roles)

    @property
    def keyword_map(self) -> dict[str, Role]:
        return dict(self.keyword_roles)

    @property
    def dsn_role(self) -> int | str | None:
        """Parameter (position or name) that takes a whole connection string."""
        for idx, role in self.positional_roles:
            if role is Role.DSN:
                return idx
        for name, role in self.keyword_roles:
            if role is Role.DSN:
                return name
        return None


def _mark(node: yaml.Node) -> int:
    return node.start_mark.line + 1


def _expect_mapping(node: yaml.Node, what: str, source: str) -> list[tuple[yaml.Node, yaml.Node]]:
    if not isinstance(node, yaml.MappingNode):
        raise CatalogError(f"{source}:{_mark(node)}: {what} must be a mapping")
    return node.value


def _scalar(node: yaml.Node, what: str, source: str) -> str:
    if not isinstance(node, yaml.ScalarNode):
        raise CatalogError(f"{source}:{_mark(node)}: {what} must be a scalar")
    return node.value


def _parse_role(node: yaml.Node, source: str) -> Role:
    text = _scalar(node, "role", source).strip().lower()
    if text not in _ROLE_NAMES:
        raise CatalogError(
            f"{source}:{_mark(node)}: unknown role {text!r} "
            f"(expected one of {sorted(set(_ROLE_NAMES))})"
        )
    return _ROLE_NAMES[text]


def parse_catalog(text: str, source: str = "<catalog>") -> list[SinkSpec]:
    """Parse and validate a catalog document; raises CatalogError."""
    try:
        root = yaml.compose(text)
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        line = mark.line + 1 if mark else 1
        raise CatalogError(f"{source}:{line}: {e}") from e
    if root is None:
        raise CatalogError(f"{source}:1: empty catalog")

    sinks_node = None
    for key_node, value_node in _expect_mapping(root, "catalog", source):
        if key_node.value == "sinks":
            sinks_node = value_node
    if sinks_node is None or not isinstance(sinks_node, yaml.SequenceNode):
        raise CatalogError(f"{source}:{_mark(root)}: catalog must contain a 'sinks' sequence")

    specs: list[SinkSpec] = []
    seen_callees: set[str] = set()
    for entry in sinks_node.value:
        line = _mark(entry)
        fields = {k.value: v for k, v in _expect_mapping(entry, "sink entry", source)}
        if "driver" not in fields or "callee" not in fields:
            raise CatalogError(f"{source}:{line}: sink entry needs 'driver' and 'callee'")
        driver = _scalar(fields["driver"], "driver", source)
        callee = _scalar(fields["callee"], "callee", source)
        if callee in seen_callees:
            raise CatalogError(f"{source}:{line}: duplicate callee {callee!r}")
        seen_callees.add(callee)

        kind: DatabaseKind | None = None
        if "kind" in fields:
            kind_text = _scalar(fields["kind"], "kind", source)
            if kind_text not in _KIND_NAMES:
                raise CatalogError(
                    f"{source}:{_mark(fields['kind'])}: unknown kind {kind_text!r}"
                )
            kind = _KIND_NAMES[kind_text]

        positional: list[tuple[int, Role]] = []
        if "positional" in fields:
            for k, v in _expect_mapping(fields["positional"], "positional", source):
                idx_text = _scalar(k, "positional index", source)
                if not idx_text.isdigit():
                    raise CatalogError(
                        f"{source}:{_mark(k)}: positional index must be a non-negative integer"
                    )
                positional.append((int(idx_text), _parse_role(v, source)))
        keywords: list[tuple[str, Role]] = []
        if "keywords" in fields:
            for k, v in _expect_mapping(fields["keywords"], "keywords", source):
                keywords.append((_scalar(k, "keyword name", source), _parse_role(v, source)))

        roles = {r for _, r in positional} | {r for _, r in keywords}
        if not roles:
            raise CatalogError(f"{source}:{line}: sink {callee!r} binds no roles")
        if Role.HOST in roles and Role.PASSWORD in roles and kind is None:
            raise CatalogError(
                f"{source}:{line}: sink {callee!r} binds host and password "
                "and therefore needs an explicit 'kind'"
            )
        specs.append(
            SinkSpec(
                driver=driver,
                callee_path=callee,
                positional_roles=tuple(positional),
                keyword_roles=tuple(keywords),
                kind=kind,
            )
        )
    if not specs:
        raise CatalogError(f"{source}:1: catalog contains no sinks")
    return specs


def _load_packaged(name: str) -> list[SinkSpec]:
    text = resources.files("harvest").joinpath(f"catalogs/{name}.yaml").read_text("utf-8")
    return parse_catalog(text, source=f"{name}.yaml")


def builtin_catalog() -> list[SinkSpec]:
    return _load_packaged("builtin")


def load_catalog(name_or_path: str) -> list[SinkSpec]:
    """Load a catalog by name ('builtin', 'paper-compat') or file path."""
    if name_or_path == BUILTIN_CATALOG:
        return _load_packaged("builtin")
    if name_or_path == PAPER_COMPAT_CATALOG:
        return _load_packaged("paper-compat")
    try:
        with open(name_or_path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        raise CatalogError(f"{name_or_path}: {e}") from e
    return parse_catalog(text, source=name_or_path)


def find_sink_calls(
    call_sites: list[CallSite], catalog: list[SinkSpec]
) -> list[tuple[CallSite, SinkSpec]]:
    """Call sites whose resolved dotted callee matches a catalog entry."""
    by_callee = {spec.callee_path: spec for spec in catalog}
    return [
        (site, by_callee[site.callee]) for site in call_sites if site.callee in by_callee
    ]
