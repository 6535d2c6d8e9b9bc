"""Turn matched sink calls into secret-asset pairs.

Arguments are bound to roles through the sink spec; values that reach a
role must resolve to primitive constants, with config-file references
resolved against the workspace first. A pair is emitted only when both
the password and the host resolve (or a DSN does, which carries both).
"""

from __future__ import annotations

import posixpath
from typing import Mapping

from .. import configtree
from ..connstr import (
    ConnStringError,
    NoPassword,
    PlaceholderHost,
    parse_connection_string,
)
from ..model import (
    AssetClass,
    DatabaseKind,
    DetectionMethod,
    Diagnostic,
    SecretAssetPair,
    SecretCredential,
    Severity,
    SourceLocation,
    classify_asset,
    make_asset,
)
from .propagate import STARRED, CallSite
from .sinks import Role, SinkSpec
from .values import Concat, ConfigRef, DictVal, EnvRead, Int, Resolved, Str, concat_values

ConfigCache = dict[str, "configtree.ConfigNode | None"]


def _is_junk(value: object) -> bool:
    # Fragments like ":" or "//" flow out of URL concatenations and are
    # not credentials or hosts.
    return isinstance(value, Str) and bool(value.text) and set(value.text) <= {":", "/"}


class _Bridge:
    """Resolves ConfigRef values against the workspace file mapping."""

    def __init__(self, files: Mapping[str, str], module_path: str,
                 diagnostics: list[Diagnostic], cache: ConfigCache,
                 commit_id: str | None, call_loc: SourceLocation):
        self.files = files
        self.module_dir = posixpath.dirname(module_path)
        self.diagnostics = diagnostics
        self.cache = cache
        self.commit_id = commit_id
        self.call_loc = call_loc

    def _locate(self, ref_file: str) -> str | None:
        candidates = []
        if self.module_dir:
            candidates.append(posixpath.normpath(posixpath.join(self.module_dir, ref_file)))
        candidates.append(posixpath.normpath(ref_file))
        for cand in candidates:
            if not cand.startswith("..") and cand in self.files:
                return cand
        return None

    def _tree(self, path: str) -> "configtree.ConfigNode | None":
        if path in self.cache:
            return self.cache[path]
        fmt = configtree.format_for_path(path)
        tree: configtree.ConfigNode | None = None
        try:
            tree = configtree.load_config(self.files[path], fmt or configtree.ConfigFormat.YAML)
        except configtree.ConfigParseError as e:
            self.diagnostics.append(
                Diagnostic(
                    Severity.WARNING,
                    "config-parse-error",
                    f"{path}: {e}",
                    SourceLocation(path, max(e.line, 1), commit_id=self.commit_id),
                )
            )
        self.cache[path] = tree
        return tree

    def resolve_ref(self, ref: ConfigRef) -> Resolved | None:
        path = self._locate(ref.file)
        if path is None:
            self.diagnostics.append(
                Diagnostic(
                    Severity.WARNING,
                    "config-not-found",
                    f"config file {ref.file!r} not found in workspace",
                    self.call_loc,
                )
            )
            return None
        tree = self._tree(path)
        if tree is None:
            return None
        if not ref.key_path:
            return None
        scalar = configtree.lookup(tree, list(ref.key_path))
        if scalar is None:
            self.diagnostics.append(
                Diagnostic(
                    Severity.WARNING,
                    "config-key-not-found",
                    f"{path}: key path {'.'.join(ref.key_path)!r} has no scalar value",
                    self.call_loc,
                )
            )
            return None
        return Resolved(
            Str(scalar.text),
            SourceLocation(path, scalar.line, scalar.column, self.commit_id),
        )

    def whole_config_entries(self, ref: ConfigRef) -> list[tuple[str, Resolved]] | None:
        """Top-level scalar entries of a config mapping, for ``**cfg`` calls."""
        path = self._locate(ref.file)
        if path is None:
            self.diagnostics.append(
                Diagnostic(
                    Severity.WARNING,
                    "config-not-found",
                    f"config file {ref.file!r} not found in workspace",
                    self.call_loc,
                )
            )
            return None
        tree = self._tree(path)
        node: configtree.ConfigNode | None = tree
        for key in ref.key_path:
            if not isinstance(node, configtree.MapNode):
                return None
            node = node.get(key)
        if not isinstance(node, configtree.MapNode):
            return None
        out = []
        for key, child in node.entries:
            if isinstance(child, configtree.Scalar):
                out.append(
                    (key, Resolved(Str(child.text),
                                   SourceLocation(path, child.line, child.column, self.commit_id)))
                )
        return out

    def resolve_value(self, res: Resolved) -> Resolved | None:
        value = res.value
        if isinstance(value, (Str, Int)):
            return res
        if isinstance(value, ConfigRef):
            return self.resolve_ref(value)
        if isinstance(value, Concat):
            parts = []
            for part in value.parts:
                if isinstance(part, Str):
                    parts.append(part)
                elif isinstance(part, ConfigRef):
                    resolved = self.resolve_ref(part)
                    if resolved is None or not isinstance(resolved.value, Str):
                        return None
                    parts.append(resolved.value)
                else:
                    return None
            folded = concat_values(parts)
            if isinstance(folded, Str):
                return Resolved(folded, res.origin)
            return None
        return None


def _as_text(value: object) -> str | None:
    if isinstance(value, Str):
        return value.text
    if isinstance(value, Int):
        return str(value.value)
    return None


def _as_port(value: object) -> int | None:
    if isinstance(value, Int):
        port = value.value
    elif isinstance(value, Str) and value.text.isdigit():
        port = int(value.text)
    else:
        return None
    return port if 1 <= port <= 65535 else None


def _pair_from_dsn(res: Resolved, spec: SinkSpec, site: CallSite,
                   diagnostics: list[Diagnostic]) -> SecretAssetPair | None:
    text = _as_text(res.value)
    if text is None:
        return None
    try:
        parsed = parse_connection_string(text)
    except PlaceholderHost as e:
        diagnostics.append(
            Diagnostic(Severity.INFO, "placeholder-host",
                       f"DSN host is a template placeholder: {e.host}", res.origin)
        )
        return None
    except NoPassword:
        return None
    except ConnStringError as e:
        diagnostics.append(
            Diagnostic(Severity.WARNING, "malformed-connstring", str(e), res.origin)
        )
        return None
    return SecretAssetPair(
        kind=parsed.kind,
        credential=parsed.credential,
        asset=parsed.asset,
        secret_location=res.origin,
        asset_location=res.origin,
        method=DetectionMethod.DATA_FLOW,
        sink_call_location=site.location,
    )


def extract_pair_at_sink(
    site: CallSite,
    spec: SinkSpec,
    files: Mapping[str, str],
    diagnostics: list[Diagnostic] | None = None,
    config_cache: ConfigCache | None = None,
    commit_id: str | None = None,
) -> SecretAssetPair | None:
    """Bind the call's arguments to roles and emit a pair if possible.

    ``**dict`` arguments with a resolved dict contribute their entries as
    keyword arguments; config-file references are resolved against
    ``files``. Partial resolution produces a diagnostic naming the roles
    that did resolve.
    """
    sink = diagnostics if diagnostics is not None else []
    cache = config_cache if config_cache is not None else {}
    bridge = _Bridge(files, site.module_path, sink, cache, commit_id, site.location)

    candidates: list[tuple[Role, Resolved]] = []
    externally_configured = False

    def consider(role: Role, res: Resolved | None) -> None:
        nonlocal externally_configured
        if res is None:
            return
        if isinstance(res.value, EnvRead):
            externally_configured = True
            return
        candidates.append((role, res))

    pos_map = spec.positional_map
    for idx, arg in enumerate(site.pos_args):
        if arg is STARRED:
            break
        if idx in pos_map:
            consider(pos_map[idx], arg)

    kw_map = spec.keyword_map
    for name, res in site.kw_args:
        if name in kw_map:
            consider(kw_map[name], res)

    for res in site.star_kwargs:
        if res is None:
            continue
        if isinstance(res.value, DictVal):
            for key, value in res.value.entries:
                if key in kw_map:
                    consider(kw_map[key], Resolved(value, res.entry_origin(key) or res.origin))
        elif isinstance(res.value, ConfigRef):
            entries = bridge.whole_config_entries(res.value)
            for key, entry in entries or []:
                if key in kw_map:
                    consider(kw_map[key], entry)

    bindings: dict[Role, Resolved] = {}
    for role, res in candidates:
        resolved = bridge.resolve_value(res)
        if resolved is None or _is_junk(resolved.value):
            continue
        # A host argument holding a whole connection string is a DSN in
        # disguise (pymongo accepts full mongodb:// URIs as host).
        if role is Role.HOST and isinstance(resolved.value, Str) and "://" in resolved.value.text:
            role = Role.DSN
        if role not in bindings:
            bindings[role] = resolved

    if externally_configured:
        sink.append(
            Diagnostic(
                Severity.INFO,
                "externally-configured",
                f"{spec.callee_path}: argument values come from the environment, "
                "not the repository",
                site.location,
            )
        )

    if Role.DSN in bindings:
        pair = _pair_from_dsn(bindings[Role.DSN], spec, site, sink)
        if pair is not None:
            return pair

    password = bindings.get(Role.PASSWORD)
    host = bindings.get(Role.HOST)
    if password is not None and host is not None:
        password_text = _as_text(password.value)
        host_text = _as_text(host.value) if isinstance(host.value, Str) else None
        if password_text and host_text:
            if classify_asset(host_text) is AssetClass.PLACEHOLDER:
                sink.append(
                    Diagnostic(Severity.INFO, "placeholder-host",
                               f"sink host is a template placeholder: {host_text}",
                               host.origin)
                )
                return None
            username = bindings.get(Role.USERNAME)
            port = bindings.get(Role.PORT)
            port_num = _as_port(port.value) if port is not None else None
            if port is not None and port_num is None:
                sink.append(
                    Diagnostic(Severity.WARNING, "invalid-port",
                               f"{spec.callee_path}: port argument is not a valid port",
                               port.origin)
                )
            database = bindings.get(Role.DATABASE_NAME)
            kind = spec.kind or DatabaseKind.GENERIC_ODBC
            return SecretAssetPair(
                kind=kind,
                credential=SecretCredential(
                    password=password_text,
                    username=_as_text(username.value) if username else None,
                ),
                asset=make_asset(
                    host_text,
                    port=port_num,
                    database_name=_as_text(database.value) if database else None,
                ),
                secret_location=password.origin,
                asset_location=host.origin,
                method=DetectionMethod.DATA_FLOW,
                sink_call_location=site.location,
            )

    if bindings:
        resolved_roles = ", ".join(sorted(r.value for r in bindings))
        sink.append(
            Diagnostic(
                Severity.INFO,
                "partial-sink-binding",
                f"{spec.callee_path}: resolved roles [{resolved_roles}] but need "
                "both Password and Host (or a DSN)",
                site.location,
            )
        )
    return None


def bridge_config(
    site: CallSite,
    spec: SinkSpec,
    files: Mapping[str, str],
    diagnostics: list[Diagnostic] | None = None,
    config_cache: ConfigCache | None = None,
    commit_id: str | None = None,
) -> SecretAssetPair | None:
    """Extraction entry point when role arguments reference config files.

    Same contract as extract_pair_at_sink, which already folds config
    resolution into role binding; kept as an explicit alias so config
    bridging can be driven (and tested) on its own.
    """
    return extract_pair_at_sink(site, spec, files, diagnostics, config_cache, commit_id)
