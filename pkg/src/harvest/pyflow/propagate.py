"""Flow-sensitive constant propagation over parsed Python modules.

The walker visits statements in textual order, tracking the most recent
binding of each name: locals shadow module-level bindings, which shadow
imported constants. Every call expression met along the way is recorded
with a snapshot of its resolved arguments, so sink extraction later sees
exactly the values that were live at the call.

The analysis is intra-procedural plus module constants plus the import
closure; anything dynamic (reflection, comprehensions, attribute
mutation) is an unresolvable value rather than an error.
"""

from __future__ import annotations

import ast
from dataclasses import dataclass

from ..configtree import ConfigFormat, format_for_path
from ..model import Diagnostic, Severity, SourceLocation
from .parser import ParsedModule
from .values import (
    Concat,
    ConfigRef,
    ConstValue,
    DictVal,
    EnvRead,
    FileHandle,
    FileText,
    FlowFact,
    Int,
    Resolved,
    Str,
    concat_values,
)

# Marks a positional slot after *args unpacking: nothing at or past this
# position can be bound reliably.
STARRED = object()

_CONFIG_LOADERS: dict[str, ConfigFormat] = {
    "yaml.safe_load": ConfigFormat.YAML,
    "yaml.full_load": ConfigFormat.YAML,
    "yaml.load": ConfigFormat.YAML,
    "json.load": ConfigFormat.JSON,
    "json.loads": ConfigFormat.JSON,
    "xmltodict.parse": ConfigFormat.XML,
}


@dataclass(frozen=True)
class CallSite:
    callee: str
    location: SourceLocation
    pos_args: tuple[object, ...]  # Resolved | None | STARRED
    kw_args: tuple[tuple[str, "Resolved | None"], ...]
    star_kwargs: tuple["Resolved | None", ...]
    module_path: str


def _is_const(value: object) -> bool:
    return isinstance(value, (Str, Int, DictVal, ConfigRef, Concat))


class ScopeWalker:
    """Walks one module; fills ``facts`` and ``call_sites``."""

    def __init__(self, module: ParsedModule, index, diagnostics: list[Diagnostic] | None = None,
                 commit_id: str | None = None):
        self.module = module
        self.index = index
        self.diagnostics = diagnostics if diagnostics is not None else []
        self.commit_id = commit_id
        self.module_env: dict[str, Resolved | None] = {}
        self.module_aliases: dict[str, str] = {}
        self.call_sites: list[CallSite] = []
        self.facts: list[FlowFact] = []

    # -- public entry points --------------------------------------------

    def run_module_level(self) -> dict[str, Resolved | None]:
        """Evaluate module-level bindings only (used for export resolution)."""
        if self.module.tree is not None:
            self._walk(self.module.tree.body, [self.module_env], self.module_aliases,
                       self.module.name, collect_defs=None)
        return self.module_env

    def run_full(self) -> None:
        """Module bindings, then every function/class body against the
        final module environment."""
        deferred: list[tuple[str, ast.AST]] = []
        if self.module.tree is not None:
            self._walk(self.module.tree.body, [self.module_env], self.module_aliases,
                       self.module.name, collect_defs=deferred)
        self._emit_facts(self.module.name, self.module_env)
        while deferred:
            qualname, node = deferred.pop(0)
            local: dict[str, Resolved | None] = {}
            aliases = dict(self.module_aliases)
            nested: list[tuple[str, ast.AST]] = []
            if isinstance(node, (ast.FunctionDef, ast.AsyncFunctionDef)):
                for arg in self._all_args(node.args):
                    local[arg] = None
            self._walk(node.body, [local, self.module_env], aliases, qualname,
                       collect_defs=nested)
            if isinstance(node, (ast.FunctionDef, ast.AsyncFunctionDef)):
                self._emit_facts(qualname, local)
            deferred.extend(nested)

    # -- helpers ----------------------------------------------------------

    @staticmethod
    def _all_args(args: ast.arguments) -> list[str]:
        names = [a.arg for a in args.posonlyargs + args.args + args.kwonlyargs]
        if args.vararg:
            names.append(args.vararg.arg)
        if args.kwarg:
            names.append(args.kwarg.arg)
        return names

    def _loc(self, node: ast.AST) -> SourceLocation:
        line = max(getattr(node, "lineno", 1), 1)
        col = getattr(node, "col_offset", 0) + 1
        return SourceLocation(self.module.path, line, col, self.commit_id)

    def _diag(self, severity: Severity, code: str, message: str, node: ast.AST) -> None:
        self.diagnostics.append(Diagnostic(severity, code, message, self._loc(node)))

    def _emit_facts(self, qualname: str, env: dict[str, Resolved | None]) -> None:
        for name in sorted(env):
            res = env[name]
            if res is not None and _is_const(res.value):
                self.facts.append(FlowFact(f"{qualname}.{name}", res.value, res.origin))

    @staticmethod
    def _lookup(envs: list[dict], name: str) -> Resolved | None:
        for env in envs:
            if name in env:
                return env[name]
        return None

    def _resolve_export(self, module_name: str, symbol: str) -> Resolved | None:
        key = self.index.resolve_module(module_name, self.module)
        if key is None:
            return None
        return self.index.exports.get(key, {}).get(symbol)

    def _dotted_chain(self, node: ast.expr) -> list[str] | None:
        parts: list[str] = []
        while isinstance(node, ast.Attribute):
            parts.append(node.attr)
            node = node.value
        if isinstance(node, ast.Name):
            parts.append(node.id)
            return list(reversed(parts))
        return None

    def _resolve_callee(self, node: ast.expr, aliases: dict[str, str]) -> str | None:
        chain = self._dotted_chain(node)
        if not chain:
            return None
        root = chain[0]
        target = aliases.get(root, root)
        return ".".join([target] + chain[1:])

    # -- statement walking -------------------------------------------------

    def _walk(self, stmts: list[ast.stmt], envs: list[dict], aliases: dict[str, str],
              qualname: str, collect_defs: list | None) -> None:
        for stmt in stmts:
            if isinstance(stmt, ast.Assign):
                value = self._eval(stmt.value, envs, aliases)
                for target in stmt.targets:
                    self._bind_target(target, value, envs, aliases)
            elif isinstance(stmt, ast.AnnAssign):
                if stmt.value is not None:
                    value = self._eval(stmt.value, envs, aliases)
                    self._bind_target(stmt.target, value, envs, aliases)
            elif isinstance(stmt, ast.AugAssign):
                self._aug_assign(stmt, envs, aliases)
            elif isinstance(stmt, ast.Import):
                for alias in stmt.names:
                    if alias.asname:
                        aliases[alias.asname] = alias.name
                    else:
                        root = alias.name.split(".")[0]
                        aliases[root] = root
            elif isinstance(stmt, ast.ImportFrom):
                self._import_from(stmt, envs, aliases)
            elif isinstance(stmt, ast.Expr):
                self._eval(stmt.value, envs, aliases)
            elif isinstance(stmt, (ast.FunctionDef, ast.AsyncFunctionDef, ast.ClassDef)):
                envs[0][stmt.name] = None
                if collect_defs is not None:
                    collect_defs.append((f"{qualname}.{stmt.name}", stmt))
            elif isinstance(stmt, ast.If):
                self._eval(stmt.test, envs, aliases)
                self._walk(stmt.body, envs, aliases, qualname, collect_defs)
                self._walk(stmt.orelse, envs, aliases, qualname, collect_defs)
            elif isinstance(stmt, (ast.While,)):
                self._eval(stmt.test, envs, aliases)
                self._walk(stmt.body, envs, aliases, qualname, collect_defs)
                self._walk(stmt.orelse, envs, aliases, qualname, collect_defs)
            elif isinstance(stmt, (ast.For, ast.AsyncFor)):
                self._eval(stmt.iter, envs, aliases)
                self._bind_target(stmt.target, None, envs, aliases)
                self._walk(stmt.body, envs, aliases, qualname, collect_defs)
                self._walk(stmt.orelse, envs, aliases, qualname, collect_defs)
            elif isinstance(stmt, (ast.With, ast.AsyncWith)):
                for item in stmt.items:
                    ctx = self._eval(item.context_expr, envs, aliases)
                    if item.optional_vars is not None:
                        self._bind_target(item.optional_vars, ctx, envs, aliases)
                self._walk(stmt.body, envs, aliases, qualname, collect_defs)
            elif isinstance(stmt, ast.Try):
                self._walk(stmt.body, envs, aliases, qualname, collect_defs)
                for handler in stmt.handlers:
                    if handler.name:
                        envs[0][handler.name] = None
                    self._walk(handler.body, envs, aliases, qualname, collect_defs)
                self._walk(stmt.orelse, envs, aliases, qualname, collect_defs)
                self._walk(stmt.finalbody, envs, aliases, qualname, collect_defs)
            elif isinstance(stmt, ast.Match):
                self._eval(stmt.subject, envs, aliases)
                for case in stmt.cases:
                    self._walk(case.body, envs, aliases, qualname, collect_defs)
            elif isinstance(stmt, ast.Return):
                if stmt.value is not None:
                    self._eval(stmt.value, envs, aliases)
            elif isinstance(stmt, ast.Raise):
                if stmt.exc is not None:
                    self._eval(stmt.exc, envs, aliases)
            elif isinstance(stmt, ast.Assert):
                self._eval(stmt.test, envs, aliases)
            elif isinstance(stmt, ast.Delete):
                for target in stmt.targets:
                    if isinstance(target, ast.Name):
                        envs[0][target.id] = None
            # Everything else (Global, Nonlocal, Pass, ...) has no effect
            # on tracked constants.

    def _bind_target(self, target: ast.expr, value: Resolved | None,
                     envs: list[dict], aliases: dict[str, str]) -> None:
        if isinstance(target, ast.Name):
            envs[0][target.id] = value
        elif isinstance(target, (ast.Tuple, ast.List)):
            for elt in target.elts:
                self._bind_target(elt, None, envs, aliases)
        elif isinstance(target, ast.Subscript) and isinstance(target.value, ast.Name):
            base = self._lookup(envs, target.value.id)
            key = self._const_index(target, envs, aliases)
            if (
                base is not None
                and isinstance(base.value, DictVal)
                and key is not None
                and value is not None
                and _is_const(value.value)
            ):
                entries = tuple(
                    (k, v) for k, v in base.value.entries if k != key
                ) + ((key, value.value),)
                origins = tuple(
                    (k, loc) for k, loc in base.entry_origins if k != key
                ) + ((key, value.origin),)
                envs[0][target.value.id] = Resolved(DictVal(entries), base.origin, origins)
            else:
                # A store we cannot model invalidates the whole dict.
                envs[0][target.value.id] = None

    def _aug_assign(self, stmt: ast.AugAssign, envs: list[dict], aliases: dict[str, str]) -> None:
        value = self._eval(stmt.value, envs, aliases)
        if not isinstance(stmt.target, ast.Name):
            return
        if isinstance(stmt.op, ast.Add):
            current = self._lookup(envs, stmt.target.id)
            if current is not None and value is not None and _is_const(current.value) and _is_const(value.value):
                folded = concat_values([current.value, value.value])
                if folded is not None:
                    envs[0][stmt.target.id] = Resolved(folded, current.origin)
                    return
        envs[0][stmt.target.id] = None

    def _import_from(self, stmt: ast.ImportFrom, envs: list[dict], aliases: dict[str, str]) -> None:
        if stmt.level:
            pkg_parts = self.module.package.split(".") if self.module.package else []
            keep = len(pkg_parts) - (stmt.level - 1)
            if keep < 0:
                self._diag(Severity.WARNING, "unresolved-import",
                           f"relative import beyond top-level package in {self.module.path}", stmt)
                return
            base = ".".join(pkg_parts[:keep])
            source = ".".join(p for p in (base, stmt.module or "") if p)
        else:
            source = stmt.module or ""
        resolved_key = self.index.resolve_module(source, self.module) if source else None

        for alias in stmt.names:
            if alias.name == "*":
                if resolved_key is None:
                    self._diag(Severity.WARNING, "unresolved-import",
                               f"cannot resolve 'from {source} import *'", stmt)
                    continue
                for sym in sorted(self.index.exports.get(resolved_key, {})):
                    envs[0][sym] = self.index.exports[resolved_key][sym]
                continue
            bound = alias.asname or alias.name
            aliases[bound] = f"{source}.{alias.name}" if source else alias.name
            if resolved_key is not None:
                exported = self.index.exports.get(resolved_key, {}).get(alias.name)
                if exported is not None:
                    envs[0][bound] = exported
            elif source and self.index.is_project_like(source):
                self._diag(Severity.WARNING, "unresolved-import",
                           f"cannot resolve 'from {source} import {alias.name}'", stmt)

    # -- expression evaluation ----------------------------------------------

    def _const_index(self, node: ast.Subscript, envs: list[dict], aliases: dict[str, str]) -> str | None:
        idx = node.slice
        if isinstance(idx, ast.Constant) and isinstance(idx.value, str):
            return idx.value
        res = self._eval(idx, envs, aliases)
        if res is not None and isinstance(res.value, Str):
            return res.value.text
        return None

    def _eval(self, node: ast.expr, envs: list[dict], aliases: dict[str, str]) -> Resolved | None:
        if isinstance(node, ast.Constant):
            if isinstance(node.value, str):
                return Resolved(Str(node.value), self._loc(node))
            if isinstance(node.value, int) and not isinstance(node.value, bool):
                return Resolved(Int(node.value), self._loc(node))
            return None

        if isinstance(node, ast.Name):
            return self._lookup(envs, node.id)

        if isinstance(node, ast.Attribute):
            chain = self._dotted_chain(node)
            if chain and len(chain) >= 2:
                root_target = aliases.get(chain[0])
                if root_target is not None:
                    dotted = ".".join([root_target] + chain[1:])
                    module_name, _, symbol = dotted.rpartition(".")
                    if module_name:
                        return self._resolve_export(module_name, symbol)
            return None

        if isinstance(node, ast.UnaryOp) and isinstance(node.op, ast.USub):
            inner = self._eval(node.operand, envs, aliases)
            if inner is not None and isinstance(inner.value, Int):
                return Resolved(Int(-inner.value.value), self._loc(node))
            return None

        if isinstance(node, ast.BinOp) and isinstance(node.op, ast.Add):
            left = self._eval(node.left, envs, aliases)
            right = self._eval(node.right, envs, aliases)
            if left is None or right is None:
                return None
            if not (_is_const(left.value) and _is_const(right.value)):
                return None
            folded = concat_values([left.value, right.value])
            if folded is None:
                return None
            return Resolved(folded, self._loc(node))

        if isinstance(node, ast.JoinedStr):
            parts: list[ConstValue] = []
            for piece in node.values:
                if isinstance(piece, ast.Constant) and isinstance(piece.value, str):
                    parts.append(Str(piece.value))
                    continue
                if isinstance(piece, ast.FormattedValue):
                    if piece.format_spec is not None or piece.conversion not in (-1, 115):
                        return None
                    inner = self._eval(piece.value, envs, aliases)
                    if inner is None:
                        return None
                    if isinstance(inner.value, Str):
                        parts.append(inner.value)
                    elif isinstance(inner.value, Int):
                        parts.append(Str(str(inner.value.value)))
                    elif isinstance(inner.value, (ConfigRef, Concat)):
                        parts.append(inner.value)
                    else:
                        return None
                    continue
                return None
            folded = concat_values(parts)
            return Resolved(folded, self._loc(node)) if folded is not None else None

        if isinstance(node, ast.Dict):
            entries: list[tuple[str, ConstValue]] = []
            origins: list[tuple[str, SourceLocation]] = []
            for key_node, value_node in zip(node.keys, node.values):
                if key_node is None or not (
                    isinstance(key_node, ast.Constant) and isinstance(key_node.value, str)
                ):
                    return None
                value = self._eval(value_node, envs, aliases)
                if value is None or not _is_const(value.value):
                    return None
                entries.append((key_node.value, value.value))
                origins.append((key_node.value, value.origin))
            return Resolved(DictVal(tuple(entries)), self._loc(node), tuple(origins))

        if isinstance(node, ast.Subscript):
            if self._is_environ(node.value, envs, aliases):
                return Resolved(EnvRead(self._const_index(node, envs, aliases)), self._loc(node))
            base = self._eval(node.value, envs, aliases)
            key = self._const_index(node, envs, aliases)
            if base is None or key is None:
                return None
            if isinstance(base.value, ConfigRef):
                ref = base.value
                return Resolved(ConfigRef(ref.file, ref.format, ref.key_path + (key,)), self._loc(node))
            if isinstance(base.value, DictVal):
                entry = base.value.get(key)
                if entry is None:
                    return None
                return Resolved(entry, base.entry_origin(key) or base.origin)
            return None

        if isinstance(node, ast.Call):
            return self._eval_call(node, envs, aliases)

        if isinstance(node, ast.NamedExpr):
            value = self._eval(node.value, envs, aliases)
            if isinstance(node.target, ast.Name):
                envs[0][node.target.id] = value
            return value

        if isinstance(node, ast.Await):
            return self._eval(node.value, envs, aliases)

        return None

    def _is_environ(self, node: ast.expr, envs: list[dict], aliases: dict[str, str]) -> bool:
        chain = self._dotted_chain(node)
        if not chain:
            return False
        dotted = ".".join([aliases.get(chain[0], chain[0])] + chain[1:])
        return dotted == "os.environ"

    def _eval_call(self, node: ast.Call, envs: list[dict], aliases: dict[str, str]) -> Resolved | None:
        pos_args: list[object] = []
        for arg in node.args:
            if isinstance(arg, ast.Starred):
                self._eval(arg.value, envs, aliases)
                pos_args.append(STARRED)
            else:
                pos_args.append(self._eval(arg, envs, aliases))
        kw_args: list[tuple[str, Resolved | None]] = []
        star_kwargs: list[Resolved | None] = []
        for kw in node.keywords:
            value = self._eval(kw.value, envs, aliases)
            if kw.arg is None:
                star_kwargs.append(value)
            else:
                kw_args.append((kw.arg, value))

        callee = self._resolve_callee(node.func, aliases)
        if callee is not None:
            self.call_sites.append(
                CallSite(
                    callee=callee,
                    location=self._loc(node),
                    pos_args=tuple(pos_args),
                    kw_args=tuple(kw_args),
                    star_kwargs=tuple(star_kwargs),
                    module_path=self.module.path,
                )
            )
            value = self._call_value(node, callee, pos_args, envs, aliases)
            if value is not None:
                return value

        # Method-style calls on tracked values (handle.read(), cfg.get(key)).
        if isinstance(node.func, ast.Attribute):
            return self._method_call_value(node, envs, aliases, pos_args)
        return None

    def _call_value(self, node: ast.Call, callee: str, pos_args: list,
                    envs: list[dict], aliases: dict[str, str]) -> Resolved | None:
        first = pos_args[0] if pos_args and pos_args[0] is not STARRED else None
        if callee == "open":
            if isinstance(first, Resolved) and isinstance(first.value, Str):
                return Resolved(FileHandle(first.value.text), self._loc(node))
            return None
        if callee in ("os.getenv", "os.environ.get"):
            key = None
            if isinstance(first, Resolved) and isinstance(first.value, Str):
                key = first.value.text
            return Resolved(EnvRead(key), self._loc(node))
        if callee in _CONFIG_LOADERS:
            if isinstance(first, Resolved) and isinstance(first.value, (FileHandle, FileText)):
                path = first.value.path
                fmt = format_for_path(path) or _CONFIG_LOADERS[callee]
                return Resolved(ConfigRef(path, fmt, ()), self._loc(node))
            return None
        if callee == "str":
            if isinstance(first, Resolved):
                if isinstance(first.value, Str):
                    return Resolved(first.value, self._loc(node))
                if isinstance(first.value, Int):
                    return Resolved(Str(str(first.value.value)), self._loc(node))
            return None
        return None

    def _method_call_value(self, node: ast.Call, envs: list[dict], aliases: dict[str, str],
                           pos_args: list) -> Resolved | None:
        attr = node.func.attr  # type: ignore[union-attr]
        base = self._eval(node.func.value, envs, aliases)  # type: ignore[union-attr]
        if base is None:
            return None
        if attr == "read" and isinstance(base.value, FileHandle) and not node.args:
            return Resolved(FileText(base.value.path), self._loc(node))
        if attr == "get" and len(pos_args) >= 1 and isinstance(pos_args[0], Resolved):
            key_res = pos_args[0]
            if isinstance(key_res.value, Str):
                key = key_res.value.text
                if isinstance(base.value, ConfigRef):
                    ref = base.value
                    return Resolved(ConfigRef(ref.file, ref.format, ref.key_path + (key,)), self._loc(node))
                if isinstance(base.value, DictVal):
                    entry = base.value.get(key)
                    if entry is not None:
                        return Resolved(entry, base.entry_origin(key) or base.origin)
        return None


def propagate_constants(module: ParsedModule, index, diagnostics: list[Diagnostic] | None = None,
                        commit_id: str | None = None) -> list[FlowFact]:
    """Resolved constant facts for a module (module level and locals)."""
    walker = ScopeWalker(module, index, diagnostics, commit_id)
    walker.run_full()
    return walker.facts
