"""Project-wide module index and import closure.

Module-level constant bindings are computed per module, then imports are
re-resolved in a second pass so that constants travel across mutual
imports. Symbols still unresolved after two passes stay absent.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

from ..model import Diagnostic
from .parser import ParsedModule, is_python_path, parse_module
from .values import Resolved


@dataclass
class ProjectIndex:
    modules: dict[str, ParsedModule] = field(default_factory=dict)
    exports: dict[str, dict[str, Resolved | None]] = field(default_factory=dict)

    def resolve_module(self, name: str, importer: ParsedModule | None = None) -> str | None:
        """Map an imported module name to a project module key.

        Tries the importer's package first (sibling imports like
        ``from common import *`` in a package), then the repo root.
        """
        if importer is not None and importer.package:
            candidate = f"{importer.package}.{name}"
            if candidate in self.modules:
                return candidate
        if name in self.modules:
            return name
        return None

    def is_project_like(self, name: str) -> bool:
        """Whether an unresolved import plausibly targets project code
        (same top-level name as some project module) rather than a
        third-party library."""
        root = name.split(".")[0]
        return any(key == root or key.startswith(root + ".") for key in self.modules)


def build_index(
    files: Mapping[str, str],
    diagnostics: list[Diagnostic] | None = None,
    commit_id: str | None = None,
) -> ProjectIndex:
    """Parse every ``.py`` file in the workspace mapping into an index."""
    index = ProjectIndex()
    for path in sorted(files):
        if not is_python_path(path):
            continue
        pm = parse_module(files[path], path, diagnostics)
        if pm.name in index.modules:
            # First one wins deterministically; duplicate module names can
            # only happen with odd layouts (two roots shadowing each other).
            continue
        index.modules[pm.name] = pm
    return index


def resolve_imports(index: ProjectIndex, diagnostics: list[Diagnostic] | None = None,
                    commit_id: str | None = None) -> ProjectIndex:
    """Populate ``index.exports`` with a two-pass fixed point.

    Pass one computes each module's own constants; pass two re-runs the
    evaluation so `from X import ...` sees the pass-one exports, which
    covers constant cycles between mutually importing modules.
    """
    from .propagate import ScopeWalker

    for final_pass in (False, True):
        sink = diagnostics if final_pass else None
        for name in sorted(index.modules):
            walker = ScopeWalker(index.modules[name], index, sink, commit_id)
            env = walker.run_module_level()
            index.exports[name] = {k: v for k, v in env.items() if v is not None}
    return index
