"""Python module parsing for the data-flow stage.

Parsing is total at the project level: a file that does not parse
becomes an empty (opaque) module with a diagnostic rather than failing
the scan, and any construct the analyzer does not model is simply
treated as an unresolvable value downstream.
"""

from __future__ import annotations

import ast
import posixpath
from dataclasses import dataclass, field

from ..model import Diagnostic, Severity, SourceLocation


@dataclass
class ParsedModule:
    name: str
    path: str
    package: str
    tree: ast.Module | None = None
    diagnostics: list[Diagnostic] = field(default_factory=list)


def module_name_for(path: str) -> tuple[str, str]:
    """Dotted module name and package prefix for a repo-relative path.

    ``pkg/sub/mod.py`` -> ("pkg.sub.mod", "pkg.sub");
    ``pkg/__init__.py`` -> ("pkg", "").
    """
    parts = path.split("/")
    stem = parts[-1]
    if stem.endswith(".py"):
        stem = stem[:-3]
    if stem == "__init__":
        dotted = ".".join(parts[:-1])
    else:
        dotted = ".".join(parts[:-1] + [stem])
    package = dotted.rpartition(".")[0]
    return dotted or stem, package


def parse_module(
    content: str,
    path: str,
    diagnostics: list[Diagnostic] | None = None,
) -> ParsedModule:
    """Parse Python source into a ParsedModule; never raises for bad input."""
    name, package = module_name_for(path)
    pm = ParsedModule(name=name, path=path, package=package)
    try:
        pm.tree = ast.parse(content)
    except (SyntaxError, ValueError) as e:
        lineno = getattr(e, "lineno", None) or 1
        diag = Diagnostic(
            Severity.WARNING,
            "unparsable-module",
            f"{path}: not analyzable as Python syntax: {e.msg if isinstance(e, SyntaxError) else e}",
            SourceLocation(file_path=path, line=max(lineno, 1)),
        )
        pm.diagnostics.append(diag)
        if diagnostics is not None:
            diagnostics.append(diag)
    return pm


def is_python_path(path: str) -> bool:
    return posixpath.splitext(path)[1] == ".py"
