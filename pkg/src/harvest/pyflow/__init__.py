"""Constant data-flow analysis: source constants flowing into database
driver sinks, across assignments, dictionaries, imports, and config files."""

from __future__ import annotations

from typing import Mapping

from ..model import Diagnostic, SecretAssetPair
from .extract import bridge_config, extract_pair_at_sink
from .imports import ProjectIndex, build_index, resolve_imports
from .parser import ParsedModule, parse_module
from .propagate import CallSite, ScopeWalker, propagate_constants
from .sinks import (
    CatalogError,
    Role,
    SinkSpec,
    builtin_catalog,
    find_sink_calls,
    load_catalog,
    parse_catalog,
)
from .values import Concat, ConfigRef, ConstValue, DictVal, FlowFact, Int, Str

__all__ = [
    "CallSite",
    "CatalogError",
    "Concat",
    "ConfigRef",
    "ConstValue",
    "DictVal",
    "FlowFact",
    "Int",
    "ParsedModule",
    "ProjectIndex",
    "Role",
    "ScopeWalker",
    "SinkSpec",
    "Str",
    "analyze_project",
    "bridge_config",
    "build_index",
    "builtin_catalog",
    "extract_pair_at_sink",
    "find_sink_calls",
    "load_catalog",
    "parse_catalog",
    "parse_module",
    "propagate_constants",
    "resolve_imports",
]


def analyze_project(
    files: Mapping[str, str],
    catalog: list[SinkSpec],
    diagnostics: list[Diagnostic] | None = None,
    commit_id: str | None = None,
) -> tuple[list[SecretAssetPair], list[FlowFact]]:
    """Run the full data-flow stage over a workspace snapshot.

    ``files`` maps repository-relative paths to text content; only
    ``.py`` files are analyzed but any file can serve as a config-bridge
    target. Returns emitted pairs and all resolved constant facts.
    """
    local_diags: list[Diagnostic] = []
    index = build_index(files, local_diags, commit_id)
    resolve_imports(index, local_diags, commit_id)

    pairs: list[SecretAssetPair] = []
    facts: list[FlowFact] = []
    config_cache: dict = {}
    for name in sorted(index.modules):
        walker = ScopeWalker(index.modules[name], index, local_diags, commit_id)
        walker.run_full()
        facts.extend(walker.facts)
        for site, spec in find_sink_calls(walker.call_sites, catalog):
            pair = extract_pair_at_sink(site, spec, files, local_diags, config_cache, commit_id)
            if pair is not None:
                pairs.append(pair)

    if diagnostics is not None:
        seen = set()
        for diag in local_diags:
            if diag not in seen:
                seen.add(diag)
                diagnostics.append(diag)
    return pairs, facts
