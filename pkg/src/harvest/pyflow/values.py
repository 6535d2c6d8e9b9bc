"""Constant value lattice for the data-flow stage.

A tracked value is either fully resolved (Str, Int, Dict, a reference
into a config file, or a concatenation awaiting config substitution) or
absent. Anything the engine cannot prove constant simply stays absent;
there is no "maybe" state.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

from ..configtree import ConfigFormat
from ..model import SourceLocation


@dataclass(frozen=True)
class Str:
    text: str


@dataclass(frozen=True)
class Int:
    value: int


@dataclass(frozen=True)
class DictVal:
    entries: tuple[tuple[str, "ConstValue"], ...]

    def get(self, key: str) -> "ConstValue | None":
        for k, v in self.entries:
            if k == key:
                return v
        return None


@dataclass(frozen=True)
class ConfigRef:
    """A value read from a config file: the file, its format, and the
    key path accumulated from subscript accesses (``cfg["db"]["host"]``)."""

    file: str
    format: ConfigFormat | None
    key_path: tuple[str, ...] = ()


@dataclass(frozen=True)
class Concat:
    """String concatenation with at least one non-literal part.

    Flattened by construction (no Concat directly inside Concat) and
    with adjacent Str parts already folded.
    """

    parts: tuple["ConstValue", ...]


ConstValue = Union[Str, Int, DictVal, ConfigRef, Concat]


# Internal plumbing values. They move through the evaluator like
# constants but never appear in FlowFacts or pairs.


@dataclass(frozen=True)
class FileHandle:
    path: str


@dataclass(frozen=True)
class FileText:
    path: str


@dataclass(frozen=True)
class EnvRead:
    """os.environ access: the value lives outside the repository."""

    key: str | None = None


@dataclass(frozen=True)
class Resolved:
    """A value plus where it was defined.

    ``entry_origins`` carries per-key definition sites for DictVal so a
    credential bound through ``**params`` still points at its own line.
    """

    value: object
    origin: SourceLocation
    entry_origins: tuple[tuple[str, SourceLocation], ...] = ()

    def entry_origin(self, key: str) -> SourceLocation | None:
        for k, loc in self.entry_origins:
            if k == key:
                return loc
        return None


@dataclass(frozen=True)
class FlowFact:
    """A program symbol proven to hold a constant value."""

    symbol: str
    value: ConstValue
    def_location: SourceLocation


def concat_values(parts: list[ConstValue]) -> ConstValue | None:
    """Fold a concatenation; None when any part cannot join a string.

    Str parts merge greedily; ConfigRef/Concat parts survive for later
    config substitution; Int or Dict parts make the result unresolved
    (they would not concatenate at runtime).
    """
    flat: list[ConstValue] = []
    for part in parts:
        if isinstance(part, Concat):
            flat.extend(part.parts)
        elif isinstance(part, (Str, ConfigRef)):
            flat.append(part)
        else:
            return None
    folded: list[ConstValue] = []
    for part in flat:
        if isinstance(part, Str) and folded and isinstance(folded[-1], Str):
            folded[-1] = Str(folded[-1].text + part.text)
        else:
            folded.append(part)
    if not folded:
        return Str("")
    if len(folded) == 1:
        return folded[0]
    return Concat(tuple(folded))
