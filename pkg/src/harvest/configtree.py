"""Uniform key-value trees loaded from YAML, JSON, or XML configuration files.

Every scalar keeps its source line and column so that pairs whose
credential or host lives in a config file can point straight at it.
Scalars stay as text; numeric coercion is the caller's business.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import yaml


class ConfigFormat(Enum):
    YAML = "yaml"
    JSON = "json"
    XML = "xml"


_EXTENSIONS = {
    ".yml": ConfigFormat.YAML,
    ".yaml": ConfigFormat.YAML,
    ".json": ConfigFormat.JSON,
    ".xml": ConfigFormat.XML,
}


def format_for_path(path: str) -> ConfigFormat | None:
    """Infer the config format from a file extension, or None."""
    dot = path.rfind(".")
    if dot < 0:
        return None
    return _EXTENSIONS.get(path[dot:].lower())


@dataclass(frozen=True)
class Scalar:
    text: str
    line: int = 1
    column: int = 1


@dataclass(frozen=True)
class MapNode:
    entries: tuple[tuple[str, "ConfigNode"], ...]
    line: int = 1
    column: int = 1

    def get(self, key: str) -> "ConfigNode | None":
        for k, v in self.entries:
            if k == key:
                return v
        return None


@dataclass(frozen=True)
class SeqNode:
    items: tuple["ConfigNode", ...]
    line: int = 1
    column: int = 1


ConfigNode = Scalar | MapNode | SeqNode


class ConfigParseError(Exception):
    """Config document could not be parsed; carries line/column."""

    def __init__(self, message: str, line: int = 1, column: int = 1):
        super().__init__(f"{line}:{column}: {message}")
        self.line = line
        self.column = column


class ConfigUnsupportedError(ConfigParseError):
    """Parsable but outside the supported subset (anchors, multi-doc, ...)."""


def load_config(data: bytes | str, format: ConfigFormat) -> ConfigNode:
    """Parse a config document into a ConfigNode tree.

    Raises ConfigParseError (with line/column) on malformed input and
    ConfigUnsupportedError for YAML anchors/aliases and multi-document
    streams.
    """
    if isinstance(data, bytes):
        text = data.decode("utf-8", errors="replace")
    else:
        text = data
    if format is ConfigFormat.YAML:
        return _load_yaml(text)
    if format is ConfigFormat.JSON:
        return _JsonParser(text).parse()
    return _load_xml(text)


def lookup(tree: ConfigNode, key_path: list[str]) -> Scalar | None:
    """Descend Map nodes by key; return the Scalar at the end, or None."""
    if not key_path:
        raise ValueError("key_path must be non-empty")
    node: ConfigNode | None = tree
    for key in key_path:
        if not isinstance(node, MapNode):
            return None
        node = node.get(key)
    return node if isinstance(node, Scalar) else None


# --- YAML ------------------------------------------------------------------
# Built on PyYAML's event stream rather than safe_load: events carry source
# marks for every scalar, keep scalars as raw text (no implicit typing), and
# let us reject anchors/aliases and multi-document streams explicitly.


def _load_yaml(text: str) -> ConfigNode:
    try:
        events = list(yaml.parse(text))
    except yaml.MarkedYAMLError as e:
        mark = e.problem_mark or e.context_mark
        line = (mark.line + 1) if mark else 1
        col = (mark.column + 1) if mark else 1
        raise ConfigParseError(e.problem or str(e), line, col) from e
    except yaml.YAMLError as e:
        raise ConfigParseError(str(e)) from e

    docs = sum(1 for ev in events if isinstance(ev, yaml.DocumentStartEvent))
    if docs > 1:
        raise ConfigUnsupportedError("multi-document YAML streams are unsupported")

    pos = 0

    def mark_of(ev: yaml.Event) -> tuple[int, int]:
        return ev.start_mark.line + 1, ev.start_mark.column + 1

    def build() -> ConfigNode:
        nonlocal pos
        ev = events[pos]
        pos += 1
        if isinstance(ev, yaml.AliasEvent):
            raise ConfigUnsupportedError("YAML aliases are unsupported", *mark_of(ev))
        if getattr(ev, "anchor", None):
            raise ConfigUnsupportedError("YAML anchors are unsupported", *mark_of(ev))
        line, col = mark_of(ev)
        if isinstance(ev, yaml.ScalarEvent):
            return Scalar(ev.value, line, col)
        if isinstance(ev, yaml.SequenceStartEvent):
            items = []
            while not isinstance(events[pos], yaml.SequenceEndEvent):
                items.append(build())
            pos += 1
            return SeqNode(tuple(items), line, col)
        if isinstance(ev, yaml.MappingStartEvent):
            entries: list[tuple[str, ConfigNode]] = []
            seen: set[str] = set()
            while not isinstance(events[pos], yaml.MappingEndEvent):
                key_ev = events[pos]
                if not isinstance(key_ev, yaml.ScalarEvent):
                    kl, kc = mark_of(key_ev)
                    raise ConfigUnsupportedError("non-scalar mapping keys are unsupported", kl, kc)
                pos += 1
                key = key_ev.value
                if key in seen:
                    kl, kc = mark_of(key_ev)
                    raise ConfigParseError(f"duplicate mapping key {key!r}", kl, kc)
                seen.add(key)
                entries.append((key, build()))
            pos += 1
            return MapNode(tuple(entries), line, col)
        raise ConfigParseError(f"unexpected YAML event {type(ev).__name__}", line, col)

    # events: StreamStart, DocumentStart, <node>, DocumentEnd, StreamEnd
    while pos < len(events) and not isinstance(
        events[pos], (yaml.ScalarEvent, yaml.SequenceStartEvent, yaml.MappingStartEvent, yaml.AliasEvent)
    ):
        pos += 1
    if pos >= len(events):
        return MapNode(())
    return build()


# --- JSON ------------------------------------------------------------------
# A small recursive-descent parser instead of the stdlib json module: the
# stdlib does not expose source positions, and positions are exactly why
# this module exists. Agreement with json.loads is property-tested.


class _JsonParser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0
        self.line = 1
        self.col = 1

    def parse(self) -> ConfigNode:
        self._skip_ws()
        if self.pos >= len(self.text):
            raise self._err("empty document")
        node = self._value()
        self._skip_ws()
        if self.pos < len(self.text):
            raise self._err("trailing data after document")
        return node

    def _err(self, msg: str) -> ConfigParseError:
        return ConfigParseError(msg, self.line, self.col)

    def _peek(self) -> str:
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def _advance(self) -> str:
        ch = self.text[self.pos]
        self.pos += 1
        if ch == "\n":
            self.line += 1
            self.col = 1
        else:
            self.col += 1
        return ch

    def _skip_ws(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos] in " \t\r\n":
            self._advance()

    def _expect(self, ch: str) -> None:
        if self._peek() != ch:
            raise self._err(f"expected {ch!r}, found {self._peek()!r}")
        self._advance()

    def _value(self) -> ConfigNode:
        ch = self._peek()
        if ch == "{":
            return self._object()
        if ch == "[":
            return self._array()
        if ch == '"':
            line, col = self.line, self.col
            return Scalar(self._string(), line, col)
        return self._literal()

    def _object(self) -> MapNode:
        line, col = self.line, self.col
        self._expect("{")
        self._skip_ws()
        entries: list[tuple[str, ConfigNode]] = []
        seen: set[str] = set()
        if self._peek() == "}":
            self._advance()
            return MapNode((), line, col)
        while True:
            self._skip_ws()
            if self._peek() != '"':
                raise self._err("expected string key")
            kline, kcol = self.line, self.col
            key = self._string()
            if key in seen:
                raise ConfigParseError(f"duplicate object key {key!r}", kline, kcol)
            seen.add(key)
            self._skip_ws()
            self._expect(":")
            self._skip_ws()
            entries.append((key, self._value()))
            self._skip_ws()
            if self._peek() == ",":
                self._advance()
                continue
            self._expect("}")
            return MapNode(tuple(entries), line, col)

    def _array(self) -> SeqNode:
        line, col = self.line, self.col
        self._expect("[")
        self._skip_ws()
        items: list[ConfigNode] = []
        if self._peek() == "]":
            self._advance()
            return SeqNode((), line, col)
        while True:
            self._skip_ws()
            items.append(self._value())
            self._skip_ws()
            if self._peek() == ",":
                self._advance()
                continue
            self._expect("]")
            return SeqNode(tuple(items), line, col)

    _ESCAPES = {'"': '"', "\\": "\\", "/": "/", "b": "\b", "f": "\f", "n": "\n", "r": "\r", "t": "\t"}

    def _string(self) -> str:
        self._expect('"')
        out: list[str] = []
        while True:
            if self.pos >= len(self.text):
                raise self._err("unterminated string")
            ch = self._advance()
            if ch == '"':
                return "".join(out)
            if ch == "\\":
                esc = self._advance() if self.pos < len(self.text) else ""
                if esc == "u":
                    if self.pos + 4 > len(self.text):
                        raise self._err("truncated \\u escape")
                    hex4 = "".join(self._advance() for _ in range(4))
                    try:
                        out.append(chr(int(hex4, 16)))
                    except ValueError:
                        raise self._err(f"invalid \\u escape {hex4!r}") from None
                elif esc in self._ESCAPES:
                    out.append(self._ESCAPES[esc])
                else:
                    raise self._err(f"invalid escape \\{esc}")
            elif ch in ("\n", "\r"):
                raise self._err("unescaped newline in string")
            else:
                out.append(ch)

    def _literal(self) -> Scalar:
        line, col = self.line, self.col
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos] not in " \t\r\n,]}":
            self._advance()
        token = self.text[start : self.pos]
        if token in ("true", "false", "null"):
            return Scalar(token, line, col)
        if _valid_json_number(token):
            return Scalar(token, line, col)
        raise ConfigParseError(f"invalid JSON token {token!r}", line, col)


def _valid_json_number(token: str) -> bool:
    import re

    return bool(re.fullmatch(r"-?(?:0|[1-9]\d*)(?:\.\d+)?(?:[eE][+-]?\d+)?", token))


# --- XML -------------------------------------------------------------------
# Expat gives per-node source positions. Mapping convention: elements become
# Map entries, attributes become '@'-prefixed keys, text content becomes
# '#text' (or the whole element collapses to a Scalar when there is nothing
# else), and repeated sibling tags fold into a sequence under one key.


def _load_xml(text: str) -> ConfigNode:
    from xml.parsers import expat

    parser = expat.ParserCreate()

    class _Elem:
        __slots__ = ("tag", "line", "col", "attrs", "children", "chunks")

        def __init__(self, tag: str, line: int, col: int, attrs: dict[str, str]):
            self.tag = tag
            self.line = line
            self.col = col
            self.attrs = attrs
            self.children: list[_Elem] = []
            self.chunks: list[str] = []

    root_holder: list[_Elem] = []
    stack: list[_Elem] = []

    def start(tag: str, attrs: dict[str, str]) -> None:
        el = _Elem(tag, parser.CurrentLineNumber, parser.CurrentColumnNumber + 1, attrs)
        if stack:
            stack[-1].children.append(el)
        else:
            root_holder.append(el)
        stack.append(el)

    def end(tag: str) -> None:
        stack.pop()

    def chars(data: str) -> None:
        if stack:
            stack[-1].chunks.append(data)

    parser.StartElementHandler = start
    parser.EndElementHandler = end
    parser.CharacterDataHandler = chars
    try:
        parser.Parse(text, True)
    except expat.ExpatError as e:
        raise ConfigParseError(
            expat.errors.messages[e.code], e.lineno, e.offset + 1
        ) from e
    if not root_holder:
        raise ConfigParseError("no root element")

    def convert(el: _Elem) -> ConfigNode:
        text_content = "".join(el.chunks).strip()
        if not el.attrs and not el.children:
            return Scalar(text_content, el.line, el.col)
        entries: list[tuple[str, ConfigNode]] = []
        for name, value in el.attrs.items():
            entries.append(("@" + name, Scalar(value, el.line, el.col)))
        by_tag: dict[str, list[_Elem]] = {}
        order: list[str] = []
        for child in el.children:
            if child.tag not in by_tag:
                order.append(child.tag)
            by_tag.setdefault(child.tag, []).append(child)
        for tag in order:
            group = by_tag[tag]
            if len(group) == 1:
                entries.append((tag, convert(group[0])))
            else:
                entries.append(
                    (tag, SeqNode(tuple(convert(c) for c in group), group[0].line, group[0].col))
                )
        if text_content:
            entries.append(("#text", Scalar(text_content, el.line, el.col)))
        return MapNode(tuple(entries), el.line, el.col)

    root = root_holder[0]
    return MapNode(((root.tag, convert(root)),), root.line, root.col)
