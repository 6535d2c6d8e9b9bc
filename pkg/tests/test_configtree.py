from __future__ import annotations

import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from harvest.configtree import (
    ConfigFormat,
    ConfigParseError,
    ConfigUnsupportedError,
    MapNode,
    Scalar,
    SeqNode,
    format_for_path,
    load_config,
    lookup,
)


def test_format_inference():
    assert format_for_path("a/config.yml") is ConfigFormat.YAML
    assert format_for_path("b.YAML") is ConfigFormat.YAML
    assert format_for_path("c.json") is ConfigFormat.JSON
    assert format_for_path("d.xml") is ConfigFormat.XML
    assert format_for_path("Makefile") is None


def test_yaml_fig7_keys():
    tree = load_config("dbhost: h\ndbuser: u\n", ConfigFormat.YAML)
    assert isinstance(tree, MapNode)
    assert lookup(tree, ["dbhost"]).text == "h"
    assert lookup(tree, ["dbuser"]).text == "u"
    assert lookup(tree, ["dbhost"]).line == 1
    assert lookup(tree, ["dbuser"]).line == 2


def test_yaml_nested_and_sequences():
    tree = load_config("db:\n  host: h\n  ports:\n    - 1\n    - 2\n# comment\n", ConfigFormat.YAML)
    assert lookup(tree, ["db", "host"]).text == "h"
    ports = tree.get("db").get("ports")
    assert isinstance(ports, SeqNode)
    assert [s.text for s in ports.items] == ["1", "2"]


def test_yaml_scalars_stay_text():
    tree = load_config("port: 3306\nflag: true\nempty:\n", ConfigFormat.YAML)
    assert lookup(tree, ["port"]).text == "3306"
    assert lookup(tree, ["flag"]).text == "true"
    assert lookup(tree, ["empty"]).text == ""


def test_yaml_duplicate_key_rejected():
    with pytest.raises(ConfigParseError):
        load_config("a: 1\na: 2\n", ConfigFormat.YAML)


def test_yaml_unsupported_constructs():
    with pytest.raises(ConfigUnsupportedError):
        load_config("x: &a 1\ny: *a\n", ConfigFormat.YAML)
    with pytest.raises(ConfigUnsupportedError):
        load_config("---\na: 1\n---\nb: 2\n", ConfigFormat.YAML)


def test_yaml_parse_error_position():
    with pytest.raises(ConfigParseError) as exc:
        load_config("a: [1, 2\n", ConfigFormat.YAML)
    assert exc.value.line >= 1


def test_json_empty_object():
    tree = load_config("{}", ConfigFormat.JSON)
    assert tree == MapNode((), 1, 1)


def test_json_positions_and_duplicates():
    tree = load_config('{\n  "a": "x",\n  "b": {"c": 5}\n}', ConfigFormat.JSON)
    assert lookup(tree, ["a"]).text == "x"
    assert lookup(tree, ["a"]).line == 2
    assert lookup(tree, ["b", "c"]).text == "5"
    with pytest.raises(ConfigParseError):
        load_config('{"a": 1, "a": 2}', ConfigFormat.JSON)


def test_json_error_position():
    with pytest.raises(ConfigParseError) as exc:
        load_config('{"a": tru}', ConfigFormat.JSON)
    assert exc.value.line == 1


def test_xml_element_mapping():
    tree = load_config("<db><host>h</host></db>", ConfigFormat.XML)
    assert lookup(tree, ["db", "host"]).text == "h"


def test_xml_attributes_text_and_repeats():
    doc = '<cfg env="prod"><node>a</node><node>b</node><note>x<b>!</b></note></cfg>'
    tree = load_config(doc, ConfigFormat.XML)
    assert lookup(tree, ["cfg", "@env"]).text == "prod"
    nodes = tree.get("cfg").get("node")
    assert isinstance(nodes, SeqNode) and [n.text for n in nodes.items] == ["a", "b"]
    assert lookup(tree, ["cfg", "note", "#text"]).text == "x"


def test_xml_error_position():
    with pytest.raises(ConfigParseError) as exc:
        load_config("<a><b></a>", ConfigFormat.XML)
    assert exc.value.line == 1


def test_lookup_misses():
    tree = load_config("a: 1\n", ConfigFormat.YAML)
    assert lookup(tree, ["missing"]) is None
    assert lookup(tree, ["a", "deeper"]) is None
    with pytest.raises(ValueError):
        lookup(tree, [])


# --- round-trip properties ----------------------------------------------------

_scalar_text = st.text(
    alphabet=st.characters(min_codepoint=32, max_codepoint=126, exclude_characters='"\\'),
    max_size=12,
)
_keys = st.text(alphabet="abcdefgh_", min_size=1, max_size=8)


def _trees(depth: int):
    if depth == 0:
        return _scalar_text
    return st.dictionaries(_keys, _trees(depth - 1), max_size=4)


def _to_json(value) -> str:
    return json.dumps(value)


def _plain(node):
    if isinstance(node, Scalar):
        return node.text
    if isinstance(node, MapNode):
        return {k: _plain(v) for k, v in node.entries}
    return [_plain(v) for v in node.items]


@given(_trees(3))
def test_json_agrees_with_stdlib(doc):
    text = _to_json(doc)
    tree = load_config(text, ConfigFormat.JSON)
    assert _plain(tree) == json.loads(text)


@given(st.dictionaries(_keys, st.dictionaries(_keys, _keys, max_size=3), min_size=1, max_size=4))
def test_yaml_block_round_trip(doc):
    lines = []
    for k, sub in doc.items():
        if not sub:
            lines.append(f"{k}: {{}}")
            continue
        lines.append(f"{k}:")
        for k2, v in sub.items():
            lines.append(f"  {k2}: {v}")
    tree = load_config("\n".join(lines) + "\n", ConfigFormat.YAML)
    for k, sub in doc.items():
        for k2, v in sub.items():
            assert lookup(tree, [k, k2]).text == v


@given(st.dictionaries(_keys, _keys, min_size=1, max_size=5))
def test_xml_round_trip(doc):
    body = "".join(f"<{k}>{v}</{k}>" for k, v in doc.items())
    tree = load_config(f"<root>{body}</root>", ConfigFormat.XML)
    for k, v in doc.items():
        assert lookup(tree, ["root", k]).text == v
