from __future__ import annotations

import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

import _reference as ref
from harvest.model import DatabaseKind, SourceLocation
from harvest.proximity import (
    SchemaError,
    builtin_detect_secrets,
    candidate_assets,
    ingest_secrets,
    jaro,
    jaro_winkler,
    pair_by_proximity,
)

CTX = SourceLocation("f.txt", 1)

# Frozen from the brute-force reference implementation of the published
# formula (m=6, two mismatched aligned positions -> one transposition).
MARTHA_JARO = 0.9444444444444445
MARTHA_JW = 0.9611111111111111


def test_jaro_identity_and_empty():
    assert jaro("abc", "abc") == 1.0
    assert jaro("abc", "") == 0.0
    assert jaro("", "") == 1.0


def test_jaro_martha_reference_value():
    assert ref.jaro_reference("MARTHA", "MARHTA") == pytest.approx(MARTHA_JARO, abs=1e-15)
    assert jaro("MARTHA", "MARHTA") == pytest.approx(MARTHA_JARO, abs=1e-12)
    assert jaro_winkler("MARTHA", "MARHTA") == pytest.approx(MARTHA_JW, abs=1e-12)


def test_winkler_no_prefix_equals_jaro():
    assert jaro_winkler("xabc", "yabc") == jaro("xabc", "yabc")


def test_winkler_prefix_boosts():
    j = jaro("mysql-password line", "mysql-host line")
    jw = jaro_winkler("mysql-password line", "mysql-host line")
    assert jw > j


_texts = st.text(alphabet=st.characters(min_codepoint=32, max_codepoint=126), max_size=24)


@given(_texts, _texts)
def test_jaro_winkler_matches_reference(s1, s2):
    assert jaro(s1, s2) == pytest.approx(ref.jaro_reference(s1, s2), abs=1e-12)
    assert jaro_winkler(s1, s2) == pytest.approx(ref.jaro_winkler_reference(s1, s2), abs=1e-12)


@given(_texts, _texts)
def test_similarity_properties(s1, s2):
    j = jaro(s1, s2)
    jw = jaro_winkler(s1, s2)
    assert 0.0 <= j <= jw <= 1.0
    assert jaro(s1, s2) == jaro(s2, s1)
    assert jaro_winkler(s1, s2) == jaro_winkler(s2, s1)
    assert jaro_winkler(s1, s1) == 1.0


FIG8 = [
    "file-server: files.internal.example.com",
    "mysql-host: db.internal.example.com",
    'mysql-user: "svc"',
    'mysql-password: "pass123"',
    "",
    "region: us-east-1",
    "",
    "# unrelated",
    "notes: nothing here",
    "email-server: smtp.mailhost.example.com",
    'mongo-user: "m"',
    'mongo-password: "mongopass1"',
]


def test_candidates_in_window():
    cands = candidate_assets(FIG8, 4)
    hosts = {(c.host, c.line) for c in cands}
    assert ("files.internal.example.com", 1) in hosts
    assert ("db.internal.example.com", 2) in hosts
    assert all(abs(c.line - 4) <= 3 for c in cands)


def test_candidates_exclude_beyond_window():
    lines = ["host: 10.1.1.1", "", "", "", 'password: "x"']
    assert [c.host for c in candidate_assets(lines, 5)] == []
    lines = ["host: 10.1.1.1", "", "", 'password: "x"']
    assert [c.host for c in candidate_assets(lines, 4)] == ["10.1.1.1"]


def test_candidates_plain_line():
    assert candidate_assets(["no hosts here"], 1) == []


def test_candidates_invalid_ip_dropped():
    assert candidate_assets(["relay: 999.999.999.999"], 1) == []
    assert [c.host for c in candidate_assets(["relay: 203.0.113.9"], 1)] == ["203.0.113.9"]


def test_builtin_detector_examples():
    findings = builtin_detect_secrets('mysql-password: "pass123"\n', CTX)
    assert [f.value for f in findings] == ["pass123"]
    assert builtin_detect_secrets('password = ""\n', CTX) == []
    assert builtin_detect_secrets('password = os.environ["PW"]\n', CTX) == []
    assert builtin_detect_secrets('password = "${PLACEHOLDER}"\n', CTX) == []
    assert builtin_detect_secrets('# db_password = "incomment"\n', CTX)[0].value == "incomment"


def test_pair_by_proximity_fig8():
    f_mysql = builtin_detect_secrets("\n".join(FIG8), CTX)[0]
    pair = pair_by_proximity(f_mysql, FIG8)
    assert pair is not None
    assert pair.asset.host == "db.internal.example.com"
    assert pair.kind is DatabaseKind.MYSQL
    assert pair.similarity_score >= 0.5
    assert pair.credential.username is None

    f_mongo = builtin_detect_secrets("\n".join(FIG8), CTX)[1]
    assert f_mongo.value == "mongopass1"
    assert pair_by_proximity(f_mongo, FIG8) is None


def test_pair_by_proximity_no_candidates():
    finding = builtin_detect_secrets('api-password: "zzzz"\n', CTX)[0]
    assert pair_by_proximity(finding, ['api-password: "zzzz"']) is None


def test_tie_breaking_is_deterministic():
    # two candidates with identical line text at different distances:
    # the closer one must win no matter the discovery order
    lines = [
        "db-host: 10.0.0.1",
        "",
        'db-password: "abcd1234"',
        "db-host: 10.0.0.1",
    ]
    finding = builtin_detect_secrets("\n".join(lines), CTX)[0]
    pair = pair_by_proximity(finding, lines)
    assert pair is not None
    assert pair.asset_location.line == 4  # distance 1 beats distance 2


def test_window_parameter_respected():
    lines = ["pwd-host: 10.0.0.9", "", 'pwd-pass: "secret99"']
    finding = builtin_detect_secrets("\n".join(lines), CTX)[0]
    assert pair_by_proximity(finding, lines, window=3) is not None
    assert pair_by_proximity(finding, lines, window=1) is None


def test_ingest_round_trip(tmp_path):
    path = tmp_path / "secrets.tsv"
    path.write_text(
        "harvest-secrets/1\n"
        "trufflehog\trule-a\tsrc/app.py\t12\thunter2\n"
        "gitleaks\trule-b\tsrc/app.py\t12\thunter2\n"
        "gitleaks\trule-c\tcfg.yml\t3\twith\\ttab\n"
    )
    findings = ingest_secrets(str(path))
    assert len(findings) == 2  # identical (value, path, line) merged
    assert findings[0].source_tool == "trufflehog"
    assert findings[1].value == "with\ttab"


def test_ingest_empty_file(tmp_path):
    path = tmp_path / "s.tsv"
    path.write_text("harvest-secrets/1\n")
    assert ingest_secrets(str(path)) == []


def test_ingest_schema_errors(tmp_path):
    path = tmp_path / "s.tsv"
    path.write_text("wrong-header\n")
    with pytest.raises(SchemaError):
        ingest_secrets(str(path))
    path.write_text("harvest-secrets/1\ntool\trule\tpath\n")
    with pytest.raises(SchemaError) as exc:
        ingest_secrets(str(path))
    assert exc.value.record == 1
    path.write_text("harvest-secrets/1\ntool\trule\tpath\tnotanumber\tvalue\n")
    with pytest.raises(SchemaError):
        ingest_secrets(str(path))


def test_random_pairs_against_reference_bulk():
    rng = random.Random(99)
    alphabet = "abcdefgh-_.123 "
    for _ in range(500):
        s1 = "".join(rng.choice(alphabet) for _ in range(rng.randint(0, 20)))
        s2 = "".join(rng.choice(alphabet) for _ in range(rng.randint(0, 20)))
        assert abs(jaro_winkler(s1, s2) - ref.jaro_winkler_reference(s1, s2)) < 1e-12
