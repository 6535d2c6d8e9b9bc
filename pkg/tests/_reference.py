"""Independent oracles and generators used by the test suite.

Everything here is deliberately written from the published definitions
or built by construction, without importing the implementation under
test, so agreement between the two is evidence rather than tautology.
"""

from __future__ import annotations

import random
import string

# --- Jaro / Jaro-Winkler brute-force reference -------------------------------
# Transcribed from the published record-linkage formula: two explicit
# assignment passes building the matched-character sequences, then a
# positional mismatch count. No shortcuts shared with the implementation.

MATCHED = object()


def jaro_reference(a: str, b: str) -> float:
    if a == b:
        return 1.0
    if not a or not b:
        return 0.0
    half = max(len(a), len(b)) // 2 - 1
    if half < 0:
        half = 0
    work_b = list(b)
    seq_a = []
    for i, ch in enumerate(a):
        for j in range(max(0, i - half), min(len(b), i + half + 1)):
            if work_b[j] == ch:
                work_b[j] = MATCHED
                seq_a.append(ch)
                break
    work_a = list(a)
    seq_b = []
    for j, ch in enumerate(b):
        for i in range(max(0, j - half), min(len(a), j + half + 1)):
            if work_a[i] == ch:
                work_a[i] = MATCHED
                seq_b.append(ch)
                break
    common = len(seq_a)
    if common == 0:
        return 0.0
    assert len(seq_b) == common, "assignment passes must agree"
    mismatches = sum(1 for x, y in zip(seq_a, seq_b) if x != y)
    transpositions = mismatches / 2.0
    return (
        common / len(a) + common / len(b) + (common - transpositions) / common
    ) / 3.0


def jaro_winkler_reference(a: str, b: str) -> float:
    j = jaro_reference(a, b)
    shared = 0
    for x, y in zip(a, b):
        if x != y or shared == 4:
            break
        shared += 1
    return j + shared * 0.1 * (1.0 - j)


# --- straight-line program generation and direct interpretation --------------

_NAME_POOL = ["v0", "v1", "v2", "v3", "v4", "v5"]
_LIT_ALPHABET = string.ascii_letters + string.digits + "_@.:/-"


def _literal(rng: random.Random) -> str:
    return "".join(rng.choice(_LIT_ALPHABET) for _ in range(rng.randint(0, 8)))


def generate_straightline_program(rng: random.Random) -> str:
    """Assignments of string literals, copies, +-concatenations, and
    f-strings over already-defined names. Always executes cleanly."""
    defined: list[str] = []
    stmts: list[str] = []
    for _ in range(rng.randint(1, 25)):
        name = rng.choice(_NAME_POOL)
        forms = ["literal", "concat_ll"]
        if defined:
            forms += ["copy", "concat_nl", "concat_nn", "fstring", "augadd" if name in defined else "literal"]
        form = rng.choice(forms)
        if form == "literal":
            rhs = repr(_literal(rng))
        elif form == "copy":
            rhs = rng.choice(defined)
        elif form == "concat_ll":
            rhs = f"{_literal(rng)!r} + {_literal(rng)!r}"
        elif form == "concat_nl":
            rhs = f"{rng.choice(defined)} + {_literal(rng)!r}"
        elif form == "concat_nn":
            rhs = f"{rng.choice(defined)} + {rng.choice(defined)}"
        elif form == "fstring":
            bits = []
            for _ in range(rng.randint(1, 3)):
                bits.append(_literal(rng))
                bits.append("{" + rng.choice(defined) + "}")
            rhs = 'f"' + "".join(bits) + '"'
        else:  # augadd
            stmts.append(f"{name} += {_literal(rng)!r}")
            continue
        stmts.append(f"{name} = {rhs}")
        if name not in defined:
            defined.append(name)
    return "\n".join(stmts) + "\n"


def interpret_program(source: str) -> dict[str, str]:
    """Ground truth: actually run the program."""
    namespace: dict[str, object] = {}
    exec(source, namespace)  # noqa: S102 - generated straight-line code
    return {k: v for k, v in namespace.items() if isinstance(v, str)}


# --- conforming connection-string generation ----------------------------------

URI_SCHEMES = {
    "mysql": "MySQL",
    "mysqlx": "MySQL",
    "postgres": "PostgreSQL",
    "postgresql": "PostgreSQL",
    "mongodb": "MongoDB",
    "mongodb+srv": "MongoDB",
}
JDBC_SCHEMES = {
    "mysql": "MySQL",
    "postgresql": "PostgreSQL",
    "sqlserver": "SQLServer",
    "mongodb": "MongoDB",
    "mariadb": "GenericJDBC",
    "oracle": "GenericJDBC",
}

_USER_CHARS = string.ascii_lowercase + string.digits + "_-"
_PASS_SAFE = string.ascii_letters + string.digits + "-._~!$'()*"
_HOST_LABEL = string.ascii_lowercase + string.digits


def _token(rng: random.Random, alphabet: str, lo: int = 1, hi: int = 8) -> str:
    return "".join(rng.choice(alphabet) for _ in range(rng.randint(lo, hi)))


def _gen_host(rng: random.Random) -> str:
    if rng.random() < 0.5:
        return ".".join(str(rng.randint(0, 255)) for _ in range(4))
    return ".".join(_token(rng, _HOST_LABEL, 1, 6) for _ in range(rng.randint(2, 3)))


def _gen_password(rng: random.Random) -> tuple[str, str]:
    """(encoded-as-written, decoded-expected)."""
    encoded = []
    decoded = []
    for _ in range(rng.randint(1, 10)):
        if rng.random() < 0.15:
            ch = rng.choice("@:/ %?#")
            encoded.append(f"%{ord(ch):02X}")
            decoded.append(ch)
        else:
            ch = rng.choice(_PASS_SAFE)
            encoded.append(ch)
            decoded.append(ch)
    return "".join(encoded), "".join(decoded)


def percent_encode(text: str) -> str:
    """Minimal userinfo encoding for re-serialization."""
    out = []
    for ch in text:
        if ch in _PASS_SAFE or ch.isalnum():
            out.append(ch)
        else:
            out.append(f"%{ord(ch):02X}")
    return "".join(out)


def gen_uri_case(rng: random.Random) -> dict:
    scheme = rng.choice(sorted(URI_SCHEMES))
    user = _token(rng, _USER_CHARS)
    encoded_pw, decoded_pw = _gen_password(rng)
    host = _gen_host(rng)
    port = rng.randint(1, 65535) if (rng.random() < 0.6 and scheme != "mongodb+srv") else None
    db = _token(rng, _HOST_LABEL) if rng.random() < 0.6 else None
    text = f"{scheme}://{user}:{encoded_pw}@{host}"
    if port is not None:
        text += f":{port}"
    if db is not None:
        text += f"/{db}"
    return {
        "group": "uri",
        "text": text,
        "kind": URI_SCHEMES[scheme],
        "scheme": scheme,
        "username": user,
        "password": decoded_pw,
        "host": host,
        "port": port,
        "db": db,
    }


def serialize_uri(case: dict) -> str:
    text = f"{case['scheme']}://{percent_encode(case['username'])}:{percent_encode(case['password'])}@{case['host']}"
    if case["port"] is not None:
        text += f":{case['port']}"
    if case["db"] is not None:
        text += f"/{case['db']}"
    return text


_KV_DRIVERS = [
    ("{SQL Server}", "SQLServer"),
    ("{MySQL ODBC 8.0 Driver}", "MySQL"),
    ("{PostgreSQL Unicode}", "PostgreSQL"),
    ("SQLOLEDB", "GenericODBC"),
    ("{Acme DB}", "GenericODBC"),
]
_KV_VALUE_CHARS = string.ascii_letters + string.digits + "_-."


def gen_kv_case(rng: random.Random) -> dict:
    driver, kind = rng.choice(_KV_DRIVERS)
    driver_key = rng.choice(["Driver", "driver", "DRIVER", "Provider"])
    if driver_key == "Provider":
        kind = "GenericODBC" if "{" not in driver else kind
    host = _gen_host(rng)
    port = rng.randint(1, 65535) if rng.random() < 0.5 else None
    server_key = rng.choice(["Server", "server", "Data Source", "DATA SOURCE", "Address"])
    server_value = host
    if port is not None:
        server_value += rng.choice([",", ":"]) + str(port)
    user = _token(rng, _USER_CHARS)
    user_key = rng.choice(["Uid", "UID", "User Id", "User ID", "User"])
    password = _token(rng, _KV_VALUE_CHARS, 1, 12)
    pwd_key = rng.choice(["Pwd", "PWD", "Password", "password"])
    db = _token(rng, _HOST_LABEL) if rng.random() < 0.6 else None

    segments = [f"{driver_key}={driver}", f"{server_key}={server_value}",
                f"{user_key}={user}", f"{pwd_key}={password}"]
    if db is not None:
        segments.append(rng.choice(["Database", "Initial Catalog"]) + f"={db}")
    if rng.random() < 0.3:
        segments.append("Trusted_Connection=no")
    rng.shuffle(segments)
    text = ";".join(segments) + ";"
    return {
        "group": "kv",
        "text": text,
        "kind": kind,
        "username": user,
        "password": password,
        "host": host,
        "port": port,
        "db": db,
    }


def serialize_kv(case: dict) -> str:
    parts = [f"Driver={{{case['kind']}}}" if case["kind"] != "GenericODBC" else "Provider=ACME"]
    server = case["host"]
    if case["port"] is not None:
        server += f",{case['port']}"
    parts.append(f"Server={server}")
    parts.append(f"Uid={case['username']}")
    parts.append(f"Pwd={case['password']}")
    if case["db"] is not None:
        parts.append(f"Database={case['db']}")
    return ";".join(parts) + ";"


def gen_jdbc_case(rng: random.Random) -> dict:
    scheme = rng.choice(sorted(JDBC_SCHEMES))
    user = _token(rng, _USER_CHARS)
    password = _token(rng, string.ascii_letters + string.digits + "-._~", 1, 12)
    host = _gen_host(rng)
    port = rng.randint(1, 65535) if rng.random() < 0.6 else None
    db = _token(rng, _HOST_LABEL) if rng.random() < 0.7 else None
    form = rng.choice(["prehost", "query", "both"])
    hostpart = host + (f":{port}" if port is not None else "")
    if form == "prehost":
        text = f"jdbc:{scheme}://{user}:{password}@{hostpart}"
        if db is not None:
            text += f"/{db}"
    elif form == "query":
        text = f"jdbc:{scheme}://{hostpart}"
        if db is not None:
            text += f"/{db}"
        userkey = rng.choice(["user", "username"])
        text += f"?{userkey}={user}&password={password}"
    else:
        # both forms present: the pre-host credentials must win
        text = f"jdbc:{scheme}://{user}:{password}@{hostpart}"
        if db is not None:
            text += f"/{db}"
        text += "?user=decoy&password=decoy"
    return {
        "group": "jdbc",
        "text": text,
        "form": form,
        "kind": JDBC_SCHEMES[scheme],
        "scheme": scheme,
        "username": user,
        "password": password,
        "host": host,
        "port": port,
        "db": db,
    }


def serialize_jdbc(case: dict) -> str:
    hostpart = case["host"] + (f":{case['port']}" if case["port"] is not None else "")
    text = f"jdbc:{case['scheme']}://{case['username']}:{case['password']}@{hostpart}"
    if case["db"] is not None:
        text += f"/{case['db']}"
    return text


def gen_conforming_case(rng: random.Random) -> dict:
    return rng.choice([gen_uri_case, gen_kv_case, gen_jdbc_case])(rng)


def mutate_nonconforming(rng: random.Random, case: dict) -> tuple[str, str]:
    """Break a conforming string; returns (mutation_kind, text).

    'nopassword' mutations must never produce a pair at all; the rest
    must never produce a pair with an empty password.
    """
    text = case["text"]
    group = case["group"]
    form = case.get("form")
    options = ["strip_password", "strip_credentials", "break_scheme",
               "placeholder_host", "truncate"]
    if case.get("port") is not None:
        options.append("bad_port")
    choice = rng.choice(options)
    if choice == "strip_password":
        if group == "uri":
            mutated = text.replace(f":{_extract_written_password(case)}@", "@", 1)
        elif group == "jdbc":
            if form == "query":
                mutated = text[: text.index("?")]
            else:
                mutated = text.replace(f":{case['password']}@", "@", 1).split("?")[0]
        else:
            mutated = ";".join(
                seg for seg in text.split(";") if not seg.lower().startswith(("pwd=", "password="))
            )
        return "nopassword", mutated
    if choice == "strip_credentials":
        if group == "uri":
            mutated = text[: text.index("://") + 3] + text[text.index("@") + 1 :]
        elif group == "jdbc":
            if "@" in text:
                mutated = text[: text.index("://") + 3] + text[text.index("@") + 1 :]
            mutated = (mutated if "@" in text else text).split("?")[0]
        else:
            mutated = ";".join(
                seg
                for seg in text.split(";")
                if not seg.lower().startswith(("pwd=", "password=", "uid=", "user"))
            )
        return "nopassword", mutated
    if choice == "break_scheme":
        return "other", "x" + text
    if choice == "placeholder_host":
        return "nopassword", text.replace(case["host"], "${dbServer}", 1)
    if choice == "bad_port":
        return "nopassword", text.replace(f":{case['port']}", ":0", 1).replace(
            f",{case['port']}", ",0", 1
        )
    return "other", text[: rng.randint(0, max(len(text) // 2, 1))]


def _extract_written_password(case: dict) -> str:
    if case["group"] == "uri":
        # re-derive the encoded form as written between ':' and '@'
        text = case["text"]
        start = text.index("://") + 3
        return text[text.index(":", start) + 1 : text.index("@")]
    return case["password"]
