"""Regenerate tests/goldens/evm_storage.json from compiled constructors.

For each case the values are rendered as constructor assignments in a small
Solidity contract and compiled with the pinned solc (tools/node_modules). The
creation code is executed by tools/mini_evm.py, which records every SSTORE, so
slot placement comes from the compiler's code generator and hashing from
pycryptodome, not from statemigrate.
"""

import json
import random
import subprocess
import sys
import tempfile
from pathlib import Path

from mini_evm import run_constructor
from statemigrate.fixtures import bundled_source, random_address, random_erc1155_values, random_erc20_values
from statemigrate.frontend import parse_source
from statemigrate.layout import compute_layout
from statemigrate.state import KeyEnumeration, encode_state, normalize_values

ROOT = Path(__file__).resolve().parents[1]
TOOLS = ROOT / "tools"
OUT = ROOT / "tests" / "goldens" / "evm_storage.json"

KITCHEN_DECLS = """\
    struct P { uint8 a; address who; bytes4 tag; }
    uint8 u8;
    int16 i16;
    bool flag;
    address owner;
    bytes4 sig;
    int256 big;
    bytes blob;
    string text;
    uint64[] small;
    uint256[3] fixed3;
    P point;
    P[] points;
    mapping(string => uint256) byName;
    mapping(uint256 => mapping(address => bool)) grid;
    mapping(address => P) people;
    mapping(int8 => int8) signed;
    mapping(bytes32 => bytes) notes;
    mapping(bool => string) labels;
"""

TEXTS = ["", "a", "x" * 31, "y" * 32, "z" * 33, "long enough to need two data slots, surely " * 2,
         "café über ☃", "\U0001f600" * 8]


def fixture_decls(standard):
    """State variable declarations of a bundled contract, copied verbatim."""
    lines = bundled_source(standard).splitlines()
    return "\n".join(l for l in lines if l.startswith("    ") and not l.startswith("     ")
                     and l.rstrip().endswith(";") and not l.strip().startswith(("event ", "error ", "using ")))


def kitchen_values(rng):
    def b(n):
        return "0x" + rng.getrandbits(8 * n).to_bytes(n, "big").hex()

    def point():
        return {"a": rng.randrange(256), "who": random_address(rng), "tag": b(4)}

    return {
        "u8": rng.randrange(256),
        "i16": rng.randrange(-(1 << 15), 1 << 15),
        "flag": rng.random() < 0.5,
        "owner": random_address(rng),
        "sig": b(4),
        "big": rng.choice([-(1 << 255), -1, rng.randrange(-(1 << 255), 1 << 255)]),
        "blob": b(rng.choice([0, 5, 31, 32, 70])),
        "text": rng.choice(TEXTS),
        "small": [rng.randrange(1 << 64) for _ in range(rng.randint(0, 9))],
        "fixed3": [rng.randrange(1 << 256) for _ in range(3)],
        "point": point(),
        "points": [point() for _ in range(rng.randint(0, 4))],
        "byName": {t: rng.randrange(1, 1 << 256) for t in rng.sample(TEXTS, 4)},
        "grid": {rng.randrange(1 << 256): {random_address(rng): True for _ in range(rng.randint(1, 3))}
                 for _ in range(3)},
        "people": {random_address(rng): point() for _ in range(3)},
        "signed": {k: rng.randrange(-128, 128) for k in rng.sample(range(-128, 128), 5)},
        "notes": {b(32): b(rng.choice([1, 31, 32, 45])) for _ in range(3)},
        "labels": {True: rng.choice(TEXTS[1:]), False: "no"},
    }


def erc721_values(rng, tokens=10):
    owners = [random_address(rng) for _ in range(4)]
    held = {}
    token_owner = {}
    for _ in range(tokens):
        t, o = rng.getrandbits(40), rng.choice(owners)
        token_owner[t] = o
        held[o] = held.get(o, 0) + 1
    return {
        "_name": "Oracle Collectibles with a long name",
        "_symbol": "ORC",
        "_owners": token_owner,
        "_balances": held,
        "_tokenApprovals": {t: random_address(rng) for t in rng.sample(sorted(token_owner), 3)},
        "_operatorApprovals": {owners[0]: {random_address(rng): True}},
    }


# Solidity rendering of canonical values

def literal(layout, tid, v):
    t = layout.types[tid]
    if t.kind == "uint":
        return str(v)
    if t.kind == "int":
        return f"int{t.bits}({v})"
    if t.kind == "bool":
        return "true" if v else "false"
    if t.kind == "address":
        return f"address(uint160({int(v, 16)}))"
    if t.kind == "fixed_bytes":
        return f"bytes{t.number_of_bytes}({v})"
    if t.kind == "string":
        return f'string(hex"{v.encode("utf-8").hex()}")'
    if t.kind == "bytes":
        return f'hex"{v[2:]}"'
    raise ValueError(f"no literal for {t.label}")


def assign(layout, lhs, tid, v, out):
    t = layout.types[tid]
    if t.kind == "struct":
        for m in t.members:
            assign(layout, f"{lhs}.{m.label}", m.type_id, v[m.label], out)
    elif t.kind == "array" and t.length is not None:
        for i, x in enumerate(v):
            assign(layout, f"{lhs}[{i}]", t.base, x, out)
    elif t.kind == "array":
        for i, x in enumerate(v):
            out.append(f"{lhs}.push();")
            assign(layout, f"{lhs}[{i}]", t.base, x, out)
    elif t.kind == "mapping":
        for k, x in v.items():
            assign(layout, f"{lhs}[{literal(layout, t.key, k)}]", t.value, x, out)
    else:
        out.append(f"{lhs} = {literal(layout, tid, v)};")


def render(decls, layout, values):
    body = []
    for e in layout.elements:
        assign(layout, e.label, e.type_id, values[e.label], body)
    ctor = "\n".join("        " + s for s in body)
    return (f"// SPDX-License-Identifier: MIT\npragma solidity ^0.8.20;\n\ncontract Seed {{\n{decls}\n\n"
            f"    constructor() {{\n{ctor}\n    }}\n}}\n")


def cases():
    rng = random.Random(20240602)
    yield "packed_pair", "    uint128 a;\n    uint128 b;", {"a": 1, "b": 2}
    yield "single_balance", fixture_decls("erc20"), {
        "_balances": {"0x" + "11" * 20: 100}, "_allowances": {}, "_totalSupply": 0, "_name": "", "_symbol": ""}
    yield "kitchen_1", KITCHEN_DECLS, kitchen_values(rng)
    yield "kitchen_2", KITCHEN_DECLS, kitchen_values(rng)
    yield "kitchen_3", KITCHEN_DECLS, kitchen_values(rng)
    yield "erc20_short_name", fixture_decls("erc20"), random_erc20_values(rng, 12, 6, (31, 31))
    yield "erc20_long_name", fixture_decls("erc20"), random_erc20_values(rng, 12, 6, (32, 32))
    yield "erc721", fixture_decls("erc721"), erc721_values(rng)
    yield "erc1155", fixture_decls("erc1155"), random_erc1155_values(rng, token_ids=5, holders=6, operator_pairs=3)


def main() -> int:
    docs, predicted = {}, {}
    with tempfile.TemporaryDirectory() as tmp:
        files = []
        for name, decls, raw in cases():
            layout = compute_layout(parse_source(f"contract Seed {{\n{decls}\n}}"))
            values = normalize_values(layout, raw)
            keys = KeyEnumeration.from_values(layout, values)
            source = render(decls, layout, values)
            path = Path(tmp) / f"{name}.sol"
            path.write_text(source)
            files.append(str(path))
            docs[name] = {"source": source, "values": values, "keys": keys.to_json()}
            predicted[name] = encode_state(layout, values, keys).to_dict()
        compiled = subprocess.run(["node", "solc_bytecode.js", *files], cwd=TOOLS, check=True,
                                  capture_output=True, text=True)
    failures = 0
    for file, code in json.loads(compiled.stdout).items():
        name = file[:-4]
        storage, runtime = run_constructor(bytes.fromhex(code[2:]))
        assert runtime, f"{name}: constructor returned no runtime code"
        docs[name]["storage"] = {"0x" + format(k, "064x"): "0x" + format(v, "064x") for k, v in sorted(storage.items())}
        same = storage == predicted[name]
        failures += not same
        # the golden is what the EVM wrote, whether or not it agrees with us
        print(f"{name}: {len(storage)} slots, encoder {'agrees' if same else 'DISAGREES'}")
    OUT.write_text(json.dumps(docs, indent=2, sort_keys=True) + "\n")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
