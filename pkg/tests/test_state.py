import json

import pytest
from hypothesis import given, settings, strategies as st

from statemigrate.errors import IntegrityError, StateError
from statemigrate.frontend import parse_source
from statemigrate.layout import compute_layout, dynamic_data_slot, mapping_slot, pad32
from statemigrate.state import (
    KeyEnumeration,
    Snapshot,
    decode_state,
    encode_state,
    generate_shards,
    normalize_values,
    shards_cover,
)

from statemigrate.fixtures import bundled_source

from conftest import GOLDENS, erc20_state

A1 = "0x" + "11" * 20
A2 = "0x" + "22" * 20
A3 = "0x" + "33" * 20


def layout_of(src):
    return compute_layout(parse_source(src))


def test_empty_values_give_empty_snapshot(erc20):
    assert len(encode_state(erc20.layout, {})) == 0


def test_packed_halves_share_a_slot():
    layout = layout_of("contract A { uint128 a; uint128 b; }")
    snap = encode_state(layout, {"a": 1, "b": 2})
    assert snap.to_dict() == {0: (2 << 128) | 1}


def test_single_balance_lands_at_derived_slot(erc20):
    keys = KeyEnumeration.from_json({"_balances": [A1]})
    snap = encode_state(erc20.layout, {"_balances": {A1: 100}}, keys)
    assert snap.to_dict() == {mapping_slot(0, pad32(int(A1, 16))): 100}


@pytest.mark.parametrize("n", [0, 1, 31])
def test_short_string_inline(n):
    layout = layout_of("contract A { string s; }")
    snap = encode_state(layout, {"s": "x" * n})
    if n == 0:
        assert len(snap) == 0
    else:
        assert snap.to_dict() == {0: int.from_bytes(b"x" * n + b"\0" * (32 - n), "big") | (2 * n)}


@pytest.mark.parametrize("n", [32, 33, 64, 65])
def test_long_string_out_of_line(n):
    layout = layout_of("contract A { string s; }")
    snap = encode_state(layout, {"s": "y" * n})
    base = dynamic_data_slot(0)
    expected = {0: 2 * n + 1}
    data = b"y" * n
    for i in range(0, n, 32):
        expected[base + i // 32] = int.from_bytes(data[i:i + 32].ljust(32, b"\0"), "big")
    assert snap.to_dict() == expected


def test_decode_of_empty_snapshot_gives_defaults(erc20):
    assert decode_state(erc20.layout, Snapshot()) == {
        "_balances": {}, "_allowances": {}, "_totalSupply": 0, "_name": "", "_symbol": "",
    }


def test_decode_reports_enumerated_zero_entries(erc20):
    keys = KeyEnumeration.from_json({"_balances": [A1]})
    assert decode_state(erc20.layout, Snapshot(), keys)["_balances"] == {A1: 0}


def test_malformed_long_string_marker():
    layout = layout_of("contract A { string s; }")
    with pytest.raises(StateError, match="malformed"):
        decode_state(layout, Snapshot({0: 2 * 5 + 1}))  # long form claiming 5 bytes
    with pytest.raises(StateError, match="malformed"):
        decode_state(layout, Snapshot({0: 2 * (1 << 40) + 1}))


def test_malformed_short_string_marker():
    layout = layout_of("contract A { string s; }")
    with pytest.raises(StateError, match="malformed"):
        decode_state(layout, Snapshot({0: 2 * 40}))


@pytest.mark.parametrize("values, message", [
    ({"_totalSupply": -1}, "does not fit"),
    ({"_totalSupply": 1 << 256}, "does not fit"),
    ({"_totalSupply": "lots"}, "expected integer"),
    ({"_name": 5}, "expected string"),
    ({"_balances": {"0x12": 1}}, "expected 20 bytes"),
    ({"_nope": 1}, "unknown variables"),
])
def test_encode_rejects_bad_values(erc20, values, message):
    with pytest.raises(StateError, match=message):
        encode_state(erc20.layout, values)


def test_encode_requires_enumerated_keys(erc20):
    with pytest.raises(StateError, match="missing from enumeration"):
        encode_state(erc20.layout, {"_balances": {A1: 1}})


def test_key_path_depth_checked(erc20):
    with pytest.raises(StateError, match="needs 2 keys"):
        encode_state(erc20.layout, {}, KeyEnumeration.from_json({"_allowances": [A1]}))


def test_mapping_inside_struct_unsupported():
    layout = layout_of("contract A { struct S { mapping(uint => uint) m; } S s; }")
    with pytest.raises(StateError, match="not supported"):
        encode_state(layout, {"s": {"m": {1: 2}}})


def test_snapshot_json_round_trip_and_zero_dropping():
    snap = Snapshot({1: 5, 2: 0, 1 << 255: (1 << 256) - 1})
    assert len(snap) == 2
    doc = snap.to_json()
    assert doc == {"slots": {
        "0x" + "0" * 63 + "1": "0x" + "0" * 63 + "5",
        "0x8" + "0" * 63: "0x" + "f" * 64,
    }}
    assert Snapshot.from_json(doc) == snap


@pytest.mark.parametrize("doc", [{}, {"slots": {"0x1": "zz"}}, {"slots": {"0x1": "0x1" + "0" * 64}}])
def test_snapshot_json_rejects_garbage(doc):
    with pytest.raises(StateError):
        Snapshot.from_json(doc)


def test_key_enumeration_json_round_trip():
    doc = {"_balances": [A1, A2], "nested": {"_allowances": [[A1, A2], [A2, A3]]}}
    assert KeyEnumeration.from_json(doc).to_json() == doc


def test_keys_normalized_from_literals():
    layout = layout_of("contract A { mapping(uint256 => bool) m; mapping(bool => uint8) b; }")
    keys = KeyEnumeration.from_json({"m": ["0x10", "16", 3], "b": ["true"]})
    values = decode_state(layout, encode_state(layout, {"m": {16: True}, "b": {True: 9}}, keys), keys)
    assert values == {"m": {16: True, 3: False}, "b": {True: 9}}


# every supported type at once

KITCHEN = """
contract K {
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
}
"""
KITCHEN_LAYOUT = layout_of(KITCHEN)

_addr = st.binary(min_size=20, max_size=20).map(lambda b: "0x" + b.hex())
_b4 = st.binary(min_size=4, max_size=4).map(lambda b: "0x" + b.hex())
_point = st.fixed_dictionaries({"a": st.integers(0, 255), "who": _addr, "tag": _b4})
# lengths straddle the 31/32-byte inline limit
_text = st.one_of(st.text(max_size=40), st.text(alphabet="ab", min_size=30, max_size=34))

KITCHEN_VALUES = st.fixed_dictionaries({
    "u8": st.integers(0, 255),
    "i16": st.integers(-(1 << 15), (1 << 15) - 1),
    "flag": st.booleans(),
    "owner": _addr,
    "sig": _b4,
    "big": st.integers(-(1 << 255), (1 << 255) - 1),
    "blob": st.binary(max_size=70).map(lambda b: "0x" + b.hex()),
    "text": _text,
    "small": st.lists(st.integers(0, (1 << 64) - 1), max_size=9),
    "fixed3": st.lists(st.integers(0, (1 << 256) - 1), min_size=3, max_size=3),
    "point": _point,
    "points": st.lists(_point, max_size=4),
    "byName": st.dictionaries(_text, st.integers(0, (1 << 256) - 1), max_size=4),
    "grid": st.dictionaries(st.integers(0, 1 << 256 - 1), st.dictionaries(_addr, st.booleans(), max_size=3), max_size=3),
    "people": st.dictionaries(_addr, _point, max_size=3),
    "signed": st.dictionaries(st.integers(-128, 127), st.integers(-128, 127), max_size=4),
})


@settings(max_examples=150, deadline=None)
@given(KITCHEN_VALUES)
def test_round_trip_all_types(values):
    layout = KITCHEN_LAYOUT
    canon = normalize_values(layout, values)
    keys = KeyEnumeration.from_values(layout, canon)
    snap = encode_state(layout, values, keys)
    assert decode_state(layout, snap, keys) == canon
    shards = generate_shards(layout, snap, keys)
    assert shards_cover(shards, snap)
    # the first four value types pack into slot 0 and migrate together
    assert shards[0].members == ("u8", "i16", "flag", "owner", "sig")


@pytest.mark.parametrize("seed", range(5))
def test_random_erc20_round_trip(erc20, seed):
    values, keys, snap = erc20_state(erc20.layout, seed, holders=32)
    assert decode_state(erc20.layout, snap, keys) == values


# shards

def test_single_value_one_shard():
    layout = layout_of("contract A { uint256 x; }")
    shards = generate_shards(layout, encode_state(layout, {"x": 7}))
    assert [(s.variable, s.slots) for s in shards] == [("x", ((0, 7),))]


def test_packed_pair_is_one_composite_shard():
    layout = layout_of("contract A { uint128 a; uint128 b; }")
    shards = generate_shards(layout, encode_state(layout, {"a": 1, "b": 2}))
    assert len(shards) == 1
    assert shards[0].members == ("a", "b")


def test_erc20_shard_sizes(erc20):
    values = {
        "_balances": {A1: 10, A2: 20, A3: 30},
        "_allowances": {A1: {A2: 1}, A2: {A3: 2}},
        "_totalSupply": 60,
        "_name": "Token",
        "_symbol": "TKN",
    }
    keys = KeyEnumeration.from_values(erc20.layout, normalize_values(erc20.layout, values))
    shards = generate_shards(erc20.layout, encode_state(erc20.layout, values, keys), keys)
    assert {s.variable: len(s.slots) for s in shards} == {
        "_balances": 3, "_allowances": 2, "_totalSupply": 1, "_name": 1, "_symbol": 1,
    }


def test_unknown_slot_is_an_integrity_error(erc20):
    values, keys, snap = erc20_state(erc20.layout, 0, holders=3, pairs=1)
    stray = Snapshot({**snap.to_dict(), 12345: 1})
    with pytest.raises(IntegrityError, match="unknown slot"):
        generate_shards(erc20.layout, stray, keys)


def test_unenumerated_entry_is_unattributable(erc20):
    values, keys, snap = erc20_state(erc20.layout, 0, holders=3, pairs=1)
    fewer = KeyEnumeration({**keys.paths, "_balances": keys.paths["_balances"][1:]})
    with pytest.raises(IntegrityError):
        generate_shards(erc20.layout, snap, fewer)


def test_empty_variables_get_empty_shards(erc20):
    shards = generate_shards(erc20.layout, Snapshot())
    assert [s.variable for s in shards] == list(erc20.layout.labels)
    assert all(s.slots == () for s in shards)


@pytest.mark.parametrize("seed", range(5))
def test_rebuild_from_shards(erc20, seed):
    _, keys, snap = erc20_state(erc20.layout, seed)
    rebuilt = {}
    for shard in generate_shards(erc20.layout, snap, keys):
        for slot, value in shard.slots:
            assert slot not in rebuilt
            rebuilt[slot] = value
    assert Snapshot(rebuilt) == snap


# Storage written by solc-compiled constructors, executed outside this package
# (tools/regen_evm_goldens.py). The goldens hold what the EVM stored.

EVM = json.loads((GOLDENS / "evm_storage.json").read_text())


@pytest.mark.parametrize("case", sorted(EVM))
def test_encoding_matches_compiled_constructor(case):
    doc = EVM[case]
    layout = compute_layout(parse_source(doc["source"]))
    keys = KeyEnumeration.from_json(doc["keys"])
    expected = Snapshot.from_json({"slots": doc["storage"]})
    snap = encode_state(layout, doc["values"], keys)
    assert snap == expected
    assert decode_state(layout, expected, keys) == normalize_values(layout, doc["values"])
    assert shards_cover(generate_shards(layout, expected, keys), expected)


@pytest.mark.parametrize("case, standard", [("single_balance", "erc20"), ("erc20_short_name", "erc20"),
                                            ("erc721", "erc721"), ("erc1155", "erc1155")])
def test_oracle_contracts_share_the_fixture_layout(case, standard):
    oracle = compute_layout(parse_source(EVM[case]["source"]))
    fixture = compute_layout(parse_source(bundled_source(standard)))
    assert oracle.to_json() == fixture.to_json()


def test_evm_packed_pair():
    assert EVM["packed_pair"]["storage"] == {"0x" + "00" * 32: "0x" + format(2 << 128 | 1, "064x")}


def test_evm_single_balance():
    slot = mapping_slot(0, pad32(int("11" * 20, 16)))
    assert EVM["single_balance"]["storage"] == {"0x" + format(slot, "064x"): "0x" + format(100, "064x")}


def test_evm_cases_cross_the_inline_string_limit():
    lengths = {len(EVM[c]["values"]["_name"].encode()) for c in ("erc20_short_name", "erc20_long_name")}
    assert lengths == {31, 32}
