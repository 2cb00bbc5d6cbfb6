"""Slot-level contract state: snapshots, value encoding, and shards.

A :class:`Snapshot` is the sparse key/value view of storage (absent slot means
zero). :func:`encode_state` and :func:`decode_state` convert between that view
and ordinary Python values using a :class:`~statemigrate.layout.StorageLayout`.
:func:`generate_shards` partitions the occupied slots by owning variable.

Canonical Python values per type:

========================  ===============================================
uint / int                ``int``
bool                      ``bool``
address, bytesN, bytes    lowercase ``"0x..."`` hex string
string                    ``str``
fixed / dynamic array     ``list``
struct                    ``dict`` of member name to value
mapping                   ``dict`` of canonical key to value
========================  ===============================================

Mapping keys cannot be recovered from storage, so every operation that reads
mappings takes a :class:`KeyEnumeration` listing the keys to visit.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Any, Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Set, Tuple

from .errors import IntegrityError, StateError
from .layout import (
    SLOT_MODULUS,
    StorageLayout,
    TypeInfo,
    array_element_position,
    dynamic_data_slot,
    mapping_slot,
    pad32,
)

__all__ = [
    "Snapshot",
    "KeyEnumeration",
    "Shard",
    "encode_state",
    "decode_state",
    "generate_shards",
    "attributed_slots",
    "normalize_values",
    "shards_cover",
]

# refuse to walk absurd lengths read from a corrupt snapshot
MAX_DYNAMIC_LENGTH = 1 << 20


def _hex32(value: int) -> str:
    return "0x" + format(value, "064x")


def _parse_word(text: Any, what: str) -> int:
    if isinstance(text, int) and not isinstance(text, bool):
        value = text
    elif isinstance(text, str):
        try:
            value = int(text, 16) if text.lower().startswith("0x") else int(text)
        except ValueError:
            raise StateError(f"{what} {text!r} is not a number") from None
    else:
        raise StateError(f"{what} {text!r} is not a number")
    if not 0 <= value < SLOT_MODULUS:
        raise StateError(f"{what} {text!r} does not fit in 32 bytes")
    return value


class Snapshot:
    """Sparse map from slot to 32-byte word; zero words are never stored."""

    __slots__ = ("_entries",)

    def __init__(self, entries: Optional[Mapping[int, int]] = None):
        clean = {}
        for slot, value in (entries or {}).items():
            if not (0 <= slot < SLOT_MODULUS and 0 <= value < SLOT_MODULUS):
                raise StateError(f"slot {slot:#x} or its value is outside 256 bits")
            if value:
                clean[slot] = value
        self._entries = dict(sorted(clean.items()))

    def __getitem__(self, slot: int) -> int:
        return self._entries.get(slot, 0)

    def __contains__(self, slot: int) -> bool:
        return slot in self._entries

    def __iter__(self) -> Iterator[int]:
        return iter(self._entries)

    def __len__(self) -> int:
        return len(self._entries)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Snapshot):
            return NotImplemented
        return self._entries == other._entries

    def __repr__(self) -> str:
        return f"Snapshot({len(self)} slots)"

    def items(self):
        return self._entries.items()

    def to_dict(self) -> Dict[int, int]:
        return dict(self._entries)

    def restrict(self, slots: Iterable[int]) -> "Snapshot":
        keep = set(slots)
        return Snapshot({k: v for k, v in self._entries.items() if k in keep})

    def to_json(self) -> dict:
        return {"slots": {_hex32(k): _hex32(v) for k, v in self._entries.items()}}

    @classmethod
    def from_json(cls, doc: Mapping) -> "Snapshot":
        if not isinstance(doc, Mapping) or not isinstance(doc.get("slots"), Mapping):
            raise StateError('snapshot must be an object with a "slots" map')
        return cls({_parse_word(k, "slot"): _parse_word(v, "value") for k, v in doc["slots"].items()})

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True) + "\n"


# -- canonical values ------------------------------------------------------------


class _Codec:
    def __init__(self, layout: StorageLayout):
        self.layout = layout
        self.types = layout.types

    # normalization

    def normalize(self, tid: str, value: Any, where: str) -> Any:
        t = self.types[tid]
        kind = t.kind
        if kind == "uint":
            v = self._int(value, where)
            if not 0 <= v < (1 << t.bits):
                raise StateError(f"{where}: {v} does not fit in {t.label}")
            return v
        if kind == "int":
            v = self._int(value, where)
            half = 1 << (t.bits - 1)
            if not -half <= v < half:
                raise StateError(f"{where}: {v} does not fit in {t.label}")
            return v
        if kind == "bool":
            if isinstance(value, bool):
                return value
            raise StateError(f"{where}: expected bool, got {value!r}")
        if kind == "address":
            v = self._hexish(value, where, 20, numeric=True)
            return v
        if kind == "fixed_bytes":
            return self._hexish(value, where, t.number_of_bytes)
        if kind == "string":
            if not isinstance(value, str):
                raise StateError(f"{where}: expected string, got {value!r}")
            return value
        if kind == "bytes":
            return self._hexish(value, where, None)
        if kind == "array":
            if not isinstance(value, (list, tuple)):
                raise StateError(f"{where}: expected list, got {type(value).__name__}")
            if t.length is not None and len(value) != t.length:
                raise StateError(f"{where}: expected {t.length} elements, got {len(value)}")
            return [self.normalize(t.base, v, f"{where}[{i}]") for i, v in enumerate(value)]
        if kind == "struct":
            if not isinstance(value, Mapping):
                raise StateError(f"{where}: expected struct object, got {type(value).__name__}")
            names = {m.label for m in t.members}
            unknown = set(value) - names
            if unknown:
                raise StateError(f"{where}: unknown struct members {sorted(unknown)}")
            return {
                m.label: self.normalize(m.type_id, value[m.label], f"{where}.{m.label}")
                if m.label in value else self.default(m.type_id)
                for m in t.members
            }
        if kind == "mapping":
            if not isinstance(value, Mapping):
                raise StateError(f"{where}: expected mapping object, got {type(value).__name__}")
            out = {}
            nested = self.types[t.value].kind == "mapping"
            for k, v in value.items():
                key = self.normalize_key(t.key, k, where)
                v = self.normalize(t.value, v, f"{where}[{k!r}]")
                if nested and not v:
                    continue  # an empty inner mapping holds no entries to enumerate
                out[key] = v
            return out
        raise StateError(f"{where}: unsupported type {t.label}")

    def normalize_key(self, tid: str, key: Any, where: str) -> Any:
        t = self.types[tid]
        if t.kind in ("uint", "int") and isinstance(key, str):
            key = self._int(key, where)
        if t.kind == "bool" and isinstance(key, str):
            if key not in ("true", "false"):
                raise StateError(f"{where}: bad bool key {key!r}")
            key = key == "true"
        return self.normalize(tid, key, f"{where} key")

    @staticmethod
    def _int(value: Any, where: str) -> int:
        if isinstance(value, bool):
            raise StateError(f"{where}: expected integer, got bool")
        if isinstance(value, int):
            return value
        if isinstance(value, str):
            try:
                text = value.strip()
                neg = text.startswith("-")
                body = text[1:] if neg else text
                v = int(body, 16) if body.lower().startswith("0x") else int(body, 10)
                return -v if neg else v
            except ValueError:
                pass
        raise StateError(f"{where}: expected integer, got {value!r}")

    @staticmethod
    def _hexish(value: Any, where: str, size: Optional[int], numeric: bool = False) -> str:
        if numeric and isinstance(value, int) and not isinstance(value, bool):
            if not 0 <= value < (1 << (8 * size)):
                raise StateError(f"{where}: {value} does not fit in {size} bytes")
            return "0x" + format(value, f"0{2 * size}x")
        if isinstance(value, (bytes, bytearray)):
            raw = bytes(value)
        elif isinstance(value, str):
            text = value[2:] if value.lower().startswith("0x") else value
            try:
                raw = bytes.fromhex(text)
            except ValueError:
                raise StateError(f"{where}: {value!r} is not hex") from None
        else:
            raise StateError(f"{where}: expected hex string, got {value!r}")
        if size is not None and len(raw) != size:
            raise StateError(f"{where}: expected {size} bytes, got {len(raw)}")
        return "0x" + raw.hex()

    def default(self, tid: str) -> Any:
        t = self.types[tid]
        kind = t.kind
        if kind in ("uint", "int"):
            return 0
        if kind == "bool":
            return False
        if kind == "address":
            return "0x" + "00" * 20
        if kind == "fixed_bytes":
            return "0x" + "00" * t.number_of_bytes
        if kind == "string":
            return ""
        if kind == "bytes":
            return "0x"
        if kind == "array":
            return [] if t.length is None else [self.default(t.base) for _ in range(t.length)]
        if kind == "struct":
            return {m.label: self.default(m.type_id) for m in t.members}
        if kind == "mapping":
            return {}
        raise StateError(f"unsupported type {t.label}")

    # word-level conversion of value types

    @staticmethod
    def to_word(t: TypeInfo, v: Any) -> int:
        if t.kind == "uint":
            return v
        if t.kind == "int":
            return v & ((1 << t.bits) - 1)
        if t.kind == "bool":
            return int(v)
        return int(v, 16)  # address / fixed bytes hex strings

    @staticmethod
    def from_word(t: TypeInfo, x: int) -> Any:
        if t.kind == "uint":
            return x
        if t.kind == "int":
            return x - (1 << t.bits) if x >> (t.bits - 1) else x
        if t.kind == "bool":
            return x != 0
        return "0x" + format(x, f"0{2 * t.number_of_bytes}x")

    def key_bytes(self, tid: str, key: Any) -> bytes:
        t = self.types[tid]
        if t.kind == "string":
            return key.encode("utf-8")
        if t.kind == "bytes":
            return bytes.fromhex(key[2:])
        if t.kind == "fixed_bytes":
            return bytes.fromhex(key[2:]).ljust(32, b"\x00")
        if t.kind == "int":
            return pad32(key)
        return pad32(self.to_word(t, key))

    # encoding

    def encode(self, tid: str, value: Any, slot: int, offset: int, words: Dict[int, int],
               keys: Optional[dict], where: str):
        t = self.types[tid]
        if t.is_value_type:
            x = self.to_word(t, value)
            if x:
                words[slot] = words.get(slot, 0) | (x << (8 * offset))
        elif t.kind in ("string", "bytes"):
            data = value.encode("utf-8") if t.kind == "string" else bytes.fromhex(value[2:])
            n = len(data)
            if n < 32:
                word = int.from_bytes(data.ljust(32, b"\x00"), "big") | (2 * n)
                if word:
                    words[slot] = word
            else:
                words[slot] = 2 * n + 1
                base = dynamic_data_slot(slot)
                for i in range(0, n, 32):
                    chunk = int.from_bytes(data[i:i + 32].ljust(32, b"\x00"), "big")
                    if chunk:
                        words[(base + i // 32) % SLOT_MODULUS] = chunk
        elif t.kind == "array":
            base_t = self.types[t.base]
            if t.length is None:
                if value:
                    words[slot] = len(value)
                start = dynamic_data_slot(slot)
            else:
                start = slot
            for i, item in enumerate(value):
                s, o = array_element_position(base_t, start, i)
                self.encode(t.base, item, s % SLOT_MODULUS, o, words, None, f"{where}[{i}]")
        elif t.kind == "struct":
            for m in t.members:
                self.encode(m.type_id, value[m.label], (slot + m.slot) % SLOT_MODULUS, m.offset,
                            words, None, f"{where}.{m.label}")
        elif t.kind == "mapping":
            if keys is None:
                raise StateError(f"{where}: mappings nested in arrays or structs are not supported")
            for k, v in value.items():
                if k not in keys:
                    raise StateError(f"{where}: key {k!r} missing from enumeration")
                s = mapping_slot(slot, self.key_bytes(t.key, k))
                self.encode(t.value, v, s, 0, words, keys[k], f"{where}[{k!r}]")
        else:
            raise StateError(f"{where}: unsupported type {t.label}")

    # decoding

    def decode(self, tid: str, snapshot: Snapshot, slot: int, offset: int, keys: Optional[dict],
               touched: Optional[List[int]], where: str) -> Any:
        t = self.types[tid]
        if touched is not None:
            touched.append(slot)
        if t.is_value_type:
            word = snapshot[slot]
            x = (word >> (8 * offset)) & ((1 << (8 * t.number_of_bytes)) - 1)
            return self.from_word(t, x)
        if t.kind in ("string", "bytes"):
            word = snapshot[slot]
            if word & 1 == 0:
                n = (word & 0xFF) // 2
                if n > 31:
                    raise StateError(f"{where}: malformed short byte-string length marker {word & 0xFF:#x}")
                data = word.to_bytes(32, "big")[:n]
            else:
                n = (word - 1) // 2
                if n < 32 or n > MAX_DYNAMIC_LENGTH:
                    raise StateError(f"{where}: malformed long byte-string length marker {word:#x}")
                base = dynamic_data_slot(slot)
                chunks = []
                for i in range((n + 31) // 32):
                    s = (base + i) % SLOT_MODULUS
                    if touched is not None:
                        touched.append(s)
                    chunks.append(snapshot[s].to_bytes(32, "big"))
                data = b"".join(chunks)[:n]
            if t.kind == "bytes":
                return "0x" + data.hex()
            try:
                return data.decode("utf-8")
            except UnicodeDecodeError:
                raise StateError(f"{where}: stored string is not valid UTF-8") from None
        if t.kind == "array":
            base_t = self.types[t.base]
            if t.length is None:
                n = snapshot[slot]
                if n > MAX_DYNAMIC_LENGTH:
                    raise StateError(f"{where}: implausible dynamic array length {n}")
                start = dynamic_data_slot(slot)
            else:
                n = t.length
                start = slot
            out = []
            for i in range(n):
                s, o = array_element_position(base_t, start, i)
                out.append(self.decode(t.base, snapshot, s % SLOT_MODULUS, o, None, touched, f"{where}[{i}]"))
            return out
        if t.kind == "struct":
            return {
                m.label: self.decode(m.type_id, snapshot, (slot + m.slot) % SLOT_MODULUS, m.offset, None,
                                     touched, f"{where}.{m.label}")
                for m in t.members
            }
        if t.kind == "mapping":
            if touched is not None:
                touched.pop()  # the head slot of a mapping holds nothing
            if keys is None:
                raise StateError(f"{where}: mappings nested in arrays or structs are not supported")
            out = {}
            for k, sub in keys.items():
                s = mapping_slot(slot, self.key_bytes(t.key, k))
                out[k] = self.decode(t.value, snapshot, s, 0, sub, touched, f"{where}[{k!r}]")
            return out
        raise StateError(f"{where}: unsupported type {t.label}")


# -- key enumeration -------------------------------------------------------------


def _mapping_depth(layout: StorageLayout, tid: str) -> int:
    depth = 0
    t = layout.types[tid]
    while t.kind == "mapping":
        depth += 1
        t = layout.types[t.value]
    return depth


@dataclass(frozen=True)
class KeyEnumeration:
    """Concrete mapping keys per variable, as key paths (one key per nesting level)."""

    paths: Mapping[str, Tuple[Tuple[Any, ...], ...]]

    @classmethod
    def empty(cls) -> "KeyEnumeration":
        return cls({})

    @classmethod
    def from_json(cls, doc: Mapping) -> "KeyEnumeration":
        if not isinstance(doc, Mapping):
            raise StateError("key enumeration must be a JSON object")
        paths: Dict[str, Tuple[Tuple[Any, ...], ...]] = {}
        for label, keys in doc.items():
            if label == "nested":
                if not isinstance(keys, Mapping):
                    raise StateError('"nested" must map variable labels to key paths')
                for inner, rows in keys.items():
                    if not all(isinstance(r, (list, tuple)) for r in rows):
                        raise StateError(f"nested keys for {inner!r} must be lists of key paths")
                    paths[inner] = paths.get(inner, ()) + tuple(tuple(r) for r in rows)
            else:
                if not isinstance(keys, (list, tuple)):
                    raise StateError(f"keys for {label!r} must be a list")
                paths[label] = paths.get(label, ()) + tuple((k,) for k in keys)
        return cls(paths)

    def to_json(self) -> dict:
        flat: Dict[str, Any] = {}
        nested: Dict[str, Any] = {}
        for label in sorted(self.paths):
            rows = self.paths[label]
            if rows and all(len(r) == 1 for r in rows):
                flat[label] = [r[0] for r in rows]
            else:
                nested[label] = [list(r) for r in rows]
        if nested:
            flat["nested"] = nested
        return flat

    @classmethod
    def from_values(cls, layout: StorageLayout, values: Mapping[str, Any]) -> "KeyEnumeration":
        """Collect every key path present in a (normalized) value map."""
        paths: Dict[str, Tuple[Tuple[Any, ...], ...]] = {}
        for e in layout.elements:
            t = layout.types[e.type_id]
            if t.kind != "mapping" or e.label not in values:
                continue
            rows: List[Tuple[Any, ...]] = []

            def walk(tid: str, value: Any, prefix: Tuple[Any, ...]):
                tt = layout.types[tid]
                if tt.kind != "mapping":
                    rows.append(prefix)
                    return
                for k, v in value.items():
                    walk(tt.value, v, prefix + (k,))

            walk(e.type_id, values[e.label], ())
            paths[e.label] = tuple(r for r in rows if r)
        return cls(paths)

    def tree(self, layout: StorageLayout, label: str, codec: Optional[_Codec] = None) -> dict:
        """Normalized nested ``{key: subtree}`` dict for one mapping variable."""
        codec = codec or _Codec(layout)
        tid = layout.element(label).type_id
        depth = _mapping_depth(layout, tid)
        root: dict = {}
        for path in self.paths.get(label, ()):
            if len(path) != depth:
                raise StateError(f"key path {list(path)!r} for {label!r} needs {depth} keys")
            node = root
            t = layout.types[tid]
            for i, raw in enumerate(path):
                key = codec.normalize_key(t.key, raw, label)
                if i == depth - 1:
                    node.setdefault(key, None)
                else:
                    node = node.setdefault(key, {})
                t = layout.types[t.value]
        return root


def _keys_for(layout: StorageLayout, keys: KeyEnumeration, codec: _Codec) -> Dict[str, dict]:
    unknown = set(keys.paths) - set(layout.labels)
    if unknown:
        raise StateError(f"key enumeration names unknown variables {sorted(unknown)}")
    out = {}
    for e in layout.elements:
        if layout.types[e.type_id].kind == "mapping":
            out[e.label] = keys.tree(layout, e.label, codec)
    return out


def normalize_values(layout: StorageLayout, values: Mapping[str, Any]) -> Dict[str, Any]:
    """Canonical form of ``values`` with defaults filled in for absent variables."""
    codec = _Codec(layout)
    unknown = set(values) - set(layout.labels)
    if unknown:
        raise StateError(f"values name unknown variables {sorted(unknown)}")
    return {
        e.label: codec.normalize(e.type_id, values[e.label], e.label) if e.label in values
        else codec.default(e.type_id)
        for e in layout.elements
    }


def encode_state(layout: StorageLayout, values: Mapping[str, Any],
                 keys: Optional[KeyEnumeration] = None) -> Snapshot:
    """Encode high-level values into a slot snapshot."""
    codec = _Codec(layout)
    values = normalize_values(layout, values)
    trees = _keys_for(layout, keys or KeyEnumeration.empty(), codec)
    words: Dict[int, int] = {}
    for e in layout.elements:
        codec.encode(e.type_id, values[e.label], e.slot, e.offset, words, trees.get(e.label), e.label)
    return Snapshot(words)


def decode_state(layout: StorageLayout, snapshot: Snapshot,
                 keys: Optional[KeyEnumeration] = None) -> Dict[str, Any]:
    """Read every variable back out of ``snapshot``; only enumerated mapping keys are visited."""
    codec = _Codec(layout)
    trees = _keys_for(layout, keys or KeyEnumeration.empty(), codec)
    return {
        e.label: codec.decode(e.type_id, snapshot, e.slot, e.offset, trees.get(e.label), None, e.label)
        for e in layout.elements
    }


# -- shards ----------------------------------------------------------------------


@dataclass(frozen=True)
class Shard:
    """All occupied slots of one variable, or of one group of variables packed into a slot."""

    variable: str
    slots: Tuple[Tuple[int, int], ...]
    members: Tuple[str, ...]

    @property
    def slot_keys(self) -> Tuple[int, ...]:
        return tuple(s for s, _ in self.slots)


def _slot_groups(layout: StorageLayout) -> List[List[str]]:
    """Variables grouped so that value types sharing a slot end up together."""
    groups: List[List[str]] = []
    by_slot: Dict[int, List[str]] = {}
    for e in layout.elements:
        t = layout.types[e.type_id]
        if t.is_value_type:
            if e.slot in by_slot:
                by_slot[e.slot].append(e.label)
                continue
            by_slot[e.slot] = [e.label]
            groups.append(by_slot[e.slot])
        else:
            groups.append([e.label])
    return groups


def attributed_slots(layout: StorageLayout, snapshot: Snapshot,
                     keys: Optional[KeyEnumeration] = None) -> Dict[int, str]:
    """Every slot the layout can attribute to a variable, mapped to that variable's label.

    Lengths of dynamic arrays and long strings are read from ``snapshot``.
    Raises :class:`IntegrityError` if two different slot groups claim a slot.
    """
    codec = _Codec(layout)
    trees = _keys_for(layout, keys or KeyEnumeration.empty(), codec)
    owner: Dict[int, str] = {}
    group_of = {label: tuple(g) for g in _slot_groups(layout) for label in g}
    for e in layout.elements:
        touched: List[int] = []
        codec.decode(e.type_id, snapshot, e.slot, e.offset, trees.get(e.label), touched, e.label)
        for s in touched:
            prev = owner.get(s)
            if prev is not None and group_of[prev] != group_of[e.label]:
                raise IntegrityError(f"slot {_hex32(s)} claimed by both {prev!r} and {e.label!r}")
            owner.setdefault(s, e.label)
    return owner


def generate_shards(layout: StorageLayout, snapshot: Snapshot,
                    keys: Optional[KeyEnumeration] = None) -> List[Shard]:
    """Partition the occupied slots of ``snapshot`` into per-variable shards.

    Variables packed into a shared slot form a single composite shard, since a
    slot can only be written whole. Variables with no occupied slots still get
    an (empty) shard.
    """
    codec = _Codec(layout)
    trees = _keys_for(layout, keys or KeyEnumeration.empty(), codec)
    claimed: Dict[int, str] = {}
    shards = []
    for group in _slot_groups(layout):
        ordered: List[int] = []
        seen: Set[int] = set()
        for label in group:
            e = layout.element(label)
            touched: List[int] = []
            codec.decode(e.type_id, snapshot, e.slot, e.offset, trees.get(label), touched, label)
            for s in touched:
                if s in seen or s not in snapshot:
                    continue
                if s in claimed:
                    raise IntegrityError(f"slot {_hex32(s)} claimed by both {claimed[s]!r} and {label!r}")
                seen.add(s)
                ordered.append(s)
        for s in ordered:
            claimed[s] = group[0]
        shards.append(Shard(group[0], tuple((s, snapshot[s]) for s in ordered), tuple(group)))
    stray = [s for s in snapshot if s not in claimed]
    if stray:
        listed = ", ".join(_hex32(s) for s in stray[:5])
        more = f" (+{len(stray) - 5} more)" if len(stray) > 5 else ""
        raise IntegrityError(f"unknown slot(s) not attributable to any variable: {listed}{more}")
    return shards


def shards_cover(shards: Sequence[Shard], snapshot: Snapshot) -> bool:
    """True iff the shards are pairwise disjoint and together equal the snapshot."""
    seen: Dict[int, int] = {}
    for shard in shards:
        for s, v in shard.slots:
            if s in seen:
                return False
            seen[s] = v
    return Snapshot(seen) == snapshot and len(seen) == len(snapshot)

