"""Storage layout: slot and byte-offset placement of state variables.

Follows the compiler's rules for storage:

* value types are packed into 32-byte slots in declaration order, starting a
  new slot when the next item does not fit;
* structs and fixed-size arrays start a fresh slot and round up to whole slots,
  and whatever follows them also starts a fresh slot;
* mappings, dynamic arrays and ``bytes``/``string`` take exactly one head slot.
  Mapping entries live at ``keccak256(key . pad32(head))``; dynamic array and
  long byte-string data lives from ``keccak256(pad32(head))`` on.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from .errors import LayoutError
from .frontend import ast
from .keccak import keccak256_int

__all__ = [
    "DataElement",
    "TypeInfo",
    "StorageLayout",
    "compute_layout",
    "mapping_slot",
    "dynamic_data_slot",
    "pad32",
    "element_stride",
    "array_element_position",
    "SLOT_MODULUS",
]

SLOT_MODULUS = 1 << 256


def pad32(value: int) -> bytes:
    return (value % SLOT_MODULUS).to_bytes(32, "big")


def mapping_slot(head_slot: int, key: bytes) -> int:
    """Slot of ``m[key]`` for a mapping whose head is at ``head_slot``.

    ``key`` must already be encoded: value types padded to 32 bytes,
    strings and ``bytes`` as their raw contents.
    """
    return keccak256_int(bytes(key) + pad32(head_slot))


def dynamic_data_slot(head_slot: int) -> int:
    """First data slot of a dynamic array or long byte string."""
    return keccak256_int(pad32(head_slot))


@dataclass(frozen=True)
class DataElement:
    label: str
    type_id: str
    slot: int
    offset: int


@dataclass(frozen=True)
class TypeInfo:
    type_id: str
    label: str
    encoding: str  # inplace | mapping | dynamic_array | bytes
    number_of_bytes: int
    kind: str  # uint int bool address fixed_bytes string bytes mapping array struct
    bits: int = 0  # integer width, uint/int only
    base: Optional[str] = None  # array element type
    key: Optional[str] = None  # mapping key type
    value: Optional[str] = None  # mapping value type
    length: Optional[int] = None  # fixed array length
    members: Optional[Tuple[DataElement, ...]] = None  # struct members, slots relative

    @property
    def is_value_type(self) -> bool:
        return self.kind in ("uint", "int", "bool", "address", "fixed_bytes")

    @property
    def slot_count(self) -> int:
        return (self.number_of_bytes + 31) // 32

    def to_json(self) -> dict:
        out = {
            "encoding": self.encoding,
            "label": self.label,
            "numberOfBytes": str(self.number_of_bytes),
        }
        if self.base is not None:
            out["base"] = self.base
        if self.key is not None:
            out["key"] = self.key
        if self.value is not None:
            out["value"] = self.value
        if self.members is not None:
            out["members"] = [_element_json(m) for m in self.members]
        return out


def _element_json(e: DataElement) -> dict:
    return {"label": e.label, "offset": e.offset, "slot": str(e.slot), "type": e.type_id}


@dataclass(frozen=True)
class StorageLayout:
    elements: Tuple[DataElement, ...]
    types: Dict[str, TypeInfo] = field(hash=False)

    def element(self, label: str) -> DataElement:
        for e in self.elements:
            if e.label == label:
                return e
        raise KeyError(label)

    def type_of(self, label: str) -> TypeInfo:
        return self.types[self.element(label).type_id]

    @property
    def labels(self) -> Tuple[str, ...]:
        return tuple(e.label for e in self.elements)

    def to_json(self) -> dict:
        return {
            "storage": [_element_json(e) for e in self.elements],
            "types": {tid: self.types[tid].to_json() for tid in sorted(self.types)},
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True) + "\n"


class _TypeBuilder:
    def __init__(self, contract: ast.ContractUnit):
        self.contract = contract
        self.types: Dict[str, TypeInfo] = {}
        self._in_progress: set = set()

    def info(self, t: ast.TypeName, mapping_key: bool = False) -> TypeInfo:
        if isinstance(t, ast.ElementaryType):
            info = self._elementary(t, mapping_key)
        elif isinstance(t, ast.MappingType):
            key = self.info(t.key, mapping_key=True)
            value = self.info(t.value)
            info = TypeInfo(
                type_id=f"t_mapping({key.type_id},{value.type_id})",
                label=f"mapping({key.label} => {value.label})",
                encoding="mapping",
                number_of_bytes=32,
                kind="mapping",
                key=key.type_id,
                value=value.type_id,
            )
        elif isinstance(t, ast.ArrayType):
            base = self.info(t.base)
            if t.length is None:
                info = TypeInfo(
                    type_id=f"t_array({base.type_id})dyn_storage",
                    label=f"{base.label}[]",
                    encoding="dynamic_array",
                    number_of_bytes=32,
                    kind="array",
                    base=base.type_id,
                )
            else:
                slots = _static_array_slots(base, t.length)
                info = TypeInfo(
                    type_id=f"t_array({base.type_id}){t.length}_storage",
                    label=f"{base.label}[{t.length}]",
                    encoding="inplace",
                    number_of_bytes=32 * slots,
                    kind="array",
                    base=base.type_id,
                    length=t.length,
                )
        elif isinstance(t, ast.UserType):
            info = self._struct(t.name)
        else:
            raise LayoutError(f"unsupported type {t!r}")
        self.types.setdefault(info.type_id, info)
        return info

    def _elementary(self, t: ast.ElementaryType, mapping_key: bool) -> TypeInfo:
        name = t.name
        if name in ("string", "bytes"):
            suffix = "memory_ptr" if mapping_key else "storage"
            return TypeInfo(f"t_{name}_{suffix}", name, "bytes", 32, name)
        if name == "address":
            if t.payable:
                return TypeInfo("t_address_payable", "address payable", "inplace", 20, "address")
            return TypeInfo("t_address", "address", "inplace", 20, "address")
        if name == "bool":
            return TypeInfo("t_bool", "bool", "inplace", 1, "bool")
        if name.startswith("bytes"):
            n = int(name[5:])
            return TypeInfo(f"t_{name}", name, "inplace", n, "fixed_bytes")
        for prefix in ("uint", "int"):
            if name.startswith(prefix) and name[len(prefix):].isdigit():
                bits = int(name[len(prefix):])
                return TypeInfo(f"t_{name}", name, "inplace", bits // 8, prefix, bits=bits)
        raise LayoutError(f"unsupported elementary type {name!r}")

    def _struct(self, name: str) -> TypeInfo:
        struct = self.contract.struct(name)
        if struct is None:
            raise LayoutError(f"unresolved struct reference {name!r}")
        type_id = f"t_struct({name})_storage"
        if type_id in self.types:
            return self.types[type_id]
        if name in self._in_progress:
            raise LayoutError(f"recursive struct {name!r} has infinite size")
        self._in_progress.add(name)
        members, slots = self.place([(m.name, m.type_name) for m in struct.members])
        self._in_progress.discard(name)
        if slots == 0:
            raise LayoutError(f"struct {name!r} is empty")
        return TypeInfo(type_id, f"struct {name}", "inplace", 32 * slots, "struct",
                        members=tuple(members))

    def place(self, items) -> Tuple[List[DataElement], int]:
        """Assign (slot, offset) to ``items`` from slot 0; returns elements and slots used."""
        elements = []
        slot = 0
        offset = 0
        for label, type_name in items:
            info = self.info(type_name)
            size = info.number_of_bytes
            if not info.is_value_type or offset + size > 32:
                if offset > 0:
                    slot += 1
                    offset = 0
            elements.append(DataElement(label, info.type_id, slot, offset))
            if info.is_value_type:
                offset += size
            else:
                slot += info.slot_count
                offset = 0
        if offset > 0:
            slot += 1
        return elements, slot


def _static_array_slots(base: TypeInfo, length: int) -> int:
    if base.is_value_type:
        per_slot = 32 // base.number_of_bytes
        return (length + per_slot - 1) // per_slot
    return length * base.slot_count


def compute_layout(contract: ast.ContractUnit) -> StorageLayout:
    """Place every storage variable (constants and immutables excluded)."""
    builder = _TypeBuilder(contract)
    items = [(v.name, v.type_name) for v in contract.storage_variables]
    elements, _ = builder.place(items)
    return StorageLayout(tuple(elements), dict(builder.types))


def element_stride(base: TypeInfo) -> Tuple[int, int]:
    """(items per slot, slots per item) for array elements of type ``base``."""
    if base.is_value_type:
        return 32 // base.number_of_bytes, 1
    return 1, base.slot_count


def array_element_position(base: TypeInfo, start_slot: int, index: int) -> Tuple[int, int]:
    """(slot, offset) of element ``index`` of an array whose data starts at ``start_slot``."""
    per_slot, slots_per_item = element_stride(base)
    if base.is_value_type:
        return start_slot + index // per_slot, (index % per_slot) * base.number_of_bytes
    return start_slot + index * slots_per_item, 0

