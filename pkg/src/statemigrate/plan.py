"""Priority-ordered, gas-limited batch planning.

Data elements inherit the best (smallest) rank of the functions that need
them. Shards are laid out in that order and cut into transactions by an
order-preserving first-fit: a batch takes slot writes until the next one would
push it past the gas limit. Big shards spill across batches and small ones
share a batch, but the element order is never permuted.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from .analysis import DependencyMatrix, PriorityVector
from .errors import ConfigError, IntegrityError, PlanningError
from .state import Shard

__all__ = [
    "GasModel",
    "SlotWrite",
    "Batch",
    "MigrationPlan",
    "ShardSpec",
    "order_data_elements",
    "order_shards",
    "pack_batches",
    "activation_map",
    "completion_map",
]

CALLDATA_BYTES_PER_WRITE = 64  # one (slot, value) pair


@dataclass(frozen=True)
class GasModel:
    tx_base: int = 21000
    per_slot_write: int = 22100  # cold access + zero to nonzero store
    per_calldata_byte: int = 16

    def __post_init__(self):
        for name in ("tx_base", "per_slot_write", "per_calldata_byte"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, int) or v < 0:
                raise ConfigError(f"gas model {name} must be a non-negative integer, got {v!r}")

    @property
    def write_cost(self) -> int:
        """Marginal gas of one slot write including its calldata."""
        return self.per_slot_write + CALLDATA_BYTES_PER_WRITE * self.per_calldata_byte

    def cost(self, n_writes: int) -> int:
        return self.tx_base + n_writes * self.write_cost

    def to_json(self) -> dict:
        return {"tx_base": self.tx_base, "per_slot_write": self.per_slot_write,
                "per_calldata_byte": self.per_calldata_byte}

    @classmethod
    def from_json(cls, doc: Mapping) -> "GasModel":
        unknown = set(doc) - {"tx_base", "per_slot_write", "per_calldata_byte"}
        if unknown:
            raise ConfigError(f"unknown gas model fields {sorted(unknown)}")
        return cls(**doc)


@dataclass(frozen=True)
class SlotWrite:
    slot: int
    value: int
    variable: str  # shard the write belongs to


@dataclass(frozen=True)
class Batch:
    index: int
    writes: Tuple[SlotWrite, ...]
    completes: Tuple[str, ...]  # shard variables whose last slot lands here
    gas_cost: int


@dataclass(frozen=True)
class ShardSpec:
    """What the plan remembers about a shard: which labels it covers and which slots."""

    variable: str
    members: Tuple[str, ...]
    slots: Tuple[int, ...]


def _hex32(v: int) -> str:
    return "0x" + format(v, "064x")


def _word(text: str, what: str) -> int:
    try:
        v = int(text, 16)
    except (TypeError, ValueError):
        raise PlanningError(f"plan {what} {text!r} is not hex") from None
    if not 0 <= v < 1 << 256:
        raise PlanningError(f"plan {what} {text!r} exceeds 32 bytes")
    return v


@dataclass(frozen=True)
class MigrationPlan:
    batches: Tuple[Batch, ...]
    element_order: Tuple[Tuple[str, Optional[int]], ...]  # shard variable, effective rank (None = no dependents)
    shards: Tuple[ShardSpec, ...]
    dependencies: Mapping[str, Tuple[str, ...]]  # function -> data element labels
    gas_limit: int
    gas_model: GasModel = field(default_factory=GasModel)
    max_slots_per_batch: Optional[int] = None
    source_address: Optional[str] = None
    target_address: Optional[str] = None

    @property
    def total_gas(self) -> int:
        return sum(b.gas_cost for b in self.batches)

    @property
    def n_writes(self) -> int:
        return sum(len(b.writes) for b in self.batches)

    @property
    def lower_bound(self) -> int:
        """Fewest batches any packing could use: data gas over the per-batch budget for data."""
        if not self.n_writes:
            return 0
        room = self.gas_limit - self.gas_model.tx_base
        return math.ceil(self.n_writes * self.gas_model.write_cost / room) if room > 0 else self.n_writes

    def to_json(self) -> dict:
        return {
            "gas_limit": self.gas_limit,
            "total_gas": self.total_gas,
            "gas_model": self.gas_model.to_json(),
            "max_slots_per_batch": self.max_slots_per_batch,
            "source_address": self.source_address,
            "target_address": self.target_address,
            "element_order": [{"label": label, "rank": rank} for label, rank in self.element_order],
            "shards": [
                {"variable": s.variable, "members": list(s.members), "slots": [_hex32(x) for x in s.slots]}
                for s in self.shards
            ],
            # a list, not an object, so declaration order survives sort_keys
            "dependencies": [{"function": f, "requires": list(d)} for f, d in self.dependencies.items()],
            "batches": [
                {
                    "index": b.index,
                    "gas_cost": b.gas_cost,
                    "writes": [{"slot": _hex32(w.slot), "value": _hex32(w.value), "shard": w.variable}
                               for w in b.writes],
                    "completes": list(b.completes),
                }
                for b in self.batches
            ],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, doc: Mapping) -> "MigrationPlan":
        try:
            batches = tuple(
                Batch(
                    index=b["index"],
                    writes=tuple(SlotWrite(_word(w["slot"], "slot"), _word(w["value"], "value"), w["shard"])
                                 for w in b["writes"]),
                    completes=tuple(b["completes"]),
                    gas_cost=b["gas_cost"],
                )
                for b in doc["batches"]
            )
            plan = cls(
                batches=batches,
                element_order=tuple((e["label"], e["rank"]) for e in doc["element_order"]),
                shards=tuple(ShardSpec(s["variable"], tuple(s["members"]),
                                       tuple(_word(x, "slot") for x in s["slots"]))
                             for s in doc["shards"]),
                dependencies={d["function"]: tuple(d["requires"]) for d in doc["dependencies"]},
                gas_limit=doc["gas_limit"],
                gas_model=GasModel.from_json(doc.get("gas_model", {})),
                max_slots_per_batch=doc.get("max_slots_per_batch"),
                source_address=doc.get("source_address"),
                target_address=doc.get("target_address"),
            )
        except (KeyError, TypeError) as exc:
            raise PlanningError(f"malformed plan document: {exc!r}") from None
        if "total_gas" in doc and doc["total_gas"] != plan.total_gas:
            raise PlanningError(f"plan total_gas {doc['total_gas']} disagrees with its batches ({plan.total_gas})")
        return plan

    @classmethod
    def loads(cls, text: str) -> "MigrationPlan":
        return cls.from_json(json.loads(text))


def order_data_elements(matrix: DependencyMatrix, priority: PriorityVector) -> List[Tuple[str, Optional[int]]]:
    """Data elements sorted by the best rank among their dependents; undepended-on ones go last."""
    if set(matrix.functions) != set(priority.functions):
        raise PlanningError("dependency matrix and priority vector cover different functions")
    out = []
    for label in matrix.data_elements:
        ranks = [priority.rank(f) for f in matrix.column(label)]
        out.append((label, min(ranks) if ranks else None))
    return _sorted_by_rank(out)


def _sorted_by_rank(items: Sequence[Tuple[str, Optional[int]]]) -> List[Tuple[str, Optional[int]]]:
    keyed = sorted(enumerate(items), key=lambda p: (p[1][1] is None, p[1][1] or 0, p[0]))
    return [item for _, item in keyed]


def order_shards(shards: Sequence[Shard], matrix: DependencyMatrix,
                 priority: PriorityVector) -> List[Tuple[Shard, Optional[int]]]:
    """Shards in migration order; a composite shard takes the best rank of its members."""
    element_rank = dict(order_data_elements(matrix, priority))
    ranked = []
    for shard in shards:
        missing = [m for m in shard.members if m not in element_rank]
        if missing:
            raise PlanningError(f"shard {shard.variable!r} covers labels absent from the matrix: {missing}")
        ranks = [element_rank[m] for m in shard.members if element_rank[m] is not None]
        ranked.append((shard, min(ranks) if ranks else None))
    keyed = sorted(enumerate(ranked), key=lambda p: (p[1][1] is None, p[1][1] or 0, p[0]))
    return [item for _, item in keyed]


def pack_batches(ordered: Sequence[Tuple[Shard, Optional[int]]], matrix: DependencyMatrix,
                 gas_limit: int, gas_model: GasModel = GasModel(),
                 max_slots_per_batch: Optional[int] = None,
                 source_address: Optional[str] = None,
                 target_address: Optional[str] = None) -> MigrationPlan:
    """First-fit packing of the shards' slot writes, in the given order, into batches."""
    if isinstance(gas_limit, bool) or not isinstance(gas_limit, int) or gas_limit <= 0:
        raise ConfigError(f"gas limit must be a positive integer, got {gas_limit!r}")
    if max_slots_per_batch is not None and max_slots_per_batch < 1:
        raise ConfigError(f"max_slots_per_batch must be at least 1, got {max_slots_per_batch}")
    minimum = gas_model.cost(1)
    writes = [SlotWrite(s, v, shard.variable) for shard, _ in ordered for s, v in shard.slots]
    if writes and minimum > gas_limit:
        raise PlanningError(f"gas limit {gas_limit} cannot fit a single slot write; minimum feasible limit is {minimum}")

    per_batch = (gas_limit - gas_model.tx_base) // gas_model.write_cost if gas_model.write_cost else len(writes)
    if max_slots_per_batch is not None:
        per_batch = min(per_batch, max_slots_per_batch)
    per_batch = max(per_batch, 1)

    last_write = {}
    for i, w in enumerate(writes):
        last_write[w.variable] = i
    batches = []
    for start in range(0, len(writes), per_batch):
        chunk = tuple(writes[start:start + per_batch])
        end = start + len(chunk)
        completes = tuple(shard.variable for shard, _ in ordered
                          if shard.variable in last_write and start <= last_write[shard.variable] < end)
        batches.append(Batch(len(batches) + 1, chunk, completes, gas_model.cost(len(chunk))))

    seen = set()
    for w in writes:
        if w.slot in seen:
            raise PlanningError(f"slot {_hex32(w.slot)} appears in more than one shard")
        seen.add(w.slot)

    return MigrationPlan(
        batches=tuple(batches),
        element_order=tuple((shard.variable, rank) for shard, rank in ordered),
        shards=tuple(ShardSpec(s.variable, s.members, s.slot_keys) for s, _ in ordered),
        dependencies={f: matrix.row(f) for f in matrix.functions},
        gas_limit=gas_limit,
        gas_model=gas_model,
        max_slots_per_batch=max_slots_per_batch,
        source_address=source_address,
        target_address=target_address,
    )


def completion_map(plan: MigrationPlan) -> Dict[str, int]:
    """Batch index by which each covered label is fully written; 0 for shards with nothing to write."""
    done: Dict[str, int] = {}
    for b in plan.batches:
        for v in b.completes:
            done[v] = b.index
    out = {}
    for spec in plan.shards:
        for m in spec.members:
            out[m] = done.get(spec.variable, 0)
    return out


def activation_map(plan: MigrationPlan, matrix: DependencyMatrix) -> Dict[str, int]:
    """First batch after which every dependency of each function is in place (0 = before migration)."""
    done = completion_map(plan)
    missing = [d for d in matrix.data_elements if d not in done]
    if missing:
        raise IntegrityError(f"data elements absent from the plan: {missing}")
    return {f: max((done[d] for d in matrix.row(f)), default=0) for f in matrix.functions}
