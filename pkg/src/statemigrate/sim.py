"""Simulated execution of a migration plan.

The target chain is a plain slot store that only changes through
:meth:`SimChain.apply_batch`. :func:`execute_plan` replays a plan batch by
batch, tracks which shards and functions become complete from the writes it
actually applied (not from the plan's own bookkeeping), and finally compares
the target against the source snapshot.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Set, Tuple

from .errors import DivergenceError
from .plan import Batch, GasModel, MigrationPlan
from .state import Snapshot

__all__ = [
    "SimChain",
    "BatchRecord",
    "EqualityReport",
    "MigrationTrace",
    "execute_plan",
    "verify_state_equality",
]


def _hex32(v: int) -> str:
    return "0x" + format(v, "064x")


class SimChain:
    """Single-owner slot store standing in for the target contract's storage."""

    def __init__(self, gas_limit: int, gas_model: GasModel = GasModel()):
        self.gas_limit = gas_limit
        self.gas_model = gas_model
        self._storage: Dict[int, int] = {}
        self.applied_batches = 0
        self.cumulative_gas = 0

    @property
    def storage(self) -> Snapshot:
        return Snapshot(self._storage)

    def apply_batch(self, batch: Batch) -> int:
        """Apply one batch; returns the gas it cost. Over-limit or mis-costed batches are refused."""
        cost = self.gas_model.cost(len(batch.writes))
        if cost != batch.gas_cost:
            raise DivergenceError(f"batch {batch.index} claims {batch.gas_cost} gas but costs {cost}")
        if cost > self.gas_limit:
            raise DivergenceError(f"batch {batch.index} needs {cost} gas, over the limit of {self.gas_limit}")
        if not batch.writes:
            raise DivergenceError(f"batch {batch.index} is empty")
        for w in batch.writes:
            self._storage[w.slot] = w.value
        self.applied_batches += 1
        self.cumulative_gas += cost
        return cost


@dataclass(frozen=True)
class EqualityReport:
    missing: Tuple[int, ...] = ()  # in source, absent from target
    extra: Tuple[int, ...] = ()  # in target, absent from source
    mismatched: Tuple[int, ...] = ()  # in both with different values

    @property
    def equal(self) -> bool:
        return not (self.missing or self.extra or self.mismatched)

    def to_json(self) -> dict:
        return {
            "equal": self.equal,
            "missing": [_hex32(s) for s in self.missing],
            "extra": [_hex32(s) for s in self.extra],
            "mismatched": [_hex32(s) for s in self.mismatched],
        }


def verify_state_equality(source: Snapshot, target, slots: Optional[Iterable[int]] = None) -> EqualityReport:
    """Slot-by-slot comparison; ``slots`` restricts both sides to the layout's slots if given."""
    if isinstance(target, SimChain):
        target = target.storage
    if slots is not None:
        keep = set(slots)
        source, target = source.restrict(keep), target.restrict(keep)
    src, dst = source.to_dict(), target.to_dict()
    return EqualityReport(
        missing=tuple(sorted(s for s in src if s not in dst)),
        extra=tuple(sorted(s for s in dst if s not in src)),
        mismatched=tuple(sorted(s for s in src if s in dst and src[s] != dst[s])),
    )


@dataclass(frozen=True)
class BatchRecord:
    index: int
    gas_cost: int
    cumulative_gas: int
    slots: Tuple[int, ...]
    completed: Tuple[str, ...]
    activated: Tuple[str, ...]


@dataclass(frozen=True)
class MigrationTrace:
    gas_limit: int
    batches: Tuple[BatchRecord, ...]
    activated_before_migration: Tuple[str, ...]
    equality: EqualityReport
    functions: Tuple[str, ...] = field(default=())

    @property
    def final_equal(self) -> bool:
        return self.equality.equal

    @property
    def total_gas(self) -> int:
        return self.batches[-1].cumulative_gas if self.batches else 0

    def activation(self) -> Dict[str, Optional[int]]:
        """Batch at which each function became usable; None if it never did."""
        out: Dict[str, Optional[int]] = {f: None for f in self.functions}
        for f in self.activated_before_migration:
            out[f] = 0
        for b in self.batches:
            for f in b.activated:
                out[f] = b.index
        return out

    def downtime(self) -> Dict[str, Optional[Dict[str, int]]]:
        """Per function: activation batch and cumulative gas spent by then."""
        gas_at = {0: 0, **{b.index: b.cumulative_gas for b in self.batches}}
        return {f: None if b is None else {"batch": b, "gas": gas_at[b]}
                for f, b in self.activation().items()}

    def to_json(self) -> dict:
        return {
            "gas_limit": self.gas_limit,
            "total_gas": self.total_gas,
            "final_equal": self.final_equal,
            "equality": self.equality.to_json(),
            "functions": list(self.functions),
            "activated_before_migration": list(self.activated_before_migration),
            "batches": [
                {
                    "index": b.index,
                    "gas_cost": b.gas_cost,
                    "cumulative_gas": b.cumulative_gas,
                    "slots": [_hex32(s) for s in b.slots],
                    "completed": list(b.completed),
                    "activated": list(b.activated),
                }
                for b in self.batches
            ],
            "downtime": self.downtime(),
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, doc: Mapping) -> "MigrationTrace":
        eq = doc["equality"]
        return cls(
            gas_limit=doc["gas_limit"],
            batches=tuple(
                BatchRecord(b["index"], b["gas_cost"], b["cumulative_gas"],
                            tuple(int(s, 16) for s in b["slots"]),
                            tuple(b["completed"]), tuple(b["activated"]))
                for b in doc["batches"]
            ),
            activated_before_migration=tuple(doc["activated_before_migration"]),
            equality=EqualityReport(*(tuple(int(s, 16) for s in eq[k]) for k in ("missing", "extra", "mismatched"))),
            functions=tuple(doc.get("functions", ())),
        )

    @classmethod
    def loads(cls, text: str) -> "MigrationTrace":
        return cls.from_json(json.loads(text))


def execute_plan(plan: MigrationPlan, source: Snapshot) -> Tuple[SimChain, MigrationTrace]:
    """Replay ``plan`` on an empty chain and verify the result against ``source``.

    Every planned write must carry the source's value for its slot and no slot
    may be written twice; otherwise a :class:`DivergenceError` is raised before
    the offending batch is applied.
    """
    chain = SimChain(plan.gas_limit, plan.gas_model)
    pending: Dict[str, Set[int]] = {s.variable: set(s.slots) for s in plan.shards}
    members = {s.variable: s.members for s in plan.shards}
    dependencies = {f: set(d) for f, d in plan.dependencies.items()}

    def complete_labels() -> Set[str]:
        return {m for v, left in pending.items() if not left for m in members[v]}

    activated: Set[str] = set()

    def newly_active(ready: Set[str]) -> Tuple[str, ...]:
        out = tuple(f for f, deps in dependencies.items() if f not in activated and deps <= ready)
        activated.update(out)
        return out

    already_done = {v for v, left in pending.items() if not left}
    before = newly_active(complete_labels())
    written: Set[int] = set()
    records: List[BatchRecord] = []
    for batch in plan.batches:
        for w in batch.writes:
            if w.slot in written:
                raise DivergenceError(f"slot {_hex32(w.slot)} written twice", slot=w.slot)
            if source[w.slot] != w.value:
                raise DivergenceError(
                    f"batch {batch.index} writes {_hex32(w.value)} to slot {_hex32(w.slot)} "
                    f"but the source holds {_hex32(source[w.slot])}", slot=w.slot)
            written.add(w.slot)
        chain.apply_batch(batch)
        finished = []
        for w in batch.writes:
            left = pending.get(w.variable)
            if left is not None and w.slot in left:
                left.discard(w.slot)
                if not left and w.variable not in already_done:
                    already_done.add(w.variable)
                    finished.append(w.variable)
        records.append(BatchRecord(
            index=batch.index,
            gas_cost=batch.gas_cost,
            cumulative_gas=chain.cumulative_gas,
            slots=tuple(w.slot for w in batch.writes),
            completed=tuple(finished),
            activated=newly_active(complete_labels()),
        ))
    trace = MigrationTrace(
        gas_limit=plan.gas_limit,
        batches=tuple(records),
        activated_before_migration=before,
        equality=verify_state_equality(source, chain),
        functions=tuple(plan.dependencies),
    )
    return chain, trace
