import dataclasses
import json
import random

import pytest

from statemigrate.analysis import UsageProfile, compute_priority_vector
from statemigrate.errors import DivergenceError
from statemigrate.plan import Batch, GasModel, MigrationPlan, activation_map, order_shards, pack_batches
from statemigrate.sim import MigrationTrace, SimChain, execute_plan, verify_state_equality
from statemigrate.state import Snapshot, generate_shards

from conftest import GOLDENS, erc20_state

GOLDEN = GOLDENS / "erc20_100"


@pytest.fixture(scope="module")
def golden():
    plan = MigrationPlan.loads((GOLDEN / "plan.json").read_text())
    snapshot = Snapshot.from_json(json.loads((GOLDEN / "snapshot.json").read_text()))
    return plan, snapshot


def plan_for(analysis, seed, gas_limit=400_000, **kw):
    _, keys, snap = erc20_state(analysis.layout, seed, **kw)
    pv = compute_priority_vector(analysis.matrix.functions, UsageProfile({"transfer": 3}, {}))
    shards = generate_shards(analysis.layout, snap, keys)
    return pack_batches(order_shards(shards, analysis.matrix, pv), analysis.matrix, gas_limit), snap


def drop_write(plan, batch_i, write_i):
    batches = list(plan.batches)
    b = batches[batch_i]
    writes = b.writes[:write_i] + b.writes[write_i + 1:]
    batches[batch_i] = Batch(b.index, writes, b.completes, plan.gas_model.cost(len(writes)))
    return dataclasses.replace(plan, batches=tuple(x for x in batches if x.writes))


def test_empty_plan_on_empty_snapshot(erc20):
    plan = pack_batches([], erc20.matrix, 10 ** 6)
    chain, trace = execute_plan(plan, Snapshot())
    assert trace.batches == ()
    assert trace.final_equal
    assert chain.cumulative_gas == 0


def test_one_batch_plan(erc20):
    plan, snap = plan_for(erc20, 1, gas_limit=10 ** 8, holders=4, pairs=2)
    assert len(plan.batches) == 1
    _, trace = execute_plan(plan, snap)
    assert trace.final_equal
    act = trace.activation()
    assert act.pop("decimals") == 0
    assert set(act.values()) == {1}


def test_golden_run(golden, erc20):
    plan, snapshot = golden
    chain, trace = execute_plan(plan, snapshot)
    assert trace.final_equal
    assert chain.storage == snapshot
    assert trace.activation() == activation_map(plan, erc20.matrix)
    assert trace.dumps() == (GOLDEN / "trace.json").read_text()


def test_trace_invariants(golden):
    plan, snapshot = golden
    _, trace = execute_plan(plan, snapshot)
    seen = set(trace.activated_before_migration)
    for b in trace.batches:
        assert not seen & set(b.activated)
        seen |= set(b.activated)
    assert seen == set(plan.dependencies)
    assert trace.total_gas == sum(b.gas_cost for b in plan.batches)
    assert trace.total_gas <= len(plan.batches) * plan.gas_limit
    done = {}
    for b in trace.batches:
        for v in b.completed:
            done[v] = b.index
    for b in trace.batches:
        for f in b.activated:
            needs = [done.get(d, 0) for d in plan.dependencies[f]]
            assert max(needs) == b.index


def test_trace_json_round_trip(golden):
    plan, snapshot = golden
    _, trace = execute_plan(plan, snapshot)
    assert MigrationTrace.loads(trace.dumps()) == trace


def test_every_single_dropped_write_is_detected(golden):
    plan, snapshot = golden
    for bi, b in enumerate(plan.batches):
        for wi, w in enumerate(b.writes):
            _, trace = execute_plan(drop_write(plan, bi, wi), snapshot)
            assert not trace.final_equal
            assert trace.equality.missing == (w.slot,)


def test_corrupted_value_is_refused(golden):
    plan, snapshot = golden
    b = plan.batches[1]
    w = b.writes[5]
    bad = dataclasses.replace(w, value=w.value ^ 1)
    batches = list(plan.batches)
    batches[1] = dataclasses.replace(b, writes=b.writes[:5] + (bad,) + b.writes[6:])
    with pytest.raises(DivergenceError) as err:
        execute_plan(dataclasses.replace(plan, batches=tuple(batches)), snapshot)
    assert err.value.slot == w.slot


def test_duplicate_write_is_refused(golden):
    plan, snapshot = golden
    b = plan.batches[0]
    dup = dataclasses.replace(b, writes=b.writes + b.writes[:1], gas_cost=plan.gas_model.cost(len(b.writes) + 1))
    with pytest.raises(DivergenceError, match="twice"):
        execute_plan(dataclasses.replace(plan, batches=(dup,) + plan.batches[1:], gas_limit=10 ** 7), snapshot)


def test_chain_refuses_over_limit_batch(golden):
    plan, _ = golden
    chain = SimChain(plan.batches[0].gas_cost - 1, plan.gas_model)
    with pytest.raises(DivergenceError, match="over the limit"):
        chain.apply_batch(plan.batches[0])
    assert chain.applied_batches == 0


def test_chain_refuses_miscosted_batch(golden):
    plan, _ = golden
    chain = SimChain(plan.gas_limit, plan.gas_model)
    with pytest.raises(DivergenceError, match="claims"):
        chain.apply_batch(dataclasses.replace(plan.batches[0], gas_cost=1))


def test_equality_report_buckets():
    src = Snapshot({1: 1, 2: 2, 3: 3})
    dst = Snapshot({1: 1, 3: 4, 9: 9})
    r = verify_state_equality(src, dst)
    assert (r.equal, r.missing, r.extra, r.mismatched) == (False, (2,), (9,), (3,))
    assert verify_state_equality(src, src).equal
    assert verify_state_equality(src, dst, slots=[1]).equal


def test_missing_mapping_slot_reported(erc20):
    plan, snap = plan_for(erc20, 2, holders=6, pairs=2)
    chain, trace = execute_plan(plan, snap)
    victim = next(iter(snap))
    target = Snapshot({k: v for k, v in chain.storage.items() if k != victim})
    report = verify_state_equality(snap, target)
    assert report.missing == (victim,)


@pytest.mark.parametrize("seed", range(10))
def test_random_states_migrate_exactly(erc20, seed):
    rng = random.Random(seed)
    plan, snap = plan_for(erc20, seed, gas_limit=rng.choice([200_000, 500_000, 2_000_000]),
                          holders=rng.randint(0, 64), pairs=rng.randint(0, 32))
    chain, trace = execute_plan(plan, snap)
    assert trace.final_equal
    assert chain.storage == snap
