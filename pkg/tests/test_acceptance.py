"""Acceptance suite: one test per criterion, each reporting a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py``; the lines appear in the
"acceptance criteria" section at the end of the session.
"""

import functools
import json
import math
import random
import time

import pytest

from statemigrate.analysis import DependencyMatrix, UsageProfile, compute_priority_vector
from statemigrate.errors import DivergenceError
from statemigrate.fixtures import bundled_source, random_erc1155_values, random_erc20_values
from statemigrate.frontend import parse_source
from statemigrate.keccak import keccak256
from statemigrate.layout import compute_layout
from statemigrate.metrics import compute_fat, compute_fat_monolithic, emit_json
from statemigrate.pipeline import Config, analyze, run_pipeline
from statemigrate.plan import (
    GasModel, MigrationPlan, completion_map, order_data_elements, order_shards, pack_batches,
)
from statemigrate.sim import execute_plan
from statemigrate.state import KeyEnumeration, Shard, Snapshot, encode_state, generate_shards, normalize_values, shards_cover

from conftest import ACCEPTANCE, GOLDENS
from test_layout import COMPILER, SOURCES, CASES, flatten


def criterion(number, title):
    def wrap(fn):
        @functools.wraps(fn)
        def run(*args, **kwargs):
            try:
                detail = fn(*args, **kwargs)
            except BaseException as exc:
                ACCEPTANCE[number] = (title, False, f"{type(exc).__name__}: {str(exc).splitlines()[0] if str(exc) else ''}")
                raise
            ACCEPTANCE[number] = (title, True, detail or "ok")
        return run
    return wrap


# 1

@criterion(1, "layout matches the reference compiler")
def test_c1_layout_oracle():
    start = time.perf_counter()
    cases = sorted(CASES.glob("*.sol"))
    assert len(cases) >= 10
    for source in SOURCES:
        mine = compute_layout(parse_source(source.read_text())).to_json()
        ref = COMPILER[source.name]
        assert flatten(mine["storage"], mine["types"]) == flatten(ref["storage"], ref["types"]), source.name
    elapsed = time.perf_counter() - start
    assert elapsed < 5
    return f"{len(SOURCES)} sources, {len(cases)} targeted cases, {elapsed:.2f}s"


# 2

KECCAK_VECTORS = [
    (b"", "c5d2460186f7233c927e7db2dcc703c0e500b653ca82273b7bfad8045d85a470"),
    (b"abc", "4e03657aea45a94fc7d47ba826c8d667c0d1e6e33a64a036ec44f58fa12d6c45"),
    (b"abcdefghbcdefghicdefghijdefghijkefghijklfghijklmghijklmnhijklmnoijklmnopjklmnopqklmnopqrlmnopqrsmnopqrstnopqrstu",
     "f519747ed599024f3882238e5ab43960132572b7345fbeb9a90769dafd21ad67"),
    (b"a" * 1_000_000, "fadae6b49f129bbb812be8407b7b2894f34aecf6dbd1f9b0f0c7e9853098fc96"),
]


@criterion(2, "Keccak-256 published vectors")
def test_c2_keccak():
    for data, digest in KECCAK_VECTORS:
        assert keccak256(data).hex() == digest, data[:16]
    return f"{len(KECCAK_VECTORS)} vectors incl. 1,000,000-byte input"


# 3

def _fault_injections(plan, snapshot, n, rng):
    """Drop or corrupt n distinct planned writes, one at a time; count how many are caught."""
    flat = [(bi, wi) for bi, b in enumerate(plan.batches) for wi in range(len(b.writes))]
    caught = 0
    for k, (bi, wi) in enumerate(rng.sample(flat, n)):
        batches = list(plan.batches)
        b = batches[bi]
        w = b.writes[wi]
        if k % 2 == 0:
            writes = b.writes[:wi] + b.writes[wi + 1:]
        else:
            bad = type(w)(w.slot, w.value ^ (1 << rng.randrange(256)), w.variable)
            writes = b.writes[:wi] + (bad,) + b.writes[wi + 1:]
        batches[bi] = type(b)(b.index, writes, b.completes, plan.gas_model.cost(len(writes)))
        broken = MigrationPlan(tuple(x for x in batches if x.writes), plan.element_order, plan.shards,
                               plan.dependencies, plan.gas_limit, plan.gas_model)
        try:
            _, trace = execute_plan(broken, snapshot)
        except DivergenceError as exc:
            caught += exc.slot == w.slot
        else:
            caught += not trace.final_equal and trace.equality.missing == (w.slot,)
    return caught


@criterion(3, "randomized ERC-20 migrations are exact, shards partition state, faults detected")
def test_c3_state_equality(erc20):
    start = time.perf_counter()
    layout, matrix = erc20.layout, erc20.matrix
    rng = random.Random(3)
    fn = list(matrix.functions)
    short = long = 0
    for run in range(100):
        # every fourth run pins the name to exactly 31 or 32 bytes
        lengths = (31 + run // 4 % 2,) * 2 if run % 4 == 0 else (28, 36)
        raw = random_erc20_values(rng, rng.randint(0, 64), rng.randint(0, 32), lengths)
        values = normalize_values(layout, raw)
        short += len(values["_name"]) < 32
        long += len(values["_name"]) >= 32
        keys = KeyEnumeration.from_values(layout, values)
        snapshot = encode_state(layout, values, keys)
        shards = generate_shards(layout, snapshot, keys)
        assert shards_cover(shards, snapshot), run
        profile = UsageProfile({f: rng.randrange(0, 1000) for f in fn}, {f: rng.random() for f in fn})
        pv = compute_priority_vector(fn, profile)
        plan = pack_batches(order_shards(shards, matrix, pv), matrix, rng.randrange(60_000, 3_000_000))
        chain, trace = execute_plan(plan, snapshot)
        assert trace.final_equal, run
        assert chain.storage == snapshot
    assert short and long

    plan = MigrationPlan.loads((GOLDENS / "erc20_100" / "plan.json").read_text())
    snapshot = Snapshot.from_json(json.loads((GOLDENS / "erc20_100" / "snapshot.json").read_text()))
    caught = _fault_injections(plan, snapshot, 100, random.Random(33))
    assert caught == 100
    elapsed = time.perf_counter() - start
    assert elapsed < 30
    return f"100/100 runs equal ({short} short, {long} long names), {caught}/100 faults caught, {elapsed:.1f}s"


# 4

def _uniform(n):
    shards = [Shard(f"d{i}", ((i + 1, 1),), (f"d{i}",)) for i in range(n)]
    return shards, DependencyMatrix.from_rows(["f"], [s.variable for s in shards], {})


@criterion(4, "batch count equals ceil(G_total / G_limit) under a uniform cost")
def test_c4_batching():
    rng = random.Random(4)
    exact = 0
    for _ in range(300):
        n, c = rng.randint(1, 500), rng.randint(1, 30_000)
        limit = c * rng.randint(1, 600)  # the formula is exact when whole writes fill G_limit
        shards, m = _uniform(n)
        plan = pack_batches([(s, None) for s in shards], m, limit, GasModel(0, c, 0))
        assert len(plan.batches) == math.ceil(n * c / limit)
        exact += 1

    # off-multiple limits: writes cannot be split, so the formula is a lower bound
    # and first-fit hits the unsplittable optimum ceil(n / floor(G_limit / c))
    for _ in range(200):
        n, c = rng.randint(1, 500), rng.randint(1, 30_000)
        limit = rng.randint(c, 600 * c)
        shards, m = _uniform(n)
        plan = pack_batches([(s, None) for s in shards], m, limit, GasModel(0, c, 0))
        assert len(plan.batches) == math.ceil(n / (limit // c)) >= math.ceil(n * c / limit)

    defaults = GasModel()
    for _ in range(200):
        n = rng.randint(1, 500)
        limit = rng.randint(defaults.cost(1), 3_000_000)
        shards, m = _uniform(n)
        plan = pack_batches([(s, None) for s in shards], m, limit, defaults)
        assert len(plan.batches) >= plan.lower_bound
        assert all(b.gas_cost <= limit for b in plan.batches)
        assert plan.n_writes == n
    return f"{exact} exact sweeps with G_limit a multiple of the slot cost, 200 off-multiple, 200 default-model"


# 5

@criterion(5, "priority order is preserved through packing")
def test_c5_ordering_invariant():
    rng = random.Random(5)
    checks = 0
    for _ in range(300):
        nf, nd = rng.randint(1, 8), rng.randint(1, 10)
        functions = [f"f{i}" for i in range(nf)]
        labels = [f"d{j}" for j in range(nd)]
        rows = {f: [d for d in labels if rng.random() < 0.3] for f in functions}
        m = DependencyMatrix.from_rows(functions, labels, rows)
        pv = compute_priority_vector(functions, UsageProfile(
            {f: rng.randrange(0, 50) for f in functions}, {f: rng.choice([0, 0.5, 1]) for f in functions}))

        # element order follows min rank of the dependents, declaration order on ties
        def key(j):
            ranks = [pv.rank(f) for f in m.column(labels[j])]
            return (min(ranks) if ranks else math.inf, j)
        expected = [labels[j] for j in sorted(range(nd), key=key)]
        assert [d for d, _ in order_data_elements(m, pv)] == expected

        slot = iter(range(1, 10 ** 6))
        shards = [Shard(d, tuple((next(slot), 1) for _ in range(rng.randint(0, 6))), (d,)) for d in labels]
        gm = GasModel(rng.randint(0, 5), rng.randint(1, 5), 0)
        plan = pack_batches(order_shards(shards, m, pv), m, rng.randint(gm.cost(1), gm.cost(12)), gm,
                            rng.choice([None, 1, 2, 5]))
        done = completion_map(plan)
        first = {}
        for b in plan.batches:
            for w in b.writes:
                first.setdefault(w.variable, b.index)
        rank = dict(plan.element_order)
        for d in labels:
            for d2 in labels:
                r, r2 = rank[d], rank[d2]
                if d2 in first and r is not None and (r2 is None or r < r2):
                    assert done[d] <= first[d2]
                    checks += 1
    return f"300 random cases, {checks} ordered pairs checked"


# 6

TARGET_REDUCTION = {"erc20": 72.0, "erc721": 55.0, "erc1155": 60.0}
HAND_FAT = {"erc20": (11, 11, 5), "erc721": (28, 15, 6), "erc1155": (12, 11, 3)}


@criterion(6, "incremental FAT beats monolithic within 15 points of the target reductions")
def test_c6_fat(erc20, erc721, erc1155):
    parts = []
    for std, a in (("erc20", erc20), ("erc721", erc721), ("erc1155", erc1155)):
        total, n, data = HAND_FAT[std]
        inc, mono = compute_fat(a.matrix), compute_fat_monolithic(a.matrix)
        assert inc == pytest.approx(total / n) and mono == data, std
        assert inc < mono
        reduction = 100 * (mono - inc) / mono
        assert abs(reduction - TARGET_REDUCTION[std]) <= 15, (std, reduction)
        parts.append(f"{std} {reduction:.1f}% vs {TARGET_REDUCTION[std]:.0f}%")
    return ", ".join(parts)


# 7

ERC20_ROWS = {
    "transfer": {"_balances"},  # only through _transfer
    "transferFrom": {"_balances", "_allowances"},
    "balanceOf": {"_balances"},
    "approve": {"_allowances"},  # only through _approve
    "totalSupply": {"_totalSupply"},
}


@criterion(7, "ERC-20 dependency rows match hand-traced sets")
def test_c7_erc20_rows(erc20):
    for f, want in ERC20_ROWS.items():
        assert set(erc20.matrix.row(f)) == want, f
    return ", ".join(f"{f}={sorted(d)}" for f, d in ERC20_ROWS.items())


# 8

def _erc1155_run():
    a = analyze(bundled_source("erc1155"), "erc1155.sol")
    values = normalize_values(a.layout, random_erc1155_values(random.Random(8), token_ids=24, holders=40))
    keys = KeyEnumeration.from_values(a.layout, values)
    snapshot = encode_state(a.layout, values, keys)
    profile = UsageProfile({"safeTransferFrom": 900, "balanceOf": 1500, "setApprovalForAll": 200},
                           {"safeTransferFrom": 1.0})
    r = run_pipeline(a, snapshot, keys, profile, Config(gas_limit=500_000, t_acceptable=1_000_000), "erc1155")
    return r.plan.dumps(), r.trace.dumps(), emit_json([r.report])


@criterion(8, "ERC-1155 pipeline is deterministic")
def test_c8_determinism():
    start = time.perf_counter()
    first = _erc1155_run()
    elapsed = time.perf_counter() - start
    second = _erc1155_run()
    assert first == second
    assert json.loads(first[1])["final_equal"]
    assert elapsed < 5
    return f"plan, trace and report byte-identical, {elapsed:.2f}s per run"


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
