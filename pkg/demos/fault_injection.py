"""
Catching a broken migration
===========================

Drop one write from a plan, or change one value, and see the simulator refuse
to call the result equal.
"""

import dataclasses
import random

from statemigrate.errors import DivergenceError
from statemigrate.fixtures import bundled_source, random_erc20_values
from statemigrate.pipeline import Config, analyze, run_pipeline
from statemigrate.sim import execute_plan
from statemigrate.state import KeyEnumeration, encode_state, normalize_values

token = analyze(bundled_source("erc20"), "erc20.sol")
values = normalize_values(token.layout, random_erc20_values(random.Random(1), holders=20, allowance_pairs=5))
keys = KeyEnumeration.from_values(token.layout, values)
snapshot = encode_state(token.layout, values, keys)
plan = run_pipeline(token, snapshot, keys, config=Config(gas_limit=300_000)).plan
print(f"{len(plan.batches)} batches, {plan.n_writes} writes")

# lose the third write of the first batch
first = plan.batches[0]
lost = first.writes[2]
shorter = dataclasses.replace(first, writes=first.writes[:2] + first.writes[3:],
                              gas_cost=plan.gas_model.cost(len(first.writes) - 1))
_, trace = execute_plan(dataclasses.replace(plan, batches=(shorter,) + plan.batches[1:]), snapshot)
print("final_equal:", trace.final_equal)
print("missing slot:", hex(trace.equality.missing[0]), "from", lost.variable)

# tamper with a value instead; this is refused before the batch is applied
bad = dataclasses.replace(lost, value=lost.value + 1)
tampered = dataclasses.replace(first, writes=first.writes[:2] + (bad,) + first.writes[3:])
try:
    execute_plan(dataclasses.replace(plan, batches=(tampered,) + plan.batches[1:]), snapshot)
except DivergenceError as exc:
    print("refused:", exc)
