"""
Migrating a token ledger in priority order
==========================================

A 100-holder ERC-20 state is moved to a new contract in gas-limited batches.
The most used functions come back first, long before the whole ledger lands.
"""

import random

from statemigrate.analysis import UsageProfile
from statemigrate.fixtures import bundled_source, random_erc20_values
from statemigrate.pipeline import Config, analyze, run_pipeline
from statemigrate.state import KeyEnumeration, encode_state, normalize_values

# parse the bundled token and look at where its variables live
token = analyze(bundled_source("erc20"), "erc20.sol")
for e in token.layout.elements:
    print(f"{e.label:14s} slot {e.slot} offset {e.offset}")

# which function touches which variable, internal calls included
print()
print(token.matrix.to_csv())

# a random ledger: balances, allowances, and a name right at the 31/32-byte edge
values = normalize_values(token.layout, random_erc20_values(random.Random(7), holders=100, allowance_pairs=32))
keys = KeyEnumeration.from_values(token.layout, values)
snapshot = encode_state(token.layout, values, keys)
print(f"{len(snapshot)} occupied slots, name is {len(values['_name'].encode())} bytes")

# observed traffic; transfers and balance lookups dominate
profile = UsageProfile(
    calls={"transfer": 5400, "balanceOf": 9100, "transferFrom": 1300, "approve": 900, "allowance": 700},
    criticality={"transfer": 1.0, "transferFrom": 0.8, "balanceOf": 0.6},
)

result = run_pipeline(token, snapshot, keys, profile, Config(gas_limit=1_000_000), "erc20")

print()
for b in result.plan.batches:
    print(f"batch {b.index}: {len(b.writes):3d} writes, {b.gas_cost:>8,} gas, completes {list(b.completes)}")

# activation: the batch after which each function can run on the new contract
print()
for f, d in result.trace.downtime().items():
    print(f"{f:14s} batch {d['batch']}  after {d['gas']:>9,} gas")

print()
print("target equals source:", result.trace.final_equal)
