"""Regenerate the 100-holder ERC-20 golden run under tests/goldens/erc20_100/.

The state is drawn from a fixed seed, so rerunning this only changes the
files if the planner or simulator changed behaviour. Review the diff before
committing.
"""

import json
import random
import sys
from pathlib import Path

from statemigrate.analysis import UsageProfile
from statemigrate.fixtures import bundled_source, random_erc20_values
from statemigrate.pipeline import Config, analyze, run_pipeline
from statemigrate.state import KeyEnumeration, encode_state, normalize_values

ROOT = Path(__file__).resolve().parents[1]
OUT = ROOT / "tests" / "goldens" / "erc20_100"
SEED = 20240601

PROFILE = {
    "transfer": {"calls": 5400, "criticality": 1.0},
    "balanceOf": {"calls": 9100, "criticality": 0.6},
    "transferFrom": {"calls": 1300, "criticality": 0.8},
    "approve": {"calls": 900, "criticality": 0.5},
    "allowance": {"calls": 700, "criticality": 0.2},
    "totalSupply": {"calls": 300, "criticality": 0.1},
    "name": {"calls": 40, "criticality": 0.0},
    "symbol": {"calls": 40, "criticality": 0.0},
}


def dump(name, doc):
    (OUT / name).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def main() -> int:
    OUT.mkdir(parents=True, exist_ok=True)
    a = analyze(bundled_source("erc20"), "erc20.sol")
    values = normalize_values(a.layout, random_erc20_values(random.Random(SEED), holders=100, allowance_pairs=32))
    keys = KeyEnumeration.from_values(a.layout, values)
    snapshot = encode_state(a.layout, values, keys)
    result = run_pipeline(a, snapshot, keys, UsageProfile.from_json(PROFILE), Config(gas_limit=1_000_000), "erc20")
    dump("values.json", values)
    dump("keys.json", keys.to_json())
    dump("profile.json", PROFILE)
    (OUT / "snapshot.json").write_text(snapshot.dumps())
    (OUT / "plan.json").write_text(result.plan.dumps())
    (OUT / "trace.json").write_text(result.trace.dumps())
    print(f"{len(snapshot)} slots, {len(result.plan.batches)} batches, final_equal={result.trace.final_equal}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
