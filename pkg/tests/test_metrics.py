import csv
import dataclasses
import io
import json

import pytest

from statemigrate.analysis import DependencyMatrix
from statemigrate.errors import MetricError
from statemigrate.metrics import (
    FatReport, build_report, compute_fat, compute_fat_monolithic, emit_json, emit_report, plot_data,
)
from statemigrate.plan import MigrationPlan
from statemigrate.sim import execute_plan
from statemigrate.state import Snapshot

from conftest import GOLDENS

# Dependency rows counted by hand from the bundled sources, transitive through
# internal calls. Internal functions are part of the average.
HAND_COUNTS = {
    "erc20": {
        "name": 1, "symbol": 1, "decimals": 0, "totalSupply": 1, "balanceOf": 1, "transfer": 1,
        "allowance": 1, "approve": 1, "transferFrom": 2, "_transfer": 1, "_approve": 1,
    },
}
HAND_FAT = {"erc20": (11, 11, 5), "erc721": (28, 15, 6), "erc1155": (12, 11, 3)}


def matrix(rows, elements=("a", "b", "c")):
    named = {f"f{i}": r for i, r in enumerate(rows)}
    return DependencyMatrix.from_rows(list(named), list(elements), named)


def test_trivial_cases():
    assert compute_fat(matrix([[]])) == 0.0
    assert compute_fat(matrix([["a", "b", "c"]])) == 3.0
    assert compute_fat(matrix([["a"], ["a", "b", "c"]])) == 2.0
    assert compute_fat_monolithic(matrix([["a"]])) == 3.0


def test_no_functions_is_an_error():
    with pytest.raises(MetricError):
        compute_fat(matrix([]))


@pytest.mark.parametrize("std", sorted(HAND_FAT))
def test_hand_counted_fat(request, std):
    a = request.getfixturevalue(std)
    total, n, data = HAND_FAT[std]
    assert len(a.matrix.functions) == n
    assert compute_fat(a.matrix) == pytest.approx(total / n)
    assert compute_fat_monolithic(a.matrix) == data


def test_erc20_rows(erc20):
    r = build_report("erc20", erc20.matrix)
    assert dict(r.dependency_counts) == HAND_COUNTS["erc20"]
    assert r.reduction_percent == pytest.approx(80.0)


def test_reduction_unchanged_by_duplicating_functions(erc721):
    m = erc721.matrix
    rows = {f: list(m.row(f)) for f in m.functions}
    doubled = dict(rows, **{f + "_copy": r for f, r in rows.items()})
    m2 = DependencyMatrix.from_rows(list(doubled), list(m.data_elements), doubled)
    assert compute_fat(m2) == pytest.approx(compute_fat(m))


def test_fat_is_monotone_in_rows():
    lo = matrix([["a"], []])
    hi = matrix([["a", "b"], []])
    assert compute_fat(lo) < compute_fat(hi)


@pytest.fixture(scope="module")
def golden_trace():
    plan = MigrationPlan.loads((GOLDENS / "erc20_100" / "plan.json").read_text())
    snap = Snapshot.from_json(json.loads((GOLDENS / "erc20_100" / "snapshot.json").read_text()))
    return execute_plan(plan, snap)[1]


def test_downtime_and_flagging(erc20, golden_trace):
    r = build_report("erc20", erc20.matrix, golden_trace, t_acceptable=3_000_000)
    assert r.downtime["decimals"] == {"batch": 0, "gas": 0}
    assert r.downtime["transfer"] == {"batch": 3, "gas": 3 * 992208}
    assert r.downtime["name"] == {"batch": 4, "gas": 3 * 992208 + 275364}
    assert set(r.flagged) == {f for f, d in r.downtime.items() if d["batch"] == 4}
    assert "transfer" not in r.flagged
    assert build_report("erc20", erc20.matrix, golden_trace).flagged == ()


def test_never_activated_is_flagged(erc20, golden_trace):
    short = dataclasses.replace(golden_trace, batches=golden_trace.batches[:2])
    r = build_report("erc20", erc20.matrix, short, t_acceptable=10 ** 12)
    assert r.downtime["transfer"] is None
    assert "transfer" in r.flagged
    assert "decimals" not in r.flagged


def test_report_json_round_trip(erc20, golden_trace):
    r = build_report("erc20", erc20.matrix, golden_trace, t_acceptable=1)
    doc = json.loads(emit_json([r]))[0]
    assert FatReport.from_json(doc) == r
    assert doc["reduction_percent"] == pytest.approx(80.0)


def test_markdown_report(erc20, erc1155, golden_trace):
    text = emit_report([build_report("erc20", erc20.matrix, golden_trace, 3_000_000),
                        build_report("erc1155", erc1155.matrix)])
    assert "| erc20 | 1.000 | 5.000 | 80.0% |" in text
    assert "| transfer | 1 | 3 | 2976624 |" in text
    assert "| name (over threshold) | 1 | 4 |" in text
    assert "## erc1155" in text
    assert "\u2014" not in text


def test_plot_data(erc20, erc721, erc1155):
    reports = [build_report(s, a.matrix) for s, a in (("erc20", erc20), ("erc721", erc721), ("erc1155", erc1155))]
    rows = list(csv.reader(io.StringIO(plot_data(reports))))
    assert rows[0] == ["standard", "fat_incremental", "fat_monolithic"]
    assert [r[0] for r in rows[1:]] == ["erc20", "erc721", "erc1155"]
    assert float(rows[2][1]) == pytest.approx(28 / 15)
    assert float(rows[3][2]) == 3.0
