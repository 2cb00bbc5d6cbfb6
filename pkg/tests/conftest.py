import random
from pathlib import Path

import pytest

from statemigrate.fixtures import bundled_source, random_erc20_values
from statemigrate.pipeline import analyze
from statemigrate.state import KeyEnumeration, encode_state, normalize_values

GOLDENS = Path(__file__).parent / "goldens"


@pytest.fixture(scope="session")
def erc20():
    return analyze(bundled_source("erc20"), "erc20.sol")


@pytest.fixture(scope="session")
def erc721():
    return analyze(bundled_source("erc721"), "erc721.sol")


@pytest.fixture(scope="session")
def erc1155():
    return analyze(bundled_source("erc1155"), "erc1155.sol")


def erc20_state(layout, seed, holders=32, pairs=16):
    values = normalize_values(layout, random_erc20_values(random.Random(seed), holders, pairs))
    keys = KeyEnumeration.from_values(layout, values)
    return values, keys, encode_state(layout, values, keys)


# Acceptance criteria report: test_acceptance records (number, title, passed, detail)
# here and the summary hook prints one line per criterion.
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        title, passed, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n} {'PASS' if passed else 'FAIL'}: {title} ({detail})")
