"""Bundled reference contracts and random state generators for them."""

from __future__ import annotations

import random
from importlib import resources
from typing import Any, Dict, List, Tuple

from .frontend import ContractUnit, parse_source

__all__ = ["STANDARDS", "bundled_source", "bundled_contract", "random_address", "random_erc20_values",
           "random_erc1155_values"]

STANDARDS = ("erc20", "erc721", "erc1155")


def bundled_source(standard: str) -> str:
    if standard not in STANDARDS:
        raise KeyError(f"no bundled contract {standard!r}; choose from {STANDARDS}")
    return resources.files("statemigrate").joinpath("contracts").joinpath(f"{standard}.sol").read_text(encoding="utf-8")


def bundled_contract(standard: str) -> ContractUnit:
    return parse_source(bundled_source(standard), filename=f"{standard}.sol")


def random_address(rng: random.Random) -> str:
    return "0x" + rng.getrandbits(160).to_bytes(20, "big").hex()


def _text(rng: random.Random, n: int) -> str:
    return "".join(rng.choice("ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789 ") for _ in range(n))


def random_erc20_values(rng: random.Random, holders: int = 32, allowance_pairs: int = 16,
                        name_lengths: Tuple[int, int] = (28, 36)) -> Dict[str, Any]:
    """A plausible ERC-20 state: nonzero balances summing to the supply, random allowances.

    Name lengths default to a window straddling the 31/32-byte boundary where
    the string encoding switches from inline to out-of-line.
    """
    addrs: List[str] = []
    seen = set()
    while len(addrs) < holders:
        a = random_address(rng)
        if a not in seen:
            seen.add(a)
            addrs.append(a)
    balances = {a: rng.randrange(1, 1 << 96) for a in addrs}
    allowances: Dict[str, Dict[str, int]] = {}
    if addrs:
        for _ in range(allowance_pairs):
            owner, spender = rng.choice(addrs), random_address(rng)
            allowances.setdefault(owner, {})[spender] = rng.randrange(1, 1 << 128)
    return {
        "_balances": balances,
        "_allowances": allowances,
        "_totalSupply": sum(balances.values()),
        "_name": _text(rng, rng.randint(*name_lengths)),
        "_symbol": _text(rng, rng.randint(1, 8)),
    }


def random_erc1155_values(rng: random.Random, token_ids: int = 8, holders: int = 16,
                          operator_pairs: int = 6, uri_length: int = 48) -> Dict[str, Any]:
    """Multi-token balances spread over a holder set, some operator approvals and a URI template."""
    addrs = [random_address(rng) for _ in range(holders)]
    balances: Dict[int, Dict[str, int]] = {}
    for _ in range(token_ids):
        owners = rng.sample(addrs, rng.randint(1, len(addrs))) if addrs else []
        if owners:
            balances[rng.getrandbits(64)] = {a: rng.randrange(1, 1 << 64) for a in owners}
    approvals: Dict[str, Dict[str, bool]] = {}
    for _ in range(operator_pairs if addrs else 0):
        approvals.setdefault(rng.choice(addrs), {})[random_address(rng)] = True
    uri = "https://tokens.example/" + _text(rng, max(0, uri_length - 30)).replace(" ", "") + "/{id}.json"
    return {"_balances": balances, "_operatorApprovals": approvals, "_uri": uri}
