"""End-to-end wiring: source text to plan, trace and report."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Mapping, Optional, Tuple

from .analysis import (
    DEFAULT_WEIGHTS,
    DependencyMatrix,
    PriorityVector,
    UsageProfile,
    build_dependency_matrix,
    compute_priority_vector,
)
from .errors import ConfigError
from .frontend import ContractUnit, parse_source
from .layout import StorageLayout, compute_layout
from .metrics import FatReport, build_report
from .plan import GasModel, MigrationPlan, order_shards, pack_batches
from .sim import MigrationTrace, execute_plan
from .state import KeyEnumeration, Shard, Snapshot, generate_shards

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

__all__ = ["Config", "Analysis", "PipelineResult", "analyze", "analyze_file", "run_pipeline"]

DEFAULT_GAS_LIMIT = 1_000_000

_TOP_KEYS = {"gas_limit", "max_slots_per_batch", "t_acceptable", "source_address", "target_address",
             "gas_model", "priority", "paths"}
_PRIORITY_KEYS = {"w_freq", "w_crit"}
_PATH_KEYS = {"profile", "keys", "snapshot"}


@dataclass(frozen=True)
class Config:
    gas_limit: int = DEFAULT_GAS_LIMIT
    gas_model: GasModel = field(default_factory=GasModel)
    weights: Tuple[float, float] = DEFAULT_WEIGHTS
    max_slots_per_batch: Optional[int] = None
    t_acceptable: Optional[int] = None
    source_address: Optional[str] = None
    target_address: Optional[str] = None
    profile: Optional[str] = None
    keys: Optional[str] = None
    snapshot: Optional[str] = None

    def __post_init__(self):
        if isinstance(self.gas_limit, bool) or not isinstance(self.gas_limit, int) or self.gas_limit <= 0:
            raise ConfigError(f"gas_limit: must be a positive integer, got {self.gas_limit!r}")
        if self.max_slots_per_batch is not None and (
                not isinstance(self.max_slots_per_batch, int) or self.max_slots_per_batch < 1):
            raise ConfigError(f"max_slots_per_batch: must be a positive integer, got {self.max_slots_per_batch!r}")
        if self.t_acceptable is not None and (not isinstance(self.t_acceptable, int) or self.t_acceptable < 0):
            raise ConfigError(f"t_acceptable: must be a non-negative integer, got {self.t_acceptable!r}")
        w_freq, w_crit = self.weights
        if not all(isinstance(w, (int, float)) and not isinstance(w, bool) for w in self.weights):
            raise ConfigError(f"priority: weights must be numbers, got {self.weights!r}")
        if w_freq < 0 or w_crit < 0 or not w_freq + w_crit > 0:
            raise ConfigError(f"priority: weights must be non-negative with a positive sum, got {self.weights!r}")
        for name in ("source_address", "target_address"):
            v = getattr(self, name)
            if v is not None and not _is_address(v):
                raise ConfigError(f"{name}: expected a 0x-prefixed 20-byte hex address, got {v!r}")

    @classmethod
    def from_mapping(cls, doc: Mapping[str, Any], base: Optional[Path] = None) -> "Config":
        unknown = set(doc) - _TOP_KEYS
        if unknown:
            raise ConfigError(f"unknown config key(s): {', '.join(sorted(unknown))}")
        kwargs: dict = {k: doc[k] for k in ("gas_limit", "max_slots_per_batch", "t_acceptable",
                                            "source_address", "target_address") if k in doc}
        if "gas_model" in doc:
            try:
                kwargs["gas_model"] = GasModel.from_json(doc["gas_model"])
            except ConfigError as exc:
                raise ConfigError(f"gas_model: {exc}") from None
        prio = doc.get("priority", {})
        bad = set(prio) - _PRIORITY_KEYS
        if bad:
            raise ConfigError(f"unknown config key(s): {', '.join('priority.' + k for k in sorted(bad))}")
        kwargs["weights"] = (prio.get("w_freq", DEFAULT_WEIGHTS[0]), prio.get("w_crit", DEFAULT_WEIGHTS[1]))
        paths = doc.get("paths", {})
        bad = set(paths) - _PATH_KEYS
        if bad:
            raise ConfigError(f"unknown config key(s): {', '.join('paths.' + k for k in sorted(bad))}")
        for k, v in paths.items():
            p = Path(v)
            kwargs[k] = str(base / p if base is not None and not p.is_absolute() else p)
        return cls(**kwargs)

    @classmethod
    def load(cls, path) -> "Config":
        path = Path(path)
        try:
            with open(path, "rb") as fh:
                doc = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from None
        return cls.from_mapping(doc, base=path.parent)

    def override(self, **changes) -> "Config":
        """Copy with every non-None keyword applied; flags beat the file."""
        return replace(self, **{k: v for k, v in changes.items() if v is not None})


def _is_address(v: Any) -> bool:
    if not isinstance(v, str) or len(v) != 42 or not v.lower().startswith("0x"):
        return False
    try:
        int(v[2:], 16)
    except ValueError:
        return False
    return True


@dataclass(frozen=True)
class Analysis:
    contract: ContractUnit
    layout: StorageLayout
    matrix: DependencyMatrix


def analyze(source: str, filename: str = "<input>", name: Optional[str] = None,
            source_address: Optional[str] = None) -> Analysis:
    contract = parse_source(source, name, filename, source_address)
    layout = compute_layout(contract)
    return Analysis(contract, layout, build_dependency_matrix(contract, layout))


def analyze_file(path, name: Optional[str] = None) -> Analysis:
    path = Path(path)
    return analyze(path.read_text(encoding="utf-8"), str(path), name)


@dataclass(frozen=True)
class PipelineResult:
    analysis: Analysis
    priority: PriorityVector
    shards: Tuple[Shard, ...]
    plan: MigrationPlan
    trace: MigrationTrace
    report: FatReport


def run_pipeline(analysis: Analysis, snapshot: Snapshot, keys: Optional[KeyEnumeration] = None,
                 profile: Optional[UsageProfile] = None, config: Config = Config(),
                 standard: Optional[str] = None) -> PipelineResult:
    """Priority, shards, plan, simulation and FAT report for an analyzed contract and its state."""
    matrix = analysis.matrix
    priority = compute_priority_vector(matrix.functions, profile or UsageProfile.empty(), config.weights)
    shards = tuple(generate_shards(analysis.layout, snapshot, keys))
    plan = pack_batches(order_shards(shards, matrix, priority), matrix, config.gas_limit, config.gas_model,
                        config.max_slots_per_batch, config.source_address, config.target_address)
    _, trace = execute_plan(plan, snapshot)
    report = build_report(standard or analysis.contract.name, matrix, trace, config.t_acceptable)
    return PipelineResult(analysis, priority, shards, plan, trace, report)
