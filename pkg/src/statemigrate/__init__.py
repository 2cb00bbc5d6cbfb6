"""Incremental, priority-ordered migration of smart-contract storage.

The pipeline runs parse -> storage layout -> dependency matrix -> priority ->
shards -> gas-limited plan -> simulated execution -> activation metrics.
"""

__version__ = "0.1.0"

from .analysis import (
    DependencyMatrix,
    PriorityVector,
    UsageProfile,
    build_call_graph,
    build_dependency_matrix,
    compute_priority_vector,
)
from .errors import MigrationError
from .frontend import ContractUnit, parse_source, tokenize
from .keccak import keccak256
from .layout import StorageLayout, compute_layout, mapping_slot
from .metrics import FatReport, build_report, compute_fat, compute_fat_monolithic, emit_report
from .pipeline import Config, analyze, run_pipeline
from .plan import GasModel, MigrationPlan, activation_map, order_data_elements, order_shards, pack_batches
from .sim import MigrationTrace, SimChain, execute_plan, verify_state_equality
from .state import KeyEnumeration, Shard, Snapshot, decode_state, encode_state, generate_shards

__all__ = [
    "__version__",
    "ContractUnit",
    "Config",
    "DependencyMatrix",
    "FatReport",
    "GasModel",
    "KeyEnumeration",
    "MigrationError",
    "MigrationPlan",
    "MigrationTrace",
    "PriorityVector",
    "Shard",
    "SimChain",
    "Snapshot",
    "StorageLayout",
    "UsageProfile",
    "activation_map",
    "analyze",
    "build_call_graph",
    "build_dependency_matrix",
    "build_report",
    "compute_fat",
    "compute_fat_monolithic",
    "compute_layout",
    "compute_priority_vector",
    "decode_state",
    "emit_report",
    "encode_state",
    "execute_plan",
    "generate_shards",
    "keccak256",
    "mapping_slot",
    "order_data_elements",
    "order_shards",
    "pack_batches",
    "parse_source",
    "run_pipeline",
    "tokenize",
    "verify_state_equality",
]
