"""Function/data dependency matrix and function priority ranking."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import networkx as nx
import numpy as np

from .errors import AnalysisError, ConfigError
from .frontend import ast
from .frontend.scope import function_references
from .layout import StorageLayout

__all__ = [
    "build_call_graph",
    "build_dependency_matrix",
    "DependencyMatrix",
    "UsageProfile",
    "PriorityVector",
    "compute_priority_vector",
    "DEFAULT_WEIGHTS",
]

DEFAULT_WEIGHTS = (0.5, 0.5)


def build_call_graph(contract: ast.ContractUnit) -> nx.DiGraph:
    """Directed graph with an edge f -> g for every call from f to g inside the contract."""
    graph = nx.DiGraph()
    graph.add_nodes_from(f.name for f in contract.functions)
    for fn in contract.functions:
        for ref in function_references(contract, fn):
            if ref.kind == "call":
                graph.add_edge(fn.name, ref.name)
            elif ref.kind == "unknown_call":
                line, col = contract.position(ref.node.span[0])
                raise AnalysisError(f"call to undeclared function {ref.name!r} in {fn.name!r}",
                                    contract.filename, line, col)
    return graph


@dataclass(frozen=True, eq=False)
class DependencyMatrix:
    functions: Tuple[str, ...]
    data_elements: Tuple[str, ...]
    cells: np.ndarray  # bool, shape (functions, data_elements)

    def __post_init__(self):
        self.cells.setflags(write=False)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DependencyMatrix):
            return NotImplemented
        return (self.functions == other.functions and self.data_elements == other.data_elements
                and np.array_equal(self.cells, other.cells))

    def depends(self, function: str, element: str) -> bool:
        return bool(self.cells[self.functions.index(function), self.data_elements.index(element)])

    def row(self, function: str) -> Tuple[str, ...]:
        """Data elements ``function`` depends on, in layout order."""
        mask = self.cells[self.functions.index(function)]
        return tuple(d for d, hit in zip(self.data_elements, mask) if hit)

    def column(self, element: str) -> Tuple[str, ...]:
        mask = self.cells[:, self.data_elements.index(element)]
        return tuple(f for f, hit in zip(self.functions, mask) if hit)

    def as_dict(self) -> Dict[str, List[str]]:
        return {f: list(self.row(f)) for f in self.functions}

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["function", *self.data_elements])
        for name, row in zip(self.functions, self.cells):
            w.writerow([name, *(int(x) for x in row)])
        return buf.getvalue()

    @classmethod
    def from_rows(cls, functions: Sequence[str], data_elements: Sequence[str],
                  rows: Mapping[str, Iterable[str]]) -> "DependencyMatrix":
        cells = np.zeros((len(functions), len(data_elements)), dtype=bool)
        col = {d: j for j, d in enumerate(data_elements)}
        for i, f in enumerate(functions):
            for d in rows.get(f, ()):
                if d not in col:
                    raise AnalysisError(f"function {f!r} depends on unknown data element {d!r}")
                cells[i, col[d]] = True
        return cls(tuple(functions), tuple(data_elements), cells)


def build_dependency_matrix(contract: ast.ContractUnit, layout: StorageLayout,
                            graph: Optional[nx.DiGraph] = None) -> DependencyMatrix:
    """Reads and writes of storage variables, closed over the call graph."""
    graph = build_call_graph(contract) if graph is None else graph
    labels = layout.labels
    col = {label: j for j, label in enumerate(labels)}
    functions = tuple(f.name for f in contract.functions)
    direct = np.zeros((len(functions), len(labels)), dtype=bool)
    for i, fn in enumerate(contract.functions):
        for ref in function_references(contract, fn):
            if ref.kind == "state":
                direct[i, col[ref.name]] = True
    row = {f: i for i, f in enumerate(functions)}
    cells = direct.copy()
    for i, f in enumerate(functions):
        for g in nx.descendants(graph, f):
            cells[i] |= direct[row[g]]
    return DependencyMatrix(functions, labels, cells)


@dataclass(frozen=True)
class UsageProfile:
    calls: Mapping[str, int]
    criticality: Mapping[str, float]

    def __post_init__(self):
        for name, n in self.calls.items():
            if isinstance(n, bool) or not isinstance(n, int) or n < 0:
                raise ConfigError(f"call count for {name!r} must be a non-negative integer, got {n!r}")
        for name, c in self.criticality.items():
            if isinstance(c, bool) or not isinstance(c, (int, float)) or math.isnan(c):
                raise ConfigError(f"criticality for {name!r} must be a number, got {c!r}")

    @classmethod
    def empty(cls) -> "UsageProfile":
        return cls({}, {})

    @classmethod
    def from_json(cls, doc: Mapping) -> "UsageProfile":
        if not isinstance(doc, Mapping):
            raise ConfigError("usage profile must be a JSON object")
        calls, crit = {}, {}
        for name, entry in doc.items():
            if not isinstance(entry, Mapping):
                raise ConfigError(f"usage profile entry for {name!r} must be an object")
            extra = set(entry) - {"calls", "criticality"}
            if extra:
                raise ConfigError(f"usage profile entry for {name!r} has unknown fields {sorted(extra)}")
            calls[name] = entry.get("calls", 0)
            crit[name] = entry.get("criticality", 0.0)
        return cls(calls, crit)

    @classmethod
    def load(cls, path) -> "UsageProfile":
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(json.load(fh))

    def count(self, name: str) -> int:
        return self.calls.get(name, 0)

    def crit(self, name: str) -> float:
        return min(1.0, max(0.0, float(self.criticality.get(name, 0.0))))


@dataclass(frozen=True)
class PriorityVector:
    functions: Tuple[str, ...]
    scores: Tuple[float, ...]
    ranks: Tuple[int, ...]  # 1 is most important

    def rank(self, name: str) -> int:
        return self.ranks[self.functions.index(name)]

    def score(self, name: str) -> float:
        return self.scores[self.functions.index(name)]

    def ordered(self) -> Tuple[str, ...]:
        """Function names from rank 1 down."""
        return tuple(f for _, f in sorted(zip(self.ranks, self.functions)))

    def to_json(self) -> dict:
        return {f: {"score": s, "rank": r} for f, s, r in zip(self.functions, self.scores, self.ranks)}


def compute_priority_vector(functions: Sequence[str], profile: UsageProfile,
                            weights: Tuple[float, float] = DEFAULT_WEIGHTS) -> PriorityVector:
    """score = w_freq * calls / max_calls + w_crit * criticality; rank by score, ties by position."""
    w_freq, w_crit = weights
    if w_freq < 0 or w_crit < 0 or not w_freq + w_crit > 0:
        raise ConfigError(f"priority weights must be non-negative with a positive sum, got {weights}")
    unknown = (set(profile.calls) | set(profile.criticality)) - set(functions)
    if unknown:
        raise ConfigError(f"usage profile names unknown functions {sorted(unknown)}")
    peak = max((profile.count(f) for f in functions), default=0)
    scores = tuple(
        w_freq * (profile.count(f) / peak if peak else 0.0) + w_crit * profile.crit(f)
        for f in functions
    )
    order = sorted(range(len(functions)), key=lambda i: (-scores[i], i))
    ranks = [0] * len(functions)
    for r, i in enumerate(order, start=1):
        ranks[i] = r
    return PriorityVector(tuple(functions), scores, tuple(ranks))
