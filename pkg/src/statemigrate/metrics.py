"""Function Activation Threshold (FAT) and downtime reporting.

FAT is the mean number of data elements a function waits for before it can
run on the new contract. Under incremental migration that is the size of the
function's dependency row. Under monolithic (constructor-time) migration every
function waits for the whole state, so FAT equals the number of data elements.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import List, Mapping, Optional, Sequence

from .analysis import DependencyMatrix
from .errors import MetricError
from .sim import MigrationTrace

__all__ = [
    "FatReport",
    "compute_fat",
    "compute_fat_monolithic",
    "build_report",
    "emit_report",
    "emit_json",
    "plot_data",
]


def compute_fat(matrix: DependencyMatrix) -> float:
    """Unweighted mean dependency count over all functions."""
    if not matrix.functions:
        raise MetricError("FAT is undefined for a contract with no functions")
    return float(matrix.cells.sum()) / len(matrix.functions)


def compute_fat_monolithic(matrix: DependencyMatrix) -> float:
    return float(len(matrix.data_elements))


@dataclass(frozen=True)
class FatReport:
    standard: str
    dependency_counts: Mapping[str, int]
    fat_incremental: float
    fat_monolithic: float
    downtime: Optional[Mapping[str, Optional[Mapping[str, int]]]] = None
    t_acceptable: Optional[int] = None
    flagged: Sequence[str] = field(default=())

    @property
    def reduction_percent(self) -> float:
        if not self.fat_monolithic:
            return 0.0
        return 100.0 * (self.fat_monolithic - self.fat_incremental) / self.fat_monolithic

    def to_json(self) -> dict:
        return {
            "standard": self.standard,
            "dependency_counts": dict(self.dependency_counts),
            "fat_incremental": self.fat_incremental,
            "fat_monolithic": self.fat_monolithic,
            "reduction_percent": self.reduction_percent,
            "downtime": None if self.downtime is None else dict(self.downtime),
            "t_acceptable": self.t_acceptable,
            "flagged": list(self.flagged),
        }

    @classmethod
    def from_json(cls, doc: Mapping) -> "FatReport":
        return cls(
            standard=doc["standard"],
            dependency_counts=dict(doc["dependency_counts"]),
            fat_incremental=doc["fat_incremental"],
            fat_monolithic=doc["fat_monolithic"],
            downtime=doc.get("downtime"),
            t_acceptable=doc.get("t_acceptable"),
            flagged=tuple(doc.get("flagged", ())),
        )


def build_report(standard: str, matrix: DependencyMatrix, trace: Optional[MigrationTrace] = None,
                 t_acceptable: Optional[int] = None) -> FatReport:
    """FAT figures for one contract, plus downtime per function when a trace is given.

    With ``t_acceptable`` (in gas), functions whose activation costs more gas
    than that, or that never activated, are flagged.
    """
    counts = {f: int(n) for f, n in zip(matrix.functions, matrix.cells.sum(axis=1))}
    downtime = trace.downtime() if trace is not None else None
    flagged: List[str] = []
    if downtime is not None and t_acceptable is not None:
        flagged = [f for f, d in downtime.items() if d is None or d["gas"] > t_acceptable]
    return FatReport(standard, counts, compute_fat(matrix), compute_fat_monolithic(matrix),
                     downtime, t_acceptable, tuple(flagged))


def _fmt(x: float) -> str:
    return f"{x:.3f}"


def emit_report(reports: Sequence[FatReport]) -> str:
    """Markdown summary of one or more reports."""
    lines = ["# Function activation threshold", "",
             "| standard | FAT incremental | FAT monolithic | reduction |",
             "|---|---:|---:|---:|"]
    for r in reports:
        lines.append(f"| {r.standard} | {_fmt(r.fat_incremental)} | {_fmt(r.fat_monolithic)} "
                     f"| {r.reduction_percent:.1f}% |")
    for r in reports:
        lines += ["", f"## {r.standard}", "", "| function | dependencies | activation batch | gas at activation |",
                  "|---|---:|---:|---:|"]
        for f, n in r.dependency_counts.items():
            d = r.downtime.get(f) if r.downtime is not None else None
            if r.downtime is None:
                batch = gas = "-"
            elif d is None:
                batch = gas = "never"
            else:
                batch, gas = str(d["batch"]), str(d["gas"])
            mark = " (over threshold)" if f in r.flagged else ""
            lines.append(f"| {f}{mark} | {n} | {batch} | {gas} |")
        if r.t_acceptable is not None:
            lines += ["", f"Threshold: {r.t_acceptable} gas; {len(r.flagged)} function(s) over it."]
    return "\n".join(lines) + "\n"


def emit_json(reports: Sequence[FatReport]) -> str:
    return json.dumps([r.to_json() for r in reports], indent=2, sort_keys=True) + "\n"


def plot_data(reports: Sequence[FatReport]) -> str:
    """CSV rows (standard, fat_incremental, fat_monolithic) for a grouped bar chart."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["standard", "fat_incremental", "fat_monolithic"])
    for r in reports:
        w.writerow([r.standard, repr(r.fat_incremental), repr(r.fat_monolithic)])
    return buf.getvalue()

