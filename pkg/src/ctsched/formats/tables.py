"""Benchmark result tables (CSV and aligned text)."""
from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence

COLUMNS = ("Name", "states", "prod.", "Sat. Prob.", "Est. Sat.", "Time 1",
           "Exp. Prob.", "Est. Exp.", "Time 2")


@dataclass(frozen=True)
class BenchRow:
    name: str
    states: int
    prod: int
    sat_prob: Optional[float] = None
    est_sat: Optional[float] = None
    time_sat: Optional[float] = None
    exp_prob: Optional[float] = None
    est_exp: Optional[float] = None
    time_exp: Optional[float] = None

    def cells(self) -> List[str]:
        return [self.name, str(self.states), str(self.prod),
                _num(self.sat_prob), _num(self.est_sat), _num(self.time_sat),
                _num(self.exp_prob), _num(self.est_exp), _num(self.time_exp)]


def _num(x: Optional[float]) -> str:
    if x is None:
        return ""
    return f"{x:.6g}"


def emit_result_table(rows: Sequence[BenchRow], fmt: str = "csv") -> str:
    """Render rows in input order; `fmt` is 'csv' or 'table'."""
    grid = [list(COLUMNS)] + [row.cells() for row in rows]
    if fmt == "csv":
        return "\n".join(",".join(cells) for cells in grid) + "\n"
    if fmt == "table":
        widths = [max(len(r[i]) for r in grid) for i in range(len(COLUMNS))]
        lines = []
        for cells in grid:
            lines.append("  ".join(c.ljust(w) for c, w in zip(cells, widths)).rstrip())
        return "\n".join(lines) + "\n"
    raise ValueError(f"unknown table format '{fmt}'")
