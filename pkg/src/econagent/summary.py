"""Per-column descriptive summaries."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .table import Column, DataTable


@dataclass(frozen=True)
class ColumnSummary:
    name: str
    kind: str
    count: int
    missing: int
    mean: Optional[float] = None
    sd: Optional[float] = None
    min: Optional[float] = None
    max: Optional[float] = None
    levels: Optional[tuple[tuple[str, int], ...]] = None


@dataclass(frozen=True)
class TableSummary:
    rows: tuple[ColumnSummary, ...]

    def to_json_obj(self) -> dict:
        """JSON-ready mapping keyed by column name, in column order."""
        out: dict[str, dict] = {}
        for r in self.rows:
            entry: dict = {"kind": r.kind, "count": r.count, "missing": r.missing}
            if r.levels is not None:
                entry["levels"] = {k: v for k, v in r.levels}
            else:
                entry.update(mean=r.mean, sd=r.sd, min=r.min, max=r.max)
            out[r.name] = entry
        return out

    def render_text(self) -> str:
        lines = []
        for r in self.rows:
            head = f"{r.name} ({r.kind}): count={r.count} missing={r.missing}"
            if r.levels is not None:
                body = ", ".join(f"{k}:{v}" for k, v in r.levels)
                lines.append(f"{head} levels[{body}]")
            elif r.count:
                sd = "n/a" if r.sd is None else f"{r.sd:.6g}"
                lines.append(
                    f"{head} mean={r.mean:.6g} sd={sd} min={r.min:.6g} max={r.max:.6g}"
                )
            else:
                lines.append(head)
        return "\n".join(lines)


def _summarize_numeric(col: Column) -> ColumnSummary:
    vals = col.numeric()
    present = vals[~np.isnan(vals)]
    n = present.size
    return ColumnSummary(
        name=col.name,
        kind=col.kind,
        count=n,
        missing=len(col.values) - n,
        mean=float(present.mean()) if n else None,
        sd=float(present.std(ddof=1)) if n > 1 else None,
        min=float(present.min()) if n else None,
        max=float(present.max()) if n else None,
    )


def _summarize_levels(col: Column) -> ColumnSummary:
    present = [v for v in col.values if v is not None]
    counts = Counter(str(v) for v in present)
    return ColumnSummary(
        name=col.name,
        kind=col.kind,
        count=len(present),
        missing=len(col.values) - len(present),
        levels=tuple(sorted(counts.items())),
    )


def describe(table: DataTable) -> TableSummary:
    """Summarize every column, in column order.

    Numeric columns report count, missing, mean, sample sd, min and max;
    categorical and text columns report level counts.  An empty table gives
    an empty summary.
    """
    rows = []
    for col in table.columns:
        if col.is_numeric():
            rows.append(_summarize_numeric(col))
        else:
            rows.append(_summarize_levels(col))
    return TableSummary(tuple(rows))
