"""CSV loading and saving for :class:`~econagent.table.DataTable`.

Loading only ever infers three kinds: ``boolean`` when every non-missing
cell is ``true``/``false``, ``real`` when every non-missing cell parses as a
float, and ``text`` otherwise.  Integer and categorical columns are produced
by explicit construction or by transforms, never by inference, so reloading
a saved file cannot silently change estimator behaviour.
"""

from __future__ import annotations

import csv
import io as _io
from pathlib import Path
from typing import Iterable

from .errors import EmptyFileError, MalformedRowError
from .table import Column, DataTable

#: tokens treated as a missing cell on load
DEFAULT_NA_TOKENS = frozenset({"", "NA", "."})

_BOOL = {"true": True, "false": False}


def _infer(values: list) -> tuple[str, tuple]:
    present = [v for v in values if v is not None]
    if present and all(v.lower() in _BOOL for v in present):
        return "boolean", tuple(None if v is None else _BOOL[v.lower()] for v in values)
    if present:
        try:
            return "real", tuple(None if v is None else float(v) for v in values)
        except (TypeError, ValueError):
            pass
    return "text", tuple(values)


def loads_csv(
    text: str,
    *,
    delimiter: str = ",",
    header_row: bool = True,
    na_tokens: Iterable[str] = DEFAULT_NA_TOKENS,
    name: str = "",
) -> DataTable:
    """Parse CSV text into a table; see :func:`load_csv`."""
    na = frozenset(na_tokens)
    rows = list(csv.reader(_io.StringIO(text), delimiter=delimiter))
    if not rows:
        raise EmptyFileError("no rows")
    if header_row:
        header = rows[0]
        body = rows[1:]
        first_line = 2
    else:
        header = [f"c{j + 1}" for j in range(len(rows[0]))]
        body = rows
        first_line = 1
    if not header or all(h == "" for h in header):
        raise EmptyFileError("empty header row")
    cells: list[list] = [[] for _ in header]
    for lineno, row in enumerate(body, start=first_line):
        if len(row) != len(header):
            raise MalformedRowError(lineno, f"{len(row)} fields, expected {len(header)}")
        for j, raw in enumerate(row):
            cells[j].append(None if raw in na else raw)
    columns = []
    for col_name, values in zip(header, cells):
        kind, parsed = _infer(values)
        columns.append(Column(col_name, kind, parsed))
    return DataTable(tuple(columns), name=name)


def load_csv(
    path: str | Path,
    *,
    delimiter: str = ",",
    header_row: bool = True,
    na_tokens: Iterable[str] = DEFAULT_NA_TOKENS,
) -> DataTable:
    """Load a CSV file.

    Raises
    ------
    FileNotFoundError
        The path does not exist.
    EmptyFileError
        The file is empty or has a blank header.
    MalformedRowError
        A data row has a different field count than the header; the error
        carries the 1-based line number.
    """
    p = Path(path)
    text = p.read_text(encoding="utf-8")
    return loads_csv(
        text,
        delimiter=delimiter,
        header_row=header_row,
        na_tokens=na_tokens,
        name=p.stem,
    )


def _format_cell(value, kind: str) -> str:
    if value is None:
        return ""
    if kind == "boolean":
        return "true" if value else "false"
    if kind == "real":
        return repr(float(value))
    if kind == "integer":
        return str(int(value))
    return str(value)


def dumps_csv(table: DataTable) -> str:
    """Render a table as CSV text; floats use ``repr`` so values round-trip."""
    buf = _io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(table.names)
    for i in range(table.n_rows):
        writer.writerow(_format_cell(c.values[i], c.kind) for c in table.columns)
    return buf.getvalue()


def write_csv(table: DataTable, path: str | Path) -> None:
    Path(path).write_text(dumps_csv(table), encoding="utf-8")
