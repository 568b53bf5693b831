"""Immutable in-memory data table.

The table is the single currency that flows between tools: loaders produce
one, transforms return a new one, estimators consume one.  Columns are typed
with a deliberately small vocabulary of kinds and use ``None`` for missing
cells so that missingness survives round trips through CSV.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np

from .errors import NameCollisionError, UnknownColumnError

#: allowed column kinds
KINDS = ("real", "integer", "categorical", "text", "boolean")

#: kinds whose values can be fed to numeric estimators directly
NUMERIC_KINDS = ("real", "integer", "boolean")


@dataclass(frozen=True)
class Column:
    """One named, typed column.

    Parameters
    ----------
    name : str
        Column label, unique within a table.
    kind : str
        One of ``real``, ``integer``, ``categorical``, ``text``, ``boolean``.
    values : tuple
        Cell values; ``None`` marks a missing cell.  Kinds map to python
        types: real -> float, integer -> int, boolean -> bool, categorical
        and text -> str.
    """

    name: str
    kind: str
    values: tuple

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown column kind '{self.kind}'")
        if not isinstance(self.values, tuple):
            object.__setattr__(self, "values", tuple(self.values))

    def is_numeric(self) -> bool:
        return self.kind in NUMERIC_KINDS

    def numeric(self) -> np.ndarray:
        """Values as a float array with NaN for missing cells."""
        out = np.empty(len(self.values), dtype=float)
        for i, v in enumerate(self.values):
            out[i] = np.nan if v is None else float(v)
        return out

    def present(self) -> np.ndarray:
        """Boolean mask of non-missing cells."""
        return np.array([v is not None for v in self.values], dtype=bool)

    def levels(self) -> list:
        """Sorted distinct non-missing values."""
        return sorted({v for v in self.values if v is not None})


@dataclass(frozen=True)
class DataTable:
    """An ordered collection of equal-length columns.

    Instances are immutable; every mutation-shaped operation returns a new
    table.  ``notes`` is an append-only free-text log that transforms use to
    record what they did to the data; ``name`` is the label the table is
    stored under in a session's memory.
    """

    columns: tuple[Column, ...]
    notes: tuple[str, ...] = field(default_factory=tuple)
    name: str = ""

    def __post_init__(self) -> None:
        if not isinstance(self.columns, tuple):
            object.__setattr__(self, "columns", tuple(self.columns))
        if not isinstance(self.notes, tuple):
            object.__setattr__(self, "notes", tuple(self.notes))
        seen: set[str] = set()
        length = None
        for col in self.columns:
            if col.name in seen:
                raise NameCollisionError(col.name)
            seen.add(col.name)
            if length is None:
                length = len(col.values)
            elif len(col.values) != length:
                raise ValueError(
                    f"column '{col.name}' has {len(col.values)} rows, expected {length}"
                )

    # -- lookups ------------------------------------------------------------

    @property
    def n_rows(self) -> int:
        return len(self.columns[0].values) if self.columns else 0

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.columns)

    def __contains__(self, name: str) -> bool:
        return any(c.name == name for c in self.columns)

    def column(self, name: str) -> Column:
        for c in self.columns:
            if c.name == name:
                return c
        raise UnknownColumnError(name)

    def require(self, names: Iterable[str]) -> list[Column]:
        return [self.column(n) for n in names]

    # -- derived views --------------------------------------------------------

    def numeric_matrix(self, names: Sequence[str]) -> np.ndarray:
        """Stack the named columns into an (n, k) float matrix (NaN = missing)."""
        if not names:
            return np.empty((self.n_rows, 0), dtype=float)
        return np.column_stack([self.column(n).numeric() for n in names])

    def complete_mask(self, names: Sequence[str]) -> np.ndarray:
        """Rows where every named column is present."""
        mask = np.ones(self.n_rows, dtype=bool)
        for n in names:
            mask &= self.column(n).present()
        return mask

    # -- functional updates ---------------------------------------------------

    def with_column(self, col: Column) -> "DataTable":
        if col.name in self:
            raise NameCollisionError(col.name)
        return replace(self, columns=self.columns + (col,))

    def replace_column(self, col: Column) -> "DataTable":
        if col.name not in self:
            raise UnknownColumnError(col.name)
        cols = tuple(col if c.name == col.name else c for c in self.columns)
        return replace(self, columns=cols)

    def without_columns(self, names: Iterable[str]) -> "DataTable":
        drop = set(names)
        for n in drop:
            if n not in self:
                raise UnknownColumnError(n)
        return replace(self, columns=tuple(c for c in self.columns if c.name not in drop))

    def select_rows(self, mask: np.ndarray) -> "DataTable":
        """Keep rows where ``mask`` is true; column order is preserved."""
        idx = np.flatnonzero(np.asarray(mask, dtype=bool))
        cols = tuple(
            Column(c.name, c.kind, tuple(c.values[i] for i in idx)) for c in self.columns
        )
        return replace(self, columns=cols)

    def with_note(self, note: str) -> "DataTable":
        return replace(self, notes=self.notes + (note,))
