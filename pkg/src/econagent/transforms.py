"""Variable-construction transforms: dummy encoding, derived columns, median splits."""

from __future__ import annotations

import math
from typing import Optional, Sequence

import numpy as np

from .errors import (
    ArityMismatchError,
    EmptyReferenceSubsetError,
    NameCollisionError,
    NonCategoricalColumnError,
    TooManyLevelsError,
    UnknownColumnError,
)
from .table import Column, DataTable

MAX_LEVELS = 1000


def _level_label(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float) and value.is_integer():
        return str(int(value))
    return str(value)


def _encodable_levels(col: Column) -> list:
    """Distinct non-missing levels, or raise when the column is continuous."""
    if col.kind == "real":
        for v in col.values:
            if v is not None and not float(v).is_integer():
                raise NonCategoricalColumnError(col.name)
    elif col.kind not in ("categorical", "integer", "boolean", "text"):
        raise NonCategoricalColumnError(col.name)
    levels = {v for v in col.values if v is not None}
    if len(levels) > MAX_LEVELS:
        raise TooManyLevelsError(col.name, len(levels), MAX_LEVELS)
    # lexicographic order on the rendered labels decides the dropped level
    return sorted(levels, key=_level_label)


def one_hot_encode(
    table: DataTable, columns: Sequence[str], drop_first: bool = True
) -> DataTable:
    """Replace the named columns with 0/1 indicator columns.

    Each level of a source column becomes an integer column named
    ``<col>__<level>``; with ``drop_first`` the lexicographically first
    level is omitted as the reference category.  Indicators are placed where
    the source column stood; all other columns keep their order.  Continuous
    real columns are rejected so that covariates cannot be dummied by
    accident.
    """
    for name in columns:
        table.column(name)
    out_cols: list[Column] = []
    for col in table.columns:
        if col.name not in columns:
            out_cols.append(col)
            continue
        levels = _encodable_levels(col)
        kept = levels[1:] if drop_first and levels else levels
        for level in kept:
            vals = tuple(
                None if v is None else int(v == level) for v in col.values
            )
            label = f"{col.name}__{_level_label(level)}"
            if any(c.name == label for c in out_cols) or label in table.names:
                raise NameCollisionError(label)
            out_cols.append(Column(label, "integer", vals))
    note = f"one_hot_encode: {', '.join(columns)} (drop_first={str(drop_first).lower()})"
    return DataTable(tuple(out_cols), table.notes + (note,), table.name)


_UNARY = ("log", "square", "indicator_ge")
_BINARY = ("product", "difference")


def derive_column(
    table: DataTable,
    new_name: str,
    transform: str,
    sources: Sequence[str],
    threshold: Optional[float] = None,
) -> DataTable:
    """Append a new column computed from numeric source columns.

    Transforms: ``log``, ``square`` and ``indicator_ge`` take one source;
    ``product`` and ``difference`` take two.  ``indicator_ge`` needs a
    ``threshold`` and yields 1 when source >= threshold.  Nonpositive inputs
    to ``log`` become missing cells and the count is recorded in the table
    notes.
    """
    if transform not in _UNARY + _BINARY:
        raise ValueError(f"unknown transform '{transform}'")
    needed = 1 if transform in _UNARY else 2
    if len(sources) != needed:
        raise ArityMismatchError(transform, needed, len(sources))
    if new_name in table.names:
        raise NameCollisionError(new_name)
    if transform == "indicator_ge" and threshold is None:
        raise ValueError("indicator_ge requires a threshold")
    cols = [table.column(s) for s in sources]
    for c in cols:
        if not c.is_numeric():
            raise UnknownColumnError(c.name)

    kind = "integer" if transform == "indicator_ge" else "real"
    values: list = []
    n_domain = 0
    for i in range(table.n_rows):
        xs = [c.values[i] for c in cols]
        if any(x is None for x in xs):
            values.append(None)
            continue
        if transform == "log":
            if float(xs[0]) <= 0:
                n_domain += 1
                values.append(None)
            else:
                values.append(math.log(float(xs[0])))
        elif transform == "square":
            values.append(float(xs[0]) ** 2)
        elif transform == "indicator_ge":
            values.append(int(float(xs[0]) >= threshold))
        elif transform == "product":
            values.append(float(xs[0]) * float(xs[1]))
        else:
            values.append(float(xs[0]) - float(xs[1]))

    note = f"derive_column: {new_name} = {transform}({', '.join(sources)})"
    if transform == "indicator_ge":
        note = f"derive_column: {new_name} = indicator_ge({sources[0]}, {threshold})"
    notes = table.notes + (note,)
    if n_domain:
        notes += (f"derive_column: {n_domain} nonpositive value(s) set to missing in log",)
    out = DataTable(
        table.columns + (Column(new_name, kind, tuple(values)),), notes, table.name
    )
    return out


def median_split(
    table: DataTable,
    value_column: str,
    key_column: Optional[str] = None,
    key_value=None,
    entity_column: Optional[str] = None,
    group_column: str = "high_group",
) -> tuple[DataTable, str]:
    """Append a boolean column flagging rows strictly above the median.

    Without a key, the median is taken over all non-missing values and each
    row is flagged on its own value.  With ``key_column``/``key_value``, the
    median is computed over the reference rows only (for example one base
    year of a panel) and the flag is assigned per entity, constant across
    all of that entity's rows; ``entity_column`` is required in that mode.
    Ties fall in the low group.
    """
    if group_column in table.names:
        raise NameCollisionError(group_column)
    col = table.column(value_column)
    vals = col.numeric()

    if key_column is None:
        present = vals[~np.isnan(vals)]
        if present.size == 0:
            raise EmptyReferenceSubsetError("value column has no non-missing values")
        med = float(np.median(present))
        flags = tuple(
            None if v is None else bool(float(v) > med) for v in col.values
        )
        note = f"median_split: {value_column} median {med!r}"
    else:
        if entity_column is None:
            raise ValueError("entity_column is required when key_column is given")
        key = table.column(key_column)
        entity = table.column(entity_column)

        def key_matches(v) -> bool:
            if v is None:
                return False
            if key.is_numeric():
                try:
                    return float(v) == float(key_value)
                except (TypeError, ValueError):
                    return False
            return str(v) == str(key_value)

        ref_rows = [i for i in range(table.n_rows) if key_matches(key.values[i])]
        ref_vals = [vals[i] for i in ref_rows if not np.isnan(vals[i])]
        if not ref_vals:
            raise EmptyReferenceSubsetError(
                f"no reference rows with {key_column} = {key_value!r}"
            )
        med = float(np.median(ref_vals))
        # one reference value per entity: averaged when several reference rows exist
        per_entity: dict = {}
        for i in ref_rows:
            e = entity.values[i]
            if e is None or np.isnan(vals[i]):
                continue
            per_entity.setdefault(e, []).append(float(vals[i]))
        flag_of = {e: bool(np.mean(v) > med) for e, v in per_entity.items()}
        flags = tuple(flag_of.get(e) for e in entity.values)
        note = (
            f"median_split: {value_column} at {key_column}={key_value!r}"
            f" median {med!r}, flag per {entity_column}"
        )

    out = DataTable(
        table.columns + (Column(group_column, "boolean", flags),),
        table.notes + (note,),
        table.name,
    )
    return out, group_column
