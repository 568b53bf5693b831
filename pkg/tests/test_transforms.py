"""Column derivation, dummy encoding and median splits."""

from __future__ import annotations

import math

import pytest

from econagent.errors import (
    ArityMismatchError,
    EmptyReferenceSubsetError,
    NonCategoricalColumnError,
    TooManyLevelsError,
    UnknownColumnError,
)
from econagent.transforms import derive_column, median_split, one_hot_encode

from conftest import build_table


# ---------------------------------------------------------------------------
# one-hot encoding
# ---------------------------------------------------------------------------


def test_one_hot_drop_first_sorted_levels():
    t = build_table({"race": ("integer", [2, 1, 3, 2]), "y": ("real", [1.0] * 4)})
    out = one_hot_encode(t, ["race"])
    assert "race" not in out.names
    assert "race__1" not in out.names  # reference level dropped
    assert out.column("race__2").values == (1, 0, 0, 1)
    assert out.column("race__3").values == (0, 0, 1, 0)


def test_one_hot_keep_all_levels():
    t = build_table({"g": ("text", ["b", "a"])})
    out = one_hot_encode(t, ["g"], drop_first=False)
    assert out.column("g__a").values == (0, 1)
    assert out.column("g__b").values == (1, 0)


def test_one_hot_missing_stays_missing():
    t = build_table({"g": ("text", ["a", None, "b"])})
    out = one_hot_encode(t, ["g"], drop_first=False)
    assert out.column("g__a").values == (1, None, 0)


def test_one_hot_boolean_labels():
    t = build_table({"b": ("boolean", [True, False, True])})
    out = one_hot_encode(t, ["b"])
    assert out.column("b__true").values == (1, 0, 1)


def test_one_hot_integral_real_accepted():
    t = build_table({"g": ("real", [1.0, 2.0, 1.0])})
    out = one_hot_encode(t, ["g"])
    assert out.column("g__2").values == (0, 1, 0)


def test_one_hot_continuous_real_rejected():
    t = build_table({"x": ("real", [1.5, 2.25])})
    with pytest.raises(NonCategoricalColumnError):
        one_hot_encode(t, ["x"])


def test_one_hot_too_many_levels():
    t = build_table({"g": ("integer", list(range(1001)))})
    with pytest.raises(TooManyLevelsError):
        one_hot_encode(t, ["g"])


def test_one_hot_unknown_column():
    t = build_table({"x": ("real", [1.0])})
    with pytest.raises(UnknownColumnError):
        one_hot_encode(t, ["nope"])


def test_one_hot_appends_note():
    t = build_table({"g": ("text", ["a", "b"])})
    out = one_hot_encode(t, ["g"])
    assert any("g" in n for n in out.notes)


# ---------------------------------------------------------------------------
# derived columns
# ---------------------------------------------------------------------------


def test_derive_square():
    t = build_table({"x": ("real", [2.0, -3.0, None])})
    out = derive_column(t, new_name="x2", transform="square", sources=["x"])
    assert out.column("x2").values == (4.0, 9.0, None)


def test_derive_log_nonpositive_becomes_missing_with_note():
    t = build_table({"x": ("real", [math.e, 0.0, -1.0])})
    out = derive_column(t, new_name="lx", transform="log", sources=["x"])
    vals = out.column("lx").values
    assert math.isclose(vals[0], 1.0) and vals[1] is None and vals[2] is None
    assert any("2" in n for n in out.notes)


def test_derive_product_and_difference():
    t = build_table({"a": ("real", [2.0, 3.0]), "b": ("real", [5.0, 7.0])})
    out = derive_column(t, new_name="ab", transform="product", sources=["a", "b"])
    assert out.column("ab").values == (10.0, 21.0)
    out2 = derive_column(t, new_name="d", transform="difference", sources=["a", "b"])
    assert out2.column("d").values == (-3.0, -4.0)


def test_derive_indicator_ge():
    t = build_table({"x": ("real", [1.0, 5.0, None])})
    out = derive_column(t, new_name="hi", transform="indicator_ge", sources=["x"], threshold=5.0)
    assert out.column("hi").kind == "integer"
    assert out.column("hi").values == (0, 1, None)


def test_derive_indicator_requires_threshold():
    t = build_table({"x": ("real", [1.0])})
    with pytest.raises(ValueError):
        derive_column(t, new_name="hi", transform="indicator_ge", sources=["x"])


def test_derive_arity_mismatch():
    t = build_table({"a": ("real", [1.0]), "b": ("real", [2.0])})
    with pytest.raises(ArityMismatchError):
        derive_column(t, new_name="z", transform="square", sources=["a", "b"])


# ---------------------------------------------------------------------------
# median split
# ---------------------------------------------------------------------------


def test_median_split_simple_strictly_above():
    t = build_table({"v": ("real", [1.0, 2.0, 3.0, 4.0])})
    out, name = median_split(t, value_column="v")
    assert name == "high_group"
    # median 2.5; strictly above -> rows 3 and 4
    assert out.column(name).values == (0, 0, 1, 1)


def test_median_split_median_itself_is_low():
    t = build_table({"v": ("real", [1.0, 2.0, 3.0])})
    out, name = median_split(t, value_column="v")
    assert out.column(name).values == (0, 0, 1)


def test_median_split_keyed_per_entity():
    # two states, population measured in a reference year
    t = build_table(
        {
            "state": ("text", ["s1", "s1", "s2", "s2"]),
            "year": ("real", [1990.0, 1991.0, 1990.0, 1991.0]),
            "pop": ("real", [10.0, 99.0, 20.0, 1.0]),
        }
    )
    out, name = median_split(
        t,
        value_column="pop",
        key_column="year",
        key_value=1990.0,
        entity_column="state",
    )
    # reference rows: s1 -> 10, s2 -> 20; median 15; s2 strictly above
    assert out.column(name).values == (0, 0, 1, 1)


def test_median_split_keyed_requires_entity():
    t = build_table({"k": ("real", [1.0]), "v": ("real", [2.0])})
    with pytest.raises(ValueError):
        median_split(t, value_column="v", key_column="k", key_value=1.0)


def test_median_split_empty_reference_subset():
    t = build_table(
        {
            "state": ("text", ["s1"]),
            "year": ("real", [1991.0]),
            "pop": ("real", [10.0]),
        }
    )
    with pytest.raises(EmptyReferenceSubsetError):
        median_split(
            t, value_column="pop", key_column="year", key_value=1990.0, entity_column="state"
        )


def test_median_split_entity_without_reference_gets_missing_flag():
    t = build_table(
        {
            "state": ("text", ["s1", "s2"]),
            "year": ("real", [1990.0, 1991.0]),
            "pop": ("real", [10.0, 20.0]),
        }
    )
    out, name = median_split(
        t, value_column="pop", key_column="year", key_value=1990.0, entity_column="state"
    )
    assert out.column(name).values == (0, None)
