"""Column summaries for exploratory analysis."""

from __future__ import annotations

import math

from econagent.summary import describe

from conftest import build_table


def test_numeric_summary_fields():
    t = build_table({"x": ("real", [1.0, 2.0, 3.0, None])})
    s = next(r for r in describe(t).rows if r.name == "x")
    assert s.count == 3 and s.missing == 1
    assert math.isclose(s.mean, 2.0)
    assert math.isclose(s.sd, 1.0)  # ddof = 1
    assert s.min == 1.0 and s.max == 3.0


def test_single_value_has_no_sd():
    t = build_table({"x": ("real", [5.0, None])})
    s = next(r for r in describe(t).rows if r.name == "x")
    assert s.count == 1 and s.sd is None


def test_boolean_counts_as_numeric():
    t = build_table({"b": ("boolean", [True, False, True])})
    s = next(r for r in describe(t).rows if r.name == "b")
    assert math.isclose(s.mean, 2.0 / 3.0)


def test_text_levels_sorted_with_counts():
    t = build_table({"g": ("text", ["b", "a", "b", None])})
    s = next(r for r in describe(t).rows if r.name == "g")
    assert s.levels == (("a", 1), ("b", 2))
    assert s.missing == 1


def test_json_shape_keyed_by_column():
    t = build_table({"x": ("real", [1.0]), "g": ("text", ["a"])})
    obj = describe(t).to_json_obj()
    assert set(obj) == {"x", "g"}
    assert obj["x"]["count"] == 1


def test_render_text_mentions_every_column():
    t = build_table({"x": ("real", [1.0]), "g": ("text", ["a"])})
    text = describe(t).render_text()
    assert "x" in text and "g" in text
