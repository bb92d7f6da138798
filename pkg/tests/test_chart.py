import json

import pytest
from hypothesis import given

from conftest import small_charts
from loopcharts.chart import (ONE_LABEL, Chart, ChartError, LabeledChart,
                              dot_text, dumps, induced_chart, induced_steps,
                              is_proper_target, is_weakly_guarded, loads,
                              make_chart, one_closure, signatures)
from loopcharts.expr import parse_expr
from loopcharts.interp import labeled_interp, one_chart_interp

ONE = ONE_LABEL


def test_unreachable_vertices_are_collected():
    c = make_chart("p", [("p", "a", "q"), ("r", "b", "p")], ["r"])
    assert c.vertices == {"p", "q"}
    assert c.terminating == frozenset()


def test_invalid_charts_are_rejected():
    with pytest.raises(ChartError):
        Chart("x", frozenset({"y"}), frozenset(), frozenset(), frozenset())
    with pytest.raises(ChartError):
        Chart("x", frozenset({"x"}), frozenset({("x", "a", "z")}),
              frozenset(), frozenset({"a"}))
    with pytest.raises(ChartError):
        make_chart("x", [("x", "a", "x")], alphabet={"b"})
    with pytest.raises(ChartError):
        make_chart("x", [], alphabet={"a b"})


def test_weak_guardedness_means_no_cycle_of_empty_steps():
    assert is_weakly_guarded(make_chart("x", [("x", ONE, "y"), ("y", "a", "x")]))
    assert not is_weakly_guarded(
        make_chart("x", [("x", ONE, "y"), ("y", ONE, "x")]))


def test_induced_chart_pushes_termination_and_steps_back_along_empty_steps():
    c = make_chart("x", [("x", ONE, "y"), ("y", "a", "z"), ("y", ONE, "t")],
                   ["t"])
    assert one_closure(c, "x") == {"x", "y", "t"}
    trans, term = induced_steps(c)
    assert {("x", "a", "z"), ("y", "a", "z")} <= trans
    assert term == {"x", "y", "t"}
    ind = induced_chart(c)
    assert ind.is_one_free() and ind.vertices == {"x", "z"}
    assert not is_proper_target(c, "y") and is_proper_target(c, "z")


def test_signatures_record_induced_actions():
    c = make_chart("x", [("x", ONE, "y"), ("y", "a", "x"), ("x", "b", "y")])
    sig = signatures(c)
    assert sig["x"].actions == {"a", "b"} and sig["y"].actions == {"a"}


@given(small_charts())
def test_json_round_trip(c):
    back = loads(dumps(c))
    assert back == c
    assert dumps(back) == dumps(c)


def test_json_is_canonical_and_keeps_expressions_and_levels():
    w = labeled_interp(parse_expr("(a* . b*)*"))
    text = dumps(w)
    back = loads(text)
    assert isinstance(back, LabeledChart) and back == w
    assert back.chart.exprs == w.chart.exprs
    obj = json.loads(text)
    assert [v["id"] for v in obj["vertices"]] == sorted(w.chart.vertices)
    assert any(t["kind"] == "one" for t in obj["transitions"])


def test_malformed_json_raises_chart_error():
    with pytest.raises(ChartError):
        loads('{"start": "x"}')
    with pytest.raises(ChartError):
        loads('{"start": "x", "vertices": [{"id": "x"}], "transitions": '
              '[{"from": "x", "to": "x", "kind": "jump"}]}')


def test_dot_output_draws_empty_steps_dashed_and_final_vertices_doubled():
    c = one_chart_interp(parse_expr("a* . b"))
    text = dot_text(c)
    assert text.startswith("digraph")
    assert "style=dashed" in text and "doublecircle" in text
    assert text.count("->") == len(c.transitions) + 1
