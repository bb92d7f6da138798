import random

import pytest
from hypothesis import given

from conftest import exprs, small_charts, understar_one_free_exprs
from loopcharts.bisim import collapse
from loopcharts.chart import LabeledChart, has_cycle, make_chart
from loopcharts.expr import parse_expr
from loopcharts.fixtures import load_fixture
from loopcharts.interp import chart_interp, labeled_interp, one_chart_interp
from loopcharts.lee import (compact_levels, derive_elim_run,
                            directly_loops_back, generated_subchart,
                            is_loop_chart, lee_check, loop_entry_transitions,
                            loop_members, loop_subcharts, loops_back,
                            satisfies_lee, stage_count, verify_llee_witness)


def _simple_loop():
    return make_chart("r", [("r", "a", "x"), ("x", "b", "r"), ("r", "c", "y")],
                      ["y"])


def test_single_loop_is_found_and_marked():
    c = _simple_loop()
    w, run = lee_check(c)
    assert w is not None
    assert w.entries() == [("r", "a", "x")]
    assert len(run.stages) == 1
    assert not has_cycle(run.residual.vertices,
                         [(s, d) for (s, _, d) in run.residual.transitions])


def test_loop_conditions_on_generated_subcharts():
    c = _simple_loop()
    assert is_loop_chart(generated_subchart(c, "r", [("r", "a", "x")])).ok
    # the terminating exit makes this entry set generate a non-loop
    bad = generated_subchart(c, "r", [("r", "c", "y")])
    assert not is_loop_chart(bad).ok
    assert loop_entry_transitions(c) == {("r", "a", "x")}
    assert len(loop_subcharts(c)) == 1


def test_star_of_stars_has_no_witness():
    c = chart_interp(parse_expr("(a* . b*)*"))
    assert lee_check(c) == (None, None)
    assert not satisfies_lee(c)
    # only the two self-loops generate loops; removing them leaves a cycle
    ents = loop_entry_transitions(c)
    assert len(ents) == 2 and all(s == d for (s, _, d) in ents)


def test_three_nested_loops_need_three_stages():
    fx = load_fixture("three-loops")
    c = chart_interp(fx.expr)
    w, run = lee_check(c)
    assert w is not None and verify_llee_witness(w).ok
    assert len(run.stages) == fx.value("elimination_stages")
    # the two inner loops are independent, so they can share a stage
    assert stage_count(compact_levels(w)) == 2
    assert verify_llee_witness(compact_levels(w)).ok


def test_tampered_witnesses_are_rejected():
    c = _simple_loop()
    w, _ = lee_check(c)
    assert not verify_llee_witness(LabeledChart(c, {})).ok
    wrong = LabeledChart(c, {("r", "c", "y"): 1})
    rep = verify_llee_witness(wrong)
    assert not rep.ok and rep.violations


@given(exprs)
def test_labelled_interpretation_is_a_layered_witness(e):
    w = labeled_interp(e)
    assert verify_llee_witness(w).ok
    run = derive_elim_run(w)
    assert len(run.stages) == len(w.entry_ids())


@given(understar_one_free_exprs)
def test_collapsed_under_star_one_free_charts_have_witnesses(e):
    c, _ = collapse(chart_interp(e))
    w, _ = lee_check(c)
    assert w is not None
    assert verify_llee_witness(w).ok


@given(small_charts(max_vertices=4))
def test_found_witnesses_always_verify(c):
    w, run = lee_check(c)
    if w is not None:
        assert verify_llee_witness(w).ok
        assert verify_llee_witness(compact_levels(w)).ok


def test_loops_back_relations_on_nested_loops():
    # r -a-> x -b-> r is the outer loop, x -c-> y -d-> x the inner one
    c = make_chart("r", [("r", "a", "x"), ("x", "b", "r"), ("x", "c", "y"),
                         ("y", "d", "x"), ("r", "e", "z")], ["z"])
    w = LabeledChart(c, {("x", "c", "y"): 1, ("r", "a", "x"): 2})
    assert verify_llee_witness(w).ok
    # a loop body continues along body transitions only
    assert loop_members(w) == {"x": {"r"}, "y": {"x"}}
    assert loops_back(w) == {"x": {"r"}, "y": {"x"}}
    assert directly_loops_back(w) == {"x": "r", "y": "x"}


def test_one_chart_of_star_of_stars_carries_a_witness_its_chart_lacks():
    e = parse_expr("(a* . b*)*")
    assert lee_check(one_chart_interp(e))[0] is not None
    assert lee_check(chart_interp(e))[0] is None


def test_search_is_deterministic():
    rng = random.Random(11)
    for _ in range(20):
        from loopcharts.fuzz import random_chart
        c = random_chart(rng, 4)
        assert lee_check(c)[0] == lee_check(c)[0]


def test_node_cap_raises():
    from loopcharts.bisim import SearchCapError
    c = chart_interp(parse_expr("(a* . b*)*"))
    with pytest.raises(SearchCapError):
        lee_check(c, node_cap=1)
