import pytest
from hypothesis import given

from conftest import exprs
from loopcharts.bisim import are_bisimilar
from loopcharts.chart import ONE_LABEL, induced_chart, is_weakly_guarded
from loopcharts.expr import Star, parse_expr, terminates
from loopcharts.interp import (ResourceCapError, TssKind, chart_interp,
                               chart_interp_t0, derivatives, interpret,
                               labeled_interp, one_chart_interp)
from loopcharts.lee import verify_llee_witness

STAR_OF_STARS = parse_expr("(a* . b*)*")


def test_star_of_stars_chart_has_three_terminating_vertices():
    c = chart_interp(STAR_OF_STARS)
    assert len(c.vertices) == 3
    assert c.terminating == c.vertices
    assert c.is_one_free()


def test_star_of_stars_one_chart():
    c = one_chart_interp(STAR_OF_STARS)
    assert len(c.vertices) == 7
    assert c.terminating == {"1"}
    assert is_weakly_guarded(c)
    assert induced_chart(c) == chart_interp(STAR_OF_STARS)


def test_derivatives_of_an_action_and_a_star():
    assert derivatives(parse_expr("a")) == [("a", parse_expr("1"))]
    d = derivatives(parse_expr("a*"))
    assert d == [("a", parse_expr("(1 . a*)"))]


def test_interpret_dispatches_on_the_rule_system():
    e = parse_expr("a* . b")
    assert interpret(e, "chart") == chart_interp(e)
    assert interpret(e, TssKind.ONE_CHART) == one_chart_interp(e)
    assert interpret(e, "labeled") == labeled_interp(e)


@given(exprs)
def test_induced_one_chart_equals_chart(e):
    assert induced_chart(one_chart_interp(e)) == chart_interp(e)


@given(exprs)
def test_one_chart_is_weakly_guarded_and_only_one_terminates(e):
    c = one_chart_interp(e)
    assert is_weakly_guarded(c)
    assert c.terminating <= {"1"}
    assert all(not (t[1] == ONE_LABEL and t[0] == t[2]) for t in c.transitions)


@given(exprs)
def test_vertices_carry_their_expressions(e):
    c = chart_interp(e)
    assert c.exprs[c.start] == e
    for v in c.vertices:
        assert str(c.exprs[v]) == v
        assert (v in c.terminating) == terminates(c.exprs[v])


@given(exprs)
def test_variant_rules_give_bisimilar_charts(e):
    assert are_bisimilar(chart_interp(e), chart_interp_t0(e))


@given(exprs)
def test_labelled_interpretation_is_a_witness(e):
    w = labeled_interp(e)
    assert w.chart == one_chart_interp(e)
    rep = verify_llee_witness(w)
    assert rep.ok, rep.violations


def test_vertex_cap_is_enforced(monkeypatch):
    monkeypatch.setenv("LOOPCHARTS_VERTEX_CAP", "2")
    with pytest.raises(ResourceCapError):
        chart_interp(STAR_OF_STARS)


def test_star_body_that_terminates_gives_no_empty_step_cycle():
    e = Star(parse_expr("a* + 1"))
    assert is_weakly_guarded(one_chart_interp(e))
