import pytest
from hypothesis import given

from conftest import understar_one_free_exprs
from loopcharts.bisim import are_bisimilar, collapse
from loopcharts.chart import LabeledChart, make_chart
from loopcharts.expr import (ONE, Act, is_1free, is_normed,
                             is_understar_1free, parse_expr)
from loopcharts.extract import (ExtractionEnv, ExtractionError, extract,
                                extract_S, extract_T, extraction_map,
                                loops_back_to, verify_extraction)
from loopcharts.fixtures import load_fixture
from loopcharts.interp import chart_interp, one_chart_interp
from loopcharts.lee import lee_check


def _witnessed(e):
    c, _ = collapse(chart_interp(e))
    w, _ = lee_check(c)
    assert w is not None
    return c, w


def test_running_example_round_trips_to_an_isomorphic_chart():
    fx = load_fixture("running-example")
    c = chart_interp(fx.expr)
    assert len(c.vertices) == fx.value("vertices")
    c, w = _witnessed(fx.expr)
    e = extract(w)
    assert is_understar_1free(e)
    rep = verify_extraction(c, w, e)
    assert rep.ok, rep.problems
    assert rep.collapsed and rep.isomorphism
    assert are_bisimilar(chart_interp(e), c)


def test_single_loop_extracts_a_star():
    c = make_chart("r", [("r", "a", "x"), ("x", "b", "r"), ("r", "c", "y")],
                   ["y"])
    w, _ = lee_check(c)
    e = extract(w)
    assert are_bisimilar(chart_interp(e), c)
    assert verify_extraction(c, w, e).isomorphism


@given(understar_one_free_exprs)
def test_extraction_round_trip(f):
    c, w = _witnessed(f)
    rep = verify_extraction(c, w)
    assert rep.ok, rep.problems
    assert is_understar_1free(rep.expr)
    assert rep.functional_bisim and rep.isomorphism


@given(understar_one_free_exprs)
def test_intermediate_values(f):
    _, w = _witnessed(f)
    env = ExtractionEnv.of(w)
    smap = extraction_map(w, env)
    assert set(smap) == set(w.chart.vertices)
    for kind, key, case, res in env.log:
        assert is_understar_1free(res)
        if kind == "T":
            e, u, v = key
            if isinstance(e, Act):
                assert is_1free(res)
            # values that end at a return to the loop root can terminate
            if case != "free":
                assert is_normed(res)


@given(understar_one_free_exprs)
def test_returns_compose_along_direct_loop_backs(f):
    _, w = _witnessed(f)
    env = ExtractionEnv.of(w)
    rel = env.rel
    for u in sorted(rel.direct):
        chain = rel.chain(u)
        d = chain[0]
        for v in chain[1:]:
            via = extract_T(env, extract_T(env, Act("a"), u, d), d, v)
            assert extract_T(env, Act("a"), u, v) == via
        assert extract_S(env, ONE, u) == \
            extract_S(env, extract_T(env, ONE, u, d), d)


def test_loops_back_relation_is_closed_along_chains():
    c, w = _witnessed(load_fixture("running-example").expr)
    rel = loops_back_to(w)
    for u in rel.direct:
        assert {(u, v) for v in rel.chain(u)} <= rel.loops_back
    assert rel.loops_back <= rel.members


def test_extraction_rejects_charts_with_empty_steps_and_bad_witnesses():
    w1 = LabeledChart(one_chart_interp(parse_expr("a* . b")), {})
    with pytest.raises(ExtractionError):
        extract(w1)
    c = make_chart("r", [("r", "a", "r")])
    with pytest.raises(ExtractionError):
        extract(LabeledChart(c, {}))


def test_witness_must_mark_the_given_chart():
    c, w = _witnessed(parse_expr("a* . b"))
    other = chart_interp(parse_expr("b"))
    with pytest.raises(ExtractionError):
        verify_extraction(other, w)
