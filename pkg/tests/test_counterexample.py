import random

import pytest

from loopcharts.bisim import are_bisimilar, bisimilarity, is_collapsed
from loopcharts.chart import ONE_LABEL, induced_chart, is_weakly_guarded
from loopcharts.counterexample import (ROLES, brute_force_refinement,
                                       build_C, build_C1, build_C2,
                                       build_C2_shared, build_C10, build_C12,
                                       build_gv, build_K,
                                       enumerate_refinements, name_vertices,
                                       oracle_agreement,
                                       run_counterexample_suite,
                                       search_wg_llee_refinement)
from loopcharts.elim import normalize, refines
from loopcharts.expr import is_understar_1free, parse_expr, star_height
from loopcharts.fuzz import random_chart
from loopcharts.interp import chart_interp
from loopcharts.lee import lee_check, loop_entry_transitions


def test_expression_and_its_charts():
    gv = build_gv()
    assert star_height(gv) == 2 and not is_understar_1free(gv)
    assert len(chart_interp(gv).vertices) == 15
    C = build_C()
    assert is_weakly_guarded(C.chart)
    assert induced_chart(C.chart) == build_K()


def test_K_has_one_bisimilar_pair_and_named_roles():
    K = build_K()
    assert len(K.vertices) == 10
    assert [sorted(b) for b in bisimilarity(K).nontrivial()] == [["w1", "w2"]]
    assert set(K.vertices) == set(ROLES)
    assert name_vertices(K) == {r: r for r in ROLES}


def test_collapsed_chart_has_nine_vertices_and_no_loops():
    c10 = build_C10()
    assert len(c10.vertices) == 9 and is_collapsed(c10)
    assert are_bisimilar(c10, build_K())
    assert loop_entry_transitions(c10) == set()
    assert lee_check(c10)[0] is None


@pytest.mark.parametrize("build,labels,target", [
    (build_C1, {"a", "b", "c"}, "v"),
    (build_C2, {"a", "c", "d"}, "w1bar"),
])
def test_single_refinements_drop_three_action_labels_for_one_empty_step(
        build, labels, target):
    c10, d = build_C10(), build()
    removed = c10.transitions - d.transitions
    added = d.transitions - c10.transitions
    # a- and c-transitions leave w2 in pairs, so three labels
    # account for five transitions
    assert {t[1] for t in removed} == labels
    assert len(removed) == 5 and {t[0] for t in removed} == {"w2"}
    assert added == {("w2", ONE_LABEL, target)}
    assert refines(d, c10)
    assert lee_check(d)[0] is None


def test_double_refinement_has_no_loops():
    c12 = build_C12()
    assert refines(c12, build_C10())
    assert loop_entry_transitions(c12) == set()


def test_shared_variant_refines_the_collapse():
    assert refines(build_C2_shared(), build_C10())


def test_star_of_stars_has_a_certificate_with_larger_budget():
    base = chart_interp(parse_expr("(a* . b*)*"))
    res = search_wg_llee_refinement(base, 3, 4)
    assert res.found and not res.inconclusive
    cert = res.certificate
    assert cert.verify()
    assert normalize(cert.chart)[0] == base
    assert lee_check(base)[0] is None


def test_search_returns_trivial_certificate_for_charts_with_loops():
    base = chart_interp(parse_expr("(a . b)* . c"))
    res = search_wg_llee_refinement(base, 1, 1)
    assert res.found and res.certificate.moves == []


def test_hitting_the_candidate_cap_is_inconclusive_not_negative():
    res = search_wg_llee_refinement(build_C10(), 1, 2, cap=5)
    assert res.inconclusive and not res.found


def test_enumerator_only_yields_refinements():
    base = chart_interp(parse_expr("(a* . b*)*"))
    n = 0
    for d in enumerate_refinements(base, 1, 1):
        assert refines(d, base)
        n += 1
    assert n > 1


def test_structured_search_agrees_with_enumerator_on_charts_without_loops():
    rng = random.Random(7)
    seen = found = 0
    while seen < 12:
        c = random_chart(rng, rng.randint(2, 3),
                         density=rng.choice([0.3, 0.45]))
        if lee_check(c)[0] is not None:
            continue
        seen += 1
        s = search_wg_llee_refinement(c, 1, 1)
        b = brute_force_refinement(c, 1, 1)
        assert s.found == (b is not None)
        if s.found:
            found += 1
            assert s.certificate.verify()
            assert normalize(s.certificate.chart)[0] == c
    assert found > 0


def test_small_agreement_run():
    rep = oracle_agreement(seed=5, count=10, max_vertices=3, partition_max=5)
    assert rep.ok and rep.charts == 10 and rep.partition_checks == 10


@pytest.mark.slow
def test_full_suite_passes_and_states_its_budget():
    rep = run_counterexample_suite(1, 2)
    failed = [c.name for c in rep.checks if not c.ok]
    assert failed == []
    obj = rep.to_json_obj()
    assert obj["budget"] == {"fresh_vertices": 1, "added_one_transitions": 2}
    assert "budget" in rep.lines()[0]
