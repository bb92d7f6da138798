import random

import pytest

from loopcharts import fuzz as fz
from loopcharts.expr import (Star, expr_size, is_1free, is_understar_1free,
                             parse_expr)


def test_generators_respect_size_and_class():
    rng = random.Random(0)
    for n in range(1, 15):
        assert expr_size(fz.random_expr(rng, n)) == n
        assert is_1free(fz.random_1free(rng, n))
        assert is_understar_1free(fz.random_understar_1free(rng, n))


def test_generation_is_seeded():
    assert fz.generate(5, 20, 10) == fz.generate(5, 20, 10)
    assert fz.generate(5, 20, 10) != fz.generate(6, 20, 10)
    assert all(is_understar_1free(e) for e in fz.generate(1, 30, 12, "usf"))


def test_random_charts_are_one_free_and_start_at_the_first_vertex():
    rng = random.Random(1)
    for _ in range(20):
        c = fz.random_chart(rng, 4)
        assert c.is_one_free() and c.start == "s0"
        assert c.alphabet == {"a", "b"}


def test_default_campaign_is_clean():
    rep = fz.fuzz(42, 200, 12)
    assert rep.checked == 200
    assert rep.ok, rep.to_json_obj()["violations"][:3]


@pytest.mark.parametrize("name", sorted(fz.PROPERTIES))
def test_each_property_holds_on_samples(name):
    for e in fz.generate(9, 40, 10):
        assert fz.PROPERTIES[name](e) == [], (name, str(e))


def test_shrinking_finds_a_minimal_star():
    def has_star(e):
        return "*" in str(e)
    big = parse_expr("(a . b + (a* . b) . 1) . (b + 0)")
    small = fz.shrink(big, has_star)
    assert isinstance(small, Star) and expr_size(small) == 2


def test_violations_are_reported_and_shrunk(monkeypatch):
    def no_long_sums(e):
        return ["too big"] if expr_size(e) > 3 else []
    monkeypatch.setitem(fz.PROPERTIES, "no_long", no_long_sums)
    rep = fz.fuzz(3, 30, 8, props=["no_long"])
    assert not rep.ok
    first = rep.violations[0]
    assert first.prop == "no_long" and first.messages == ["too big"]
    assert expr_size(parse_expr(first.shrunk)) == 4
    assert rep.to_json_obj()["violations"][0]["prop"] == "no_long"


def test_crashing_property_counts_as_violation(monkeypatch):
    def boom(e):
        raise RuntimeError("kaput")
    monkeypatch.setitem(fz.PROPERTIES, "boom", boom)
    rep = fz.fuzz(3, 2, 4, props=["boom"], shrink_first=False)
    assert len(rep.violations) == 2
    assert "kaput" in rep.violations[0].messages[0]


def test_invalid_campaign_arguments():
    with pytest.raises(ValueError):
        fz.fuzz(1, 0, 5)


def test_extraction_round_trip_helper_reports_nothing_on_good_inputs():
    for f in fz.generate(2, 25, 12, "usf"):
        assert fz.extraction_roundtrip(f) == []
