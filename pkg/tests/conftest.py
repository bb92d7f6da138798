import os
import random

from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from loopcharts.expr import ONE, ZERO, Act, Prod, Star, Sum
from loopcharts.fuzz import random_chart

settings.register_profile(
    "default", max_examples=60, deadline=None,
    suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("thorough", max_examples=500, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

ACTS = [Act("a"), Act("b")]


def _compose(children):
    return st.one_of(st.builds(Sum, children, children),
                     st.builds(Prod, children, children),
                     st.builds(Star, children))


exprs = st.recursive(st.sampled_from([ZERO, ONE] + ACTS), _compose,
                     max_leaves=7)


def _one_free_compose(children):
    return st.one_of(st.builds(Sum, children, children),
                     st.builds(Prod, children, children),
                     st.builds(lambda f, g: Prod(Star(f), g),
                               children, children))


one_free_exprs = st.recursive(st.sampled_from([ZERO] + ACTS),
                              _one_free_compose, max_leaves=7)

understar_one_free_exprs = st.recursive(
    st.one_of(st.sampled_from([ZERO, ONE] + ACTS),
              st.builds(Star, one_free_exprs)),
    lambda ch: st.one_of(st.builds(Sum, ch, ch), st.builds(Prod, ch, ch)),
    max_leaves=4)


@st.composite
def small_charts(draw, max_vertices=5):
    seed = draw(st.integers(0, 2 ** 32 - 1))
    n = draw(st.integers(1, max_vertices))
    density = draw(st.sampled_from([0.15, 0.25, 0.4]))
    return random_chart(random.Random(seed), n, density=density)


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    lines = getattr(mod, "LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
