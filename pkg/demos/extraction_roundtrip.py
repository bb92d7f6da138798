"""From a chart with a loop witness back to an expression, and the check
that nothing was lost on the way."""

import random

from loopcharts.bisim import collapse
from loopcharts.expr import expr_size, parse_expr
from loopcharts.extract import extract, verify_extraction
from loopcharts.fuzz import random_understar_1free
from loopcharts.interp import chart_interp
from loopcharts.lee import lee_check


def round_trip(f):
    c, _ = collapse(chart_interp(f))
    w, _ = lee_check(c)
    e = extract(w)
    rep = verify_extraction(c, w, e)
    print(f"input     {f}")
    print(f"collapse  {len(c.vertices)} vertices, "
          f"{len(w.entries())} loop entries")
    print(f"extracted {e}  (size {expr_size(e)})")
    print(f"verdict   functional bisimulation {rep.functional_bisim}, "
          f"isomorphism {rep.isomorphism}\n")


round_trip(parse_expr("((1 . a) . (c . a + a . (b + b . a))*) . 0"))
rng = random.Random(1)
for _ in range(3):
    round_trip(random_understar_1free(rng, 16))
