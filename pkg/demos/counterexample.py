"""The collapsed chart that no weakly guarded LLEE 1-chart refines, checked
piece by piece and then through the bounded search."""

from loopcharts.bisim import bisimilarity, is_collapsed
from loopcharts.counterexample import (build_C1, build_C10, build_gv,
                                       build_K, run_counterexample_suite,
                                       search_wg_llee_refinement)
from loopcharts.expr import parse_expr, star_height
from loopcharts.interp import chart_interp
from loopcharts.lee import lee_check, loop_entry_transitions

gv = build_gv()
print("expression of star height", star_height(gv))
print("its chart:", len(chart_interp(gv).vertices), "vertices")

K = build_K()
print("K:", len(K.vertices), "vertices, bisimilar pairs:",
      [sorted(b) for b in bisimilarity(K).nontrivial()])

c10 = build_C10()
print("collapse:", len(c10.vertices), "vertices, collapsed",
      is_collapsed(c10), "| loop entries:", len(loop_entry_transitions(c10)))

for name, c in (("C10", c10), ("C1", build_C1())):
    res = search_wg_llee_refinement(c10, 1, 2, start=c)
    print(f"{name}: LEE {lee_check(c)[0] is not None}, refinement within "
          f"budget {res.budget}: {res.found} ({res.explored} candidates)")

sos = chart_interp(parse_expr("(a* . b*)*"))
res = search_wg_llee_refinement(sos, 3, 4)
print("\nfor contrast, (a* . b*)* is refinable:", res.certificate.moves)

print("\nfull suite:")
for line in run_counterexample_suite().lines():
    print(" ", line)
