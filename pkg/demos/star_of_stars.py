"""Walk through (a* . b*)*: a chart without loop structure whose 1-chart has
one, and how eliminating 1-transitions turns the latter into the former."""

from loopcharts.chart import induced_chart
from loopcharts.elim import eliminate_nonbacklinks, normalize
from loopcharts.expr import parse_expr
from loopcharts.interp import chart_interp, labeled_interp, one_chart_interp
from loopcharts.lee import compact_levels, lee_check, stage_count


def show(title, c, levels=None):
    print(f"\n{title}: {len(c.vertices)} vertices, "
          f"{len(c.transitions)} transitions")
    for (s, a, d) in sorted(c.transitions):
        lv = (levels or {}).get((s, a, d), 0)
        lab = "1" if a == "__1__" else a
        print(f"  {s}  --{lab}{f'[{lv}]' if lv else ''}-->  {d}")


e = parse_expr("(a* . b*)*")
c = chart_interp(e)
show("chart", c)
print("all vertices terminate:", c.terminating == c.vertices)
print("loop witness for the chart:", lee_check(c)[0])

w = labeled_interp(e)
show("1-chart with its loop marking", w.chart, w.levels)
print("its induced chart is the chart:", induced_chart(w.chart) == c)
print("stages after compaction:", stage_count(compact_levels(w)))

res, trace, _ = eliminate_nonbacklinks(w)
print(f"\nremoving 1-transitions that are not back-links: {len(trace)} steps")
for step in trace.steps:
    print("  removed", step.removed[0], "->", step.removed[2])
show("result", res.chart, res.levels)

n, _ = normalize(one_chart_interp(e))
print("\nremoving all 1-transitions gives the chart back:", n == c)
