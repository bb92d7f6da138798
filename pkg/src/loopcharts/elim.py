"""1-transition elimination.

An elimination step removes a 1-transition ``v0 -1-> v``, copies every
outgoing transition of ``v`` to ``v0``, transfers immediate termination from
``v`` to ``v0`` and garbage collects.  The induced chart is invariant under
these steps, and on weakly guarded 1-charts they terminate in the induced
chart.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Optional

from .chart import (ONE_LABEL, Chart, LabeledChart, induced_chart,
                    is_proper_target, is_weakly_guarded, make_chart)
from .lee import (is_backlink, is_one_transition_limited, lee_check,
                  loop_subchart_of_witness, verify_llee_witness)


class ElimError(ValueError):
    pass


@dataclass
class ElimStep:
    removed: tuple             # the eliminated 1-transition (v0, 1, v)
    target_terminating: bool   # whether termination moved to v0
    added: list                # transitions copied to v0
    collected: list            # vertices garbage collected afterwards


@dataclass
class ElimTrace:
    steps: list = field(default_factory=list)

    def __len__(self):
        return len(self.steps)


def elim_step(c: Chart, t, levels: Optional[dict] = None):
    """Eliminate the 1-transition ``t``.

    With ``levels`` given, copied transitions inherit the level of ``t`` and
    the updated level map is returned as a third component.
    """
    t = tuple(t)
    v0, lab, v = t
    if lab != ONE_LABEL or t not in c.transitions:
        raise ElimError(f"{t!r} is not a 1-transition of the chart")
    if v0 == v:
        raise ElimError("cannot eliminate a 1-transition self-loop")
    copies = [(v0, l, w) for (_, l, w) in c.out(v)]
    if (v0, ONE_LABEL, v0) in copies:
        raise ElimError("elimination would create a 1-self-loop; "
                        "the chart is not weakly guarded")
    trans = (set(c.transitions) - {t}) | set(copies)
    term = set(c.terminating)
    if v in c.terminating:
        term.add(v0)
    new = make_chart(c.start, trans, term, alphabet=c.alphabet,
                     exprs=c.exprs)
    added = sorted(set(copies) - set(c.transitions))
    step = ElimStep(t, v in c.terminating, added,
                    sorted(c.vertices - new.vertices))
    if levels is None:
        return new, step
    lv = levels.get(t, 0)
    new_levels = {k: x for k, x in levels.items()
                  if k in new.transitions and k != t}
    for tr in added:
        if tr in new.transitions:
            if lv:
                new_levels[tr] = lv
            else:
                new_levels.pop(tr, None)
    return new, step, new_levels


def one_heights(c: Chart) -> dict:
    """Length of the longest 1-transition path from each vertex."""
    memo: dict = {}

    def h(v, stack=()):
        if v in memo:
            return memo[v]
        if v in stack:
            raise ElimError("1-transition cycle: chart not weakly guarded")
        best = 0
        for (_, l, w) in c.out(v):
            if l == ONE_LABEL:
                best = max(best, 1 + h(w, stack + (v,)))
        memo[v] = best
        return best

    for v in c.vertices:
        h(v)
    return memo


def maximal_path_measure(c: Chart) -> int:
    """Sum over vertices of the total length of all maximal 1-paths."""
    memo: dict = {}

    def paths(v):
        # (number of maximal 1-paths from v, their total length)
        if v not in memo:
            outs = [w for (_, l, w) in c.out(v) if l == ONE_LABEL]
            if not outs:
                memo[v] = (1, 0)
            else:
                n = tot = 0
                for w in outs:
                    k, s = paths(w)
                    n += k
                    tot += s + k
                memo[v] = (n, tot)
        return memo[v]

    return sum(paths(v)[1] for v in c.vertices)


def normalize(c: Chart, order: str = "bottomup", seed: int = 0):
    """Eliminate all 1-transitions.

    ``order`` is ``"bottomup"`` (targets without outgoing 1-transitions
    first) or ``"random"``.  Returns ``(chart, trace)``.
    """
    if not is_weakly_guarded(c):
        raise ElimError("normalize requires a weakly guarded 1-chart")
    rng = random.Random(seed)
    trace = ElimTrace()
    while True:
        ones = c.one_transitions
        if not ones:
            return c, trace
        if order == "random":
            t = rng.choice(ones)
        else:
            h = one_heights(c)
            t = min(ones, key=lambda x: (h[x[2]], x))
        n_before = len(c.vertices)
        c, step = elim_step(c, t)
        if not (n_before - 1 <= len(c.vertices) <= n_before):
            raise AssertionError("vertex bound violated by an elimination")
        trace.steps.append(step)


def replay(c: Chart, trace: ElimTrace) -> Chart:
    for step in trace.steps:
        c, _ = elim_step(c, step.removed)
    return c


def refines(c1: Chart, c2: Chart) -> bool:
    """Whether ``c1`` rewrites to ``c2`` by 1-transition eliminations, i.e.
    whether the induced chart of ``c1`` is ``c2``."""
    if c1.alphabet != c2.alphabet or not c2.is_one_free():
        return False
    if not is_weakly_guarded(c1):
        return False
    return induced_chart(c1) == c2


def is_llee_one_lim(w: LabeledChart) -> bool:
    return (is_weakly_guarded(w.chart) and verify_llee_witness(w).ok
            and is_one_transition_limited(w))


def eliminate_nonbacklinks(w: LabeledChart):
    """Eliminate 1-transitions that are not back-links until every remaining
    1-transition is one.

    Copied transitions take the level of the eliminated 1-transition; if the
    resulting marking is not a witness a fresh one is searched for.  Returns
    ``(witness, trace, recomputed)`` where ``recomputed`` counts fallbacks.
    """
    if not verify_llee_witness(w).ok:
        raise ElimError("input is not an LLEE witness")
    if not is_weakly_guarded(w.chart):
        raise ElimError("input is not weakly guarded")
    trace = ElimTrace()
    recomputed = 0
    before = induced_chart(w.chart)
    while True:
        bad = [t for t in w.chart.one_transitions if not is_backlink(w, t)]
        if not bad:
            break
        h = one_heights(w.chart)
        t = min(bad, key=lambda x: (h[x[2]], x))
        c, step, levels = elim_step(w.chart, t, dict(w.levels))
        trace.steps.append(step)
        cand = LabeledChart(c, levels)
        if not verify_llee_witness(cand).ok:
            recomputed += 1
            cand, _ = lee_check(c)
            if cand is None:
                raise AssertionError("LEE lost by a 1-transition elimination")
        w = cand
    if induced_chart(w.chart) != before:
        raise AssertionError("induced chart changed during elimination")
    return w, trace, recomputed


# -- the (ptt) transformation -------------------------------------------------

def _innermost_scc_loops(w: LabeledChart) -> list:
    """Entry identifiers whose loop subchart is one strongly connected
    component and contains no other loop vertex."""
    ids = w.entry_ids()
    roots = {v for (v, _) in ids}
    out = []
    for (v, n) in ids:
        sub = loop_subchart_of_witness(w, v, n)
        if (sub.vertices - {v}) & roots:
            continue
        if _strongly_connected(sub):
            out.append((v, n))
    return out


def _strongly_connected(c: Chart) -> bool:
    from .chart import reachable
    if reachable(c, [c.start]) != set(c.vertices):
        return False
    rev = make_chart(c.start, [(d, l, s) for (s, l, d) in c.transitions],
                     alphabet=c.alphabet, vertices=c.vertices, collect=False)
    return reachable(rev, [c.start]) == set(c.vertices)


def ptt_violations(w: LabeledChart) -> list:
    c = w.chart
    bad = []
    for (v, n) in _innermost_scc_loops(w):
        sub = loop_subchart_of_witness(w, v, n)
        if any(not is_proper_target(c, u) for u in sub.vertices):
            bad.append((v, n))
    return bad


def enforce_ptt(w: LabeledChart) -> LabeledChart:
    """Move the root of every innermost single-component loop that is not a
    proper-transition target onto a vertex whose only transition is a
    1-back-link to it, then delete the old root."""
    if not (verify_llee_witness(w).ok and is_one_transition_limited(w)):
        raise ElimError("enforce_ptt needs a 1-transition limited witness")
    while True:
        todo = ptt_violations(w)
        if not todo:
            break
        v, n = todo[0]
        before = induced_chart(w.chart)
        w, u = _move_root(w, v, n)
        rep = verify_llee_witness(w)
        if not rep.ok or not is_one_transition_limited(w):
            raise AssertionError("ptt step broke the witness: "
                                 + "; ".join(rep.violations))
        # the old root and its transfer vertex induce the same steps, so the
        # induced chart only loses the old root
        if induced_chart(w.chart) != _merge(before, v, u):
            raise AssertionError("ptt step changed the induced chart")
    return w


def _merge(c: Chart, v, u) -> Chart:
    def ren(x):
        return u if x == v else x
    return make_chart(ren(c.start), {(ren(s), a, ren(d))
                                     for (s, a, d) in c.transitions},
                      {ren(x) for x in c.terminating}, alphabet=c.alphabet)


def _move_root(w: LabeledChart, v, n) -> LabeledChart:
    c = w.chart
    if is_proper_target(c, v):
        raise ElimError(f"root {v!r} is already a proper-transition target")
    sub = loop_subchart_of_witness(w, v, n)
    cands = sorted(u for u in sub.vertices - {v}
                   if [t for t in c.out(u)] == [(u, ONE_LABEL, v)])
    if not cands:
        raise ElimError(f"no transfer vertex for loop ({v!r}, {n})")
    u = cands[0]

    def ren(x):
        return u if x == v else x

    trans = set()
    levels = {}
    for t in c.transitions:
        if t == (u, ONE_LABEL, v):
            continue
        nt = (ren(t[0]), t[1], ren(t[2]))
        if nt[0] == nt[2] and nt[1] == ONE_LABEL:
            continue
        trans.add(nt)
        if w.level(t):
            levels[nt] = w.level(t)
    term = {ren(x) for x in c.terminating}
    start = ren(c.start)
    new = make_chart(start, trans, term, alphabet=c.alphabet,
                     exprs={ren(k): e for k, e in c.exprs.items()
                            if k != v})
    return LabeledChart(new, {t: lv for t, lv in levels.items()
                              if t in new.transitions}), u
