"""Loop subcharts, the loop elimination procedure and layered witnesses.

A *loop subchart* at a vertex ``v`` is generated by a nonempty set of entry
transitions from ``v``: follow every path that starts with an entry and stop
whenever ``v`` is reached again.  It is a loop if

* (L1) it contains an infinite path,
* (L2) every infinite path returns to ``v`` (removing ``v`` leaves it acyclic),
* (L3) no vertex other than ``v`` permits immediate termination.

A chart satisfies LEE when repeatedly removing the entry transitions of some
loop and garbage collecting leads to a chart without infinite paths.  Such a
run is recorded as a *witness*: a marking of transitions where entries
removed in stage ``i`` get level ``i`` and all other transitions are body
transitions (level 0).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, NamedTuple, Optional

from .chart import Chart, LabeledChart, has_cycle, make_chart


class LoopCheck(NamedTuple):
    ok: bool
    violated: Optional[str]   # "L1", "L2" or "L3"


class WitnessReport(NamedTuple):
    ok: bool
    violations: list          # human-readable strings

    def __bool__(self):
        return self.ok


@dataclass
class ElimRun:
    """Stages of a loop elimination run; each stage is a list of
    ``(root, entries)`` pairs removed together."""

    stages: list = field(default_factory=list)
    residual: Optional[Chart] = None

    def __len__(self):
        return len(self.stages)


# -- subcharts ---------------------------------------------------------------

def _generate(succ, root, entries, follow=None):
    """Vertices and transitions on paths starting with ``entries`` that halt
    at ``root``.  ``follow`` filters the transitions used after the entry."""
    verts = {root}
    trans = set(entries)
    todo = [t[2] for t in entries if t[2] != root]
    seen = set(todo)
    while todo:
        u = todo.pop()
        verts.add(u)
        for t in succ.get(u, ()):
            if follow is not None and not follow(t):
                continue
            trans.add(t)
            w = t[2]
            if w != root and w not in seen:
                seen.add(w)
                todo.append(w)
    return verts, trans


def _succ_map(transitions) -> dict:
    succ: dict = {}
    for t in sorted(transitions):
        succ.setdefault(t[0], []).append(t)
    return succ


def generated_subchart(c: Chart, root, entries: Iterable) -> Chart:
    """Sub-1-chart generated from ``root`` by the given entry transitions."""
    entries = {tuple(t) for t in entries}
    if not entries:
        raise ValueError("entry set must be nonempty")
    for t in entries:
        if t not in c.transitions or t[0] != root:
            raise ValueError(f"{t!r} is not a transition from {root!r}")
    verts, trans = _generate(_succ_map(c.transitions), root, entries)
    return make_chart(root, trans, c.terminating & verts, alphabet=c.alphabet,
                      vertices=verts, collect=False)


def is_loop_chart(sub: Chart) -> LoopCheck:
    root = sub.start
    body = [(s, d) for (s, _, d) in sub.transitions if s != root and d != root]
    if has_cycle(sub.vertices - {root}, body):
        return LoopCheck(False, "L2")
    if not any(d == root for (_, _, d) in sub.transitions):
        return LoopCheck(False, "L1")
    if sub.terminating - {root}:
        return LoopCheck(False, "L3")
    return LoopCheck(True, None)


def loop_subchart_of_witness(w: LabeledChart, vertex, level: int) -> Chart:
    """Loop subchart generated by the level-``level`` entries from ``vertex``,
    continuing along body transitions only."""
    c = w.chart
    entries = {t for t in c.out(vertex) if w.level(t) == level}
    if level <= 0 or not entries:
        raise KeyError(f"no entry identifier ({vertex!r}, {level})")
    verts, trans = _generate(c._succ(), vertex, entries,
                             follow=lambda t: w.level(t) == 0)
    return make_chart(vertex, trans, c.terminating & verts,
                      alphabet=c.alphabet, vertices=verts, collect=False)


def verify_llee_witness(w: LabeledChart) -> WitnessReport:
    c = w.chart
    problems = []
    for t, lv in w.levels.items():
        if lv < 0:
            problems.append(f"negative level on {t!r}")
    body = [(s, d) for (s, l, d) in c.transitions if w.level((s, l, d)) == 0]
    if has_cycle(c.vertices, body):
        problems.append("W1: body transitions contain a cycle")
    for (v, n) in w.entry_ids():
        sub = loop_subchart_of_witness(w, v, n)
        chk = is_loop_chart(sub)
        if not chk.ok:
            problems.append(f"W2: ({v!r}, {n}) violates {chk.violated}")
        for u in sub.vertices - {v}:
            for t in c.out(u):
                m = w.level(t)
                if m > 0 and m >= n:
                    problems.append(
                        f"W3: entry {t!r} of level {m} inside ({v!r}, {n})")
    return WitnessReport(not problems, problems)


def is_backlink(w: LabeledChart, t) -> bool:
    t = tuple(t)
    if t not in w.chart.transitions:
        raise KeyError(f"{t!r} is not a transition")
    for (v, n) in w.entry_ids():
        if v == t[2] and t[0] in loop_subchart_of_witness(w, v, n).vertices:
            return True
    return False


def is_one_transition_limited(w: LabeledChart) -> bool:
    return all(is_backlink(w, t) for t in w.chart.one_transitions)


def loop_subcharts(c: Chart, transitions=None) -> list:
    """All ``(root, entries)`` pairs generating loop subcharts of ``c``
    (restricted to the given transition set when passed)."""
    trans = c.transitions if transitions is None else transitions
    succ = _succ_map(trans)
    verts = {s for (s, _, _) in trans} | {d for (_, _, d) in trans}
    found = []
    for v in sorted(verts):
        good, returning = _good_entries(succ, v, c.terminating)
        for k in range(1, len(good) + 1):
            for subset in combinations(good, k):
                if any(t in returning for t in subset):
                    found.append((v, frozenset(subset)))
    return found


def loop_entry_transitions(c: Chart) -> set:
    """Transitions that belong to the entry set of some loop subchart."""
    return {t for (_, entries) in loop_subcharts(c) for t in entries}


def _good_entries(succ, v, terminating):
    """Transitions from ``v`` that individually generate an acyclic,
    non-terminating body; and those among them that return to ``v``."""
    good, returning = [], set()
    for t in succ.get(v, ()):
        if t[2] == v:
            good.append(t)
            returning.add(t)
            continue
        verts, trans = _generate(succ, v, {t})
        body = verts - {v}
        if body & terminating:
            continue
        if has_cycle(body, [(s, d) for (s, _, d) in trans
                            if s != v and d != v]):
            continue
        good.append(t)
        if any(d == v for (s, _, d) in trans if s != v):
            returning.add(t)
    return good, returning


def _reach(succ, start) -> set:
    seen = {start}
    todo = [start]
    while todo:
        u = todo.pop()
        for t in succ.get(u, ()):
            if t[2] not in seen:
                seen.add(t[2])
                todo.append(t[2])
    return seen


def _on_cycle(succ, verts) -> set:
    """Vertices lying on some cycle."""
    out = set()
    for v in verts:
        for t in succ.get(v, ()):
            if t[2] == v or v in _reach(succ, t[2]):
                out.add(v)
                break
    return out


# -- the LEE decision --------------------------------------------------------

def lee_check(c: Chart, node_cap: int = 2_000_000):
    """Search for a layered loop elimination run.

    Returns ``(witness, run)`` on success and ``(None, None)`` when no run
    exists.  The search backtracks over every root on a cycle and every
    admissible nonempty entry subset, never removing entries from vertices
    inside the body of an already removed loop, and memoizes failed residual
    states.
    """
    failed: set = set()
    nodes = [0]

    def gc(trans):
        succ = _succ_map(trans)
        keep = _reach(succ, c.start)
        return frozenset(t for t in trans if t[0] in keep), keep

    def search(trans, forbidden, path):
        nodes[0] += 1
        if nodes[0] > node_cap:
            from .bisim import SearchCapError
            raise SearchCapError(f"LEE search exceeded {node_cap} nodes")
        succ = _succ_map(trans)
        verts = _reach(succ, c.start)
        if not has_cycle(verts, [(s, d) for (s, _, d) in trans]):
            return list(path)
        key = (trans, forbidden & frozenset(verts))
        if key in failed:
            return None
        for v in sorted(_on_cycle(succ, verts) - forbidden):
            good, returning = _good_entries(succ, v, c.terminating)
            # larger entry sets first: whole loops before their parts
            for k in range(len(good), 0, -1):
                for subset in combinations(good, k):
                    if not any(t in returning for t in subset):
                        continue
                    body, _ = _generate(succ, v, set(subset))
                    rest, _ = gc(trans - set(subset))
                    path.append((v, frozenset(subset)))
                    res = search(rest, forbidden | (body - {v}), path)
                    if res is not None:
                        wit = _witness_from(c, res)
                        if verify_llee_witness(wit).ok:
                            return res
                    path.pop()
        failed.add(key)
        return None

    start_trans, _ = gc(c.transitions)
    stages = search(start_trans, frozenset(), [])
    if stages is None:
        return None, None
    wit = _witness_from(c, stages)
    return wit, _replay(c, [[s] for s in stages])


def _witness_from(c: Chart, stages) -> LabeledChart:
    levels = {}
    for i, (_, entries) in enumerate(stages, start=1):
        for t in entries:
            levels[t] = i
    return LabeledChart(c, levels)


def _replay(c: Chart, stages) -> ElimRun:
    trans = set(c.transitions)
    for stage in stages:
        for (_, entries) in stage:
            trans -= set(entries)
    residual = make_chart(c.start, trans, c.terminating, alphabet=c.alphabet)
    return ElimRun([list(s) for s in stages], residual)


def satisfies_lee(c: Chart) -> bool:
    return lee_check(c)[0] is not None


def derive_elim_run(w: LabeledChart) -> ElimRun:
    """Elimination run read off a verified witness, removing a loop of
    minimal level at each stage."""
    rep = verify_llee_witness(w)
    if not rep.ok:
        raise ValueError("not an LLEE witness: " + "; ".join(rep.violations))
    c = w.chart
    trans = set(c.transitions)
    stages = []
    while True:
        succ = _succ_map(trans)
        keep = _reach(succ, c.start)
        trans = {t for t in trans if t[0] in keep}
        ids = sorted({(t[0], w.level(t)) for t in trans if w.level(t) > 0},
                     key=lambda p: (p[1], p[0]))
        if not ids:
            break
        v, n = ids[0]
        entries = frozenset(t for t in trans if t[0] == v and w.level(t) == n)
        trans -= entries
        stages.append([(v, entries)])
    residual = make_chart(c.start, trans, c.terminating, alphabet=c.alphabet)
    if has_cycle(residual.vertices,
                 [(s, d) for (s, _, d) in residual.transitions]):
        raise AssertionError("elimination run left an infinite path")
    return ElimRun(stages, residual)


def compact_levels(w: LabeledChart) -> LabeledChart:
    """Relabel entries with the least levels compatible with layeredness:
    a loop gets one more than the highest entry level inside its body.
    Loops sharing a level can be eliminated in one stage."""
    c = w.chart
    ids = w.entry_ids()
    new: dict = {}

    def level_of(v, n):
        if (v, n) not in new:
            sub = loop_subchart_of_witness(w, v, n)
            inner = [(t[0], w.level(t)) for u in sub.vertices - {v}
                     for t in c.out(u) if w.level(t) > 0]
            new[(v, n)] = 1 + max((level_of(*i) for i in inner), default=0)
        return new[(v, n)]

    for i in ids:
        level_of(*i)
    levels = {t: new[(t[0], w.level(t))] for t in w.entries()}
    return LabeledChart(c, levels)


def stage_count(w: LabeledChart) -> int:
    return len({lv for lv in w.levels.values() if lv > 0})


def loop_members(w: LabeledChart) -> dict:
    """``u -> {v, ...}``: the roots ``v`` of witness loops whose body
    contains ``u`` as a non-root vertex."""
    out: dict = {}
    for (v, n) in w.entry_ids():
        for u in loop_subchart_of_witness(w, v, n).vertices - {v}:
            out.setdefault(u, set()).add(v)
    return out


def _body_reach(w: LabeledChart, u) -> set:
    c = w.chart
    seen = {u}
    todo = [u]
    while todo:
        x = todo.pop()
        for t in c.out(x):
            if w.level(t) == 0 and t[2] not in seen:
                seen.add(t[2])
                todo.append(t[2])
    return seen


def loops_back(w: LabeledChart) -> dict:
    """``u -> {v, ...}``: ``u`` lies in a loop at ``v`` and can return to
    ``v`` along body transitions."""
    out = {}
    for u, roots in loop_members(w).items():
        back = roots & _body_reach(w, u)
        if back:
            out[u] = back
    return out


def directly_loops_back(w: LabeledChart) -> dict:
    """``u -> v`` where ``v`` is the innermost root ``u`` loops back to: the
    one that itself loops back to every other such root."""
    lb = loops_back(w)
    out = {}
    for u, roots in lb.items():
        inner = [v for v in roots
                 if all(x == v or x in lb.get(v, ()) for x in roots)]
        if len(inner) != 1:
            raise AssertionError(f"loop-back roots of {u!r} are not nested")
        out[u] = inner[0]
    return out
