"""A collapsed chart that cannot be refined into a weakly guarded LLEE 1-chart.

The 1-chart ``C`` below has a layered loop witness (loops at ``v`` and at
``w1bar``) and two 1-transitions that are back-links.  Its induced chart ``K``
is bisimilar to the chart of the expression ``g_v``, and ``w1``/``w2`` are its
only bisimilar pair.  Merging them gives the 9-vertex collapse ``C10``, which
has no loop at all.  The refinements ``C1``/``C2`` re-introduce one of the two
possible 1-transition back-links each and still fail LEE.

Non-refinability is checked by bounded search only; every report states the
budget it was obtained under.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from itertools import combinations, product
from typing import Optional

from .bisim import (are_bisimilar, bisimilarity, collapse, is_collapsed, iso,
                    substate)
from .chart import (ONE_LABEL, Chart, LabeledChart, induced_chart,
                    induced_steps, is_proper_target, is_weakly_guarded,
                    dumps, make_chart)
from .elim import refines
from .expr import Expr, parse_expr, star_height
from .interp import chart_interp, labeled_interp, one_chart_interp
from .lee import (lee_check, loop_entry_transitions, verify_llee_witness,
                  is_one_transition_limited)

ACTIONS = frozenset("a a1 a2 b c c1 c2 d e f".split())
ROLES = ("v", "w1bar", "w1", "w2", "ta1", "ta2", "tc1", "tc2", "te", "tf")

_A = "(a . (a1 + a1 . (1 + d . e)) + a . (a2 + a2 . (1 + d . e)))"
_C = "(c . (c1 + c1 . (1 + b . f)) + c . (c2 + c2 . (1 + b . f)))"
_GW1BAR = f"((1 . {_C}*) . ({_A} + d . e))"
GV_TEXT = f"(1 . (({_C} + b . f) . {_GW1BAR} + {_A})*) . 0"


def build_gv() -> Expr:
    return parse_expr(GV_TEXT)


# transitions shared by K and its collapse; w1/w2 differ only in their name
_PAIRS = {"a": ("ta1", "ta2"), "c": ("tc1", "tc2")}


def _fan(src, labels) -> list:
    out = []
    for l in labels:
        if l in _PAIRS:
            out += [(src, l, t) for t in _PAIRS[l]]
        else:
            out.append((src, l, {"b": "tf", "d": "te"}[l]))
    return out


def _tail_transitions(w1: str, w2: str) -> list:
    return [("tc1", "c1", "w1bar"), ("tc1", "c1", w1),
            ("tc2", "c2", "w1bar"), ("tc2", "c2", w1),
            ("tf", "f", "w1bar"),
            ("ta1", "a1", "v"), ("ta1", "a1", w2),
            ("ta2", "a2", "v"), ("ta2", "a2", w2),
            ("te", "e", "v")]


def build_C() -> LabeledChart:
    """The 1-chart with its witness: entries at ``v`` (level 2) and the
    c-entries at ``w1bar`` (level 1); ``w1 -1-> w1bar`` and ``w2 -1-> v``
    are back-links."""
    trans = (_fan("v", "abc") + _fan("w1bar", "acd")
             + [("w1", "b", "tf"), ("w1", ONE_LABEL, "w1bar"),
                ("w2", "d", "te"), ("w2", ONE_LABEL, "v")]
             + _tail_transitions("w1", "w2"))
    c = make_chart("v", trans, (), alphabet=ACTIONS)
    levels = {t: 2 for t in c.out("v")}
    levels.update({t: 1 for t in c.out("w1bar") if t[1] == "c"})
    return LabeledChart(c, levels)


def build_K() -> Chart:
    return induced_chart(build_C().chart)


def name_vertices(c: Chart) -> dict:
    """Assign role names by the actions of induced transitions.

    ``v`` is the start; single-action vertices are ``t<x>`` for their action;
    ``w1bar`` is the ``{a,c,d}`` vertex; of the ``{a,b,c,d}`` vertices ``w1``
    is the c1/c2 target and ``w2`` the a1/a2 target.  Any ambiguity raises.
    """
    trans, _ = induced_steps(c) if not c.is_one_free() else (c.transitions,
                                                             None)
    acts = {u: frozenset() for u in c.vertices}
    for (s, a, _) in trans:
        acts[s] = acts[s] | {a}
    names: dict = {}

    def put(role, u):
        if role in names:
            raise AssertionError(f"role {role} is ambiguous")
        names[role] = u

    put("v", c.start)
    for u in sorted(c.vertices - {c.start}):
        s = acts[u]
        if len(s) == 1:
            (x,) = s
            put("t" + x, u)
        elif s == frozenset("acd"):
            put("w1bar", u)
        elif s == frozenset("abcd"):
            into = {a for (_, a, t) in trans if t == u}
            if into >= {"c1", "c2"} and not into & {"a1", "a2"}:
                put("w1", u)
            elif into >= {"a1", "a2"} and not into & {"c1", "c2"}:
                put("w2", u)
            else:
                raise AssertionError(f"cannot tell w1 from w2 at {u!r}")
        else:
            raise AssertionError(f"unexpected action set {sorted(s)} at {u!r}")
    if set(names) != set(ROLES):
        raise AssertionError(f"roles not all assigned: {sorted(names)}")
    return names


def build_C10() -> Chart:
    """Bisimulation collapse of ``K``; the merged pair keeps the name
    ``w2``."""
    q, rep = collapse(build_K())
    merged = rep["w1"]
    ren = {u: ("w2" if u == merged else u) for u in q.vertices}
    return make_chart(ren[q.start],
                      [(ren[s], a, ren[d]) for (s, a, d) in q.transitions],
                      {ren[u] for u in q.terminating}, alphabet=q.alphabet)


def _modify(c: Chart, drop_labels: str, ones) -> Chart:
    trans = {t for t in c.transitions
             if not (t[0] == "w2" and t[1] in drop_labels)}
    trans |= {("w2", ONE_LABEL, x) for x in ones}
    return make_chart(c.start, trans, c.terminating, alphabet=c.alphabet)


def build_C1() -> Chart:
    return _modify(build_C10(), "abc", ["v"])


def build_C2() -> Chart:
    return _modify(build_C10(), "acd", ["w1bar"])


def build_C12() -> Chart:
    return _modify(build_C10(), "abcd", ["v", "w1bar"])


def build_C2_shared() -> Chart:
    """``C2`` with all a- and c-transitions of ``v`` and ``w1bar`` routed
    through a fresh vertex ``u``."""
    c2 = build_C2()
    shared = {(a, t) for (s, a, t) in c2.transitions
              if s == "v" and a in "ac"}
    trans = {t for t in c2.transitions
             if not (t[0] in ("v", "w1bar") and t[1] in ("a", "c"))}
    trans |= {("u", a, t) for (a, t) in shared}
    trans |= {("v", ONE_LABEL, "u"), ("w1bar", ONE_LABEL, "u")}
    return make_chart(c2.start, trans, c2.terminating, alphabet=c2.alphabet)


# -- bounded refinement search ----------------------------------------------

@dataclass
class RefinementCertificate:
    chart: Chart
    witness: LabeledChart
    base: Chart
    moves: list               # description of the modifications

    def verify(self) -> bool:
        return (refines(self.chart, self.base)
                and verify_llee_witness(self.witness).ok
                and self.witness.chart == self.chart)


@dataclass
class SearchResult:
    certificate: Optional[RefinementCertificate]
    budget: tuple             # (fresh vertices, added 1-transitions)
    explored: int
    inconclusive: bool = False

    @property
    def found(self) -> bool:
        return self.certificate is not None


class BudgetExceeded(RuntimeError):
    """The candidate cap was hit before the space was exhausted."""


def _key(c: Chart):
    return (c.start, frozenset(c.transitions), frozenset(c.terminating))


def _fresh_name(c: Chart, i: int) -> str:
    name = f"x{i}"
    while name in c.vertices:
        name = "_" + name
    return name


def _moves(c: Chart, fresh_left: int, ones_left: int):
    """One structured refinement step: (description, chart, fresh used,
    1-transitions used)."""
    ind, iterm = induced_steps(c)
    by = {u: set() for u in c.vertices}
    for (s, a, d) in ind:
        by[s].add((a, d))
    proper = {u: sorted(t for t in c.out(u) if t[1] != ONE_LABEL)
              for u in c.vertices}
    # (G1) 1-transition to a substate, dropping reproduced transitions
    if ones_left >= 1:
        for u in sorted(c.vertices):
            for u2 in sorted(c.vertices - {u}):
                if (u, ONE_LABEL, u2) in c.transitions:
                    continue
                if not substate(c, u2, u):
                    continue
                repro = [t for t in proper[u] if (t[1], t[2]) in by[u2]]
                drop_term = [False, True] if (u in c.terminating
                                              and u2 in iterm) else [False]
                for k in range(len(repro) + 1):
                    for drop in combinations(repro, k):
                        for dt in drop_term:
                            trans = (set(c.transitions) - set(drop)) | {
                                (u, ONE_LABEL, u2)}
                            term = set(c.terminating) - ({u} if dt else set())
                            d = make_chart(c.start, trans, term,
                                           alphabet=c.alphabet,
                                           vertices=c.vertices)
                            what = f"{len(drop)} transitions"
                            if dt:
                                what += " and termination"
                            yield (f"1-transition {u} -> {u2}, dropping "
                                   f"{what} at {u}", d, 0, 1)
    # (G2) fresh vertex taking over transitions shared by its sources
    if fresh_left >= 1 and ones_left >= 1:
        x = _fresh_name(c, len(c.vertices))
        verts = sorted(c.vertices)
        for r in range(1, min(ones_left, len(verts)) + 1):
            for srcs in combinations(verts, r):
                common = set.intersection(
                    *[{(a, d) for (_, a, d) in proper[s]} for s in srcs])
                common = sorted(common)
                all_term = all(s in c.terminating for s in srcs)
                for k in range(1, len(common) + 1):
                    for moved in combinations(common, k):
                        for xt in ([False, True] if all_term else [False]):
                            for keep_term in ([True, False] if xt else [True]):
                                trans = {t for t in c.transitions
                                         if not (t[0] in srcs
                                                 and (t[1], t[2]) in moved)}
                                trans |= {(x, a, d) for (a, d) in moved}
                                trans |= {(s, ONE_LABEL, x) for s in srcs}
                                term = set(c.terminating)
                                if xt:
                                    term.add(x)
                                    if not keep_term:
                                        term -= set(srcs)
                                d = make_chart(c.start, trans, term,
                                               alphabet=c.alphabet)
                                yield (f"fresh {x} from {list(srcs)} taking "
                                       f"{len(moved)}", d, 1, r)


def search_wg_llee_refinement(base: Chart, fresh: int = 1, ones: int = 2,
                              cap: int = 200_000,
                              start: Optional[Chart] = None) -> SearchResult:
    """Bounded search for a weakly guarded LLEE 1-chart refining ``base``.

    Candidates are built by composing structured steps: adding a 1-transition
    to a substate (and dropping transitions it reproduces) or adding a fresh
    vertex that takes over transitions shared by the vertices pointing to it
    with 1-transitions.  At most ``fresh`` new vertices and ``ones`` new
    1-transitions are used.  With ``start`` (a refinement of ``base``) the
    steps are applied on top of it instead of ``base``.
    """
    if not base.is_one_free():
        raise ValueError("base must be 1-free")
    budget = (fresh, ones)
    start = base if start is None else start
    if not refines(start, base):
        raise ValueError("start does not refine base")
    w, _ = lee_check(start)
    if w is not None and is_weakly_guarded(start):
        return SearchResult(RefinementCertificate(start, w, base, []),
                            budget, 1)
    seen = {_key(start)}
    explored = 0
    stack = [(start, fresh, ones, [])]
    while stack:
        c, f_left, o_left, hist = stack.pop()
        for desc, cand, df, do in _moves(c, f_left, o_left):
            k = _key(cand)
            if k in seen:
                continue
            seen.add(k)
            explored += 1
            if explored > cap:
                return SearchResult(None, budget, explored, inconclusive=True)
            if not is_weakly_guarded(cand) or not refines(cand, base):
                continue
            moves = hist + [desc]
            w, _ = lee_check(cand)
            if w is not None:
                return SearchResult(
                    RefinementCertificate(cand, w, base, moves), budget,
                    explored)
            stack.append((cand, f_left - df, o_left - do, moves))
    return SearchResult(None, budget, explored)


def enumerate_refinements(base: Chart, fresh: int, ones: int):
    """Every 1-chart (up to garbage) with at most ``fresh`` extra vertices
    and ``ones`` 1-transitions whose induced chart is ``base``.

    The enumeration fixes the 1-transitions first and then chooses, vertex by
    vertex, proper transitions and termination among those the induced chart
    allows, keeping only complete covers.
    """
    if not base.is_one_free():
        raise ValueError("base must be 1-free")
    V = sorted(base.vertices)
    out_b = {u: {(a, d) for (_, a, d) in base.out(u)} for u in V}
    seen = set()
    for k in range(fresh + 1):
        X = [f"_n{i}" for i in range(k)]
        allv = V + X
        pairs = [(p, q) for p in allv for q in allv if p != q]
        for r in range(ones + 1):
            for one in combinations(pairs, r):
                succ = {z: [q for (p, q) in one if p == z] for z in allv}
                closure = {}
                cyclic = False
                for z in allv:
                    seen_z, todo = {z}, [z]
                    while todo:
                        y = todo.pop()
                        for q in succ[y]:
                            if q == z:
                                cyclic = True
                            if q not in seen_z:
                                seen_z.add(q)
                                todo.append(q)
                    closure[z] = seen_z
                if cyclic:
                    continue
                owners = {z: [u for u in V if z in closure[u]] for z in allv}
                if any(not owners[x] for x in X):
                    continue  # an unreachable fresh vertex adds nothing
                bound = {z: set.intersection(*[out_b[u] for u in owners[z]])
                         for z in allv}
                tbound = {z: all(u in base.terminating for u in owners[z])
                          for z in allv}
                yield from _choose(base, allv, one, closure, bound, tbound,
                                   out_b, seen)


def _choose(base, allv, one, closure, bound, tbound, out_b, seen):
    # successors along 1-transitions first, so that when a vertex of the base
    # is reached everything else in its 1-closure is already fixed
    order = sorted(allv, key=lambda z: (len(closure[z]), z))
    Vset = set(base.vertices)
    P: dict = {}
    T: set = set()

    def options(z):
        if z not in Vset:
            items = sorted(bound[z])
            return [frozenset(c) for n in range(len(items) + 1)
                    for c in combinations(items, n)]
        others = set().union(*[P[y] for y in closure[z] - {z}])
        need = out_b[z] - others
        if not need <= bound[z]:
            return []
        free = sorted((bound[z] & others) - need)
        return [frozenset(need | set(c)) for n in range(len(free) + 1)
                for c in combinations(free, n)]

    def t_options(z):
        if not tbound[z]:
            return [False]
        if z in Vset and not (closure[z] - {z}) & T:
            return [True]   # nothing else provides the termination
        return [False, True]

    def rec(i):
        if i == len(order):
            trans = {(z, a, d) for z in order for (a, d) in P[z]}
            trans |= {(p, ONE_LABEL, q) for (p, q) in one}
            d = make_chart(base.start, trans, set(T), alphabet=base.alphabet)
            k = _key(d)
            if k not in seen:
                seen.add(k)
                yield d
            return
        z = order[i]
        for opt in options(z):
            P[z] = opt
            for t in t_options(z):
                if z in Vset and not t and (z in base.terminating) != bool(
                        (closure[z] - {z}) & T):
                    continue
                if t:
                    T.add(z)
                yield from rec(i + 1)
                T.discard(z)
            del P[z]

    yield from rec(0)


def brute_force_refinement(base: Chart, fresh: int = 1, ones: int = 1):
    """First enumerated refinement within budget that satisfies LEE, or
    ``None``."""
    for d in enumerate_refinements(base, fresh, ones):
        if not (is_weakly_guarded(d) and refines(d, base)):
            raise AssertionError("enumerator produced a non-refinement")
        w, _ = lee_check(d)
        if w is not None:
            return d, w
    return None


# -- the suite --------------------------------------------------------------

@dataclass
class Check:
    name: str
    claim: str
    ok: bool
    detail: str = ""


@dataclass
class SuiteReport:
    budget: tuple
    checks: list = field(default_factory=list)
    seconds: float = 0.0

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)

    def to_json_obj(self) -> dict:
        return {
            "budget": {"fresh_vertices": self.budget[0],
                       "added_one_transitions": self.budget[1]},
            "caveat": ("non-refinability is certified only for refinements "
                       "within the stated budget"),
            "ok": self.ok,
            "seconds": round(self.seconds, 3),
            "checks": [c.__dict__ for c in self.checks],
        }

    def lines(self) -> list:
        out = [f"budget: {self.budget[0]} fresh vertices, "
               f"{self.budget[1]} added 1-transitions"]
        for c in self.checks:
            out.append(f"[{'ok' if c.ok else 'FAIL'}] {c.name}: {c.claim}"
                       + (f" ({c.detail})" if c.detail else ""))
        return out


def run_counterexample_suite(fresh: int = 1, ones: int = 2,
                             stop_on_failure: bool = False) -> SuiteReport:
    t0 = time.perf_counter()
    rep = SuiteReport((fresh, ones))

    def check(name, claim, fn):
        try:
            res = fn()
            ok, detail = res if isinstance(res, tuple) else (bool(res), "")
        except Exception as exc:  # recorded, not raised
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        rep.checks.append(Check(name, claim, ok, detail))
        if stop_on_failure and not ok:
            raise AssertionError(f"{name} failed: {detail}")

    gv = build_gv()
    check("gv-shape", "g_v has star height 2 and is not under-star-1-free",
          lambda: star_height(gv) == 2 and not _usf(gv))
    check("gv-witness", "the labeled 1-chart of g_v is an LLEE witness",
          lambda: verify_llee_witness(labeled_interp(gv)).ok)
    check("gv-refines", "the 1-chart of g_v refines the chart of g_v",
          lambda: refines(one_chart_interp(gv), chart_interp(gv)))
    C = build_C()
    check("C-witness", "C is weakly guarded with a 1-transition limited "
          "LLEE witness",
          lambda: is_weakly_guarded(C.chart)
          and verify_llee_witness(C).ok and is_one_transition_limited(C))
    K = build_K()
    check("K-size", "K has 10 vertices with exactly one bisimilar pair {w1, w2}",
          lambda: (len(K.vertices) == 10
                   and [sorted(b) for b in bisimilarity(K).nontrivial()]
                   == [["w1", "w2"]], f"{len(K.vertices)} vertices"))
    check("K-names", "role names are recovered from induced action sets",
          lambda: name_vertices(K) == {r: r for r in ROLES})
    check("K-vs-gv", "K is bisimilar to the chart of g_v and both collapse "
          "to isomorphic charts",
          lambda: are_bisimilar(K, chart_interp(gv))
          and iso(collapse(K)[0], collapse(chart_interp(gv))[0]) is not None)
    c10 = build_C10()
    check("C10", "the collapse C10 has 9 vertices and is collapsed",
          lambda: len(c10.vertices) == 9 and is_collapsed(c10)
          and are_bisimilar(c10, K))
    check("C10-no-loops", "no transition of C10 induces a loop subchart",
          lambda: not loop_entry_transitions(c10))
    for name, fn in (("C10", build_C10), ("C1", build_C1), ("C2", build_C2)):
        check(f"{name}-no-lee", f"{name} does not satisfy LEE",
              lambda fn=fn: lee_check(fn())[0] is None)
    for name, fn in (("C1", build_C1), ("C2", build_C2)):
        check(f"{name}-refines", f"{name} refines C10 and is collapsed",
              lambda fn=fn: refines(fn(), c10)
              and is_collapsed(induced_chart(fn())))
    c12 = build_C12()
    check("C12", "C12 refines C10, has no loop-entry transition and only "
          "proper-transition targets",
          lambda: refines(c12, c10) and not loop_entry_transitions(c12)
          and all(is_proper_target(c12, u) for u in c12.vertices))
    check("substates", "v and w1bar are substates of w2 in C10",
          lambda: substate(c10, "v", "w2") and substate(c10, "w1bar", "w2"))
    shared = build_C2_shared()
    check("shared-variant", "sharing a/c-transitions through a fresh u "
          "creates no loop entry at u",
          lambda: refines(shared, c10)
          and not [t for t in loop_entry_transitions(shared)
                   if t[0] == "u"])
    for name, fn in (("C10", build_C10), ("C1", build_C1), ("C2", build_C2)):
        def bounded(fn=fn):
            res = search_wg_llee_refinement(c10, fresh, ones, start=fn())
            if res.inconclusive:
                return False, f"inconclusive after {res.explored} candidates"
            return (not res.found,
                    f"{res.explored} candidates, budget {fresh}/{ones}")
        check(f"{name}-bounded", f"no weakly guarded LLEE refinement of "
              f"{name} within the budget", bounded)
    rep.seconds = time.perf_counter() - t0
    return rep


def _usf(e) -> bool:
    from .expr import is_understar_1free
    return is_understar_1free(e)


# -- oracle agreement ---------------------------------------------------------

@dataclass
class AgreementReport:
    seed: int
    charts: int = 0
    already_lee: int = 0
    found: int = 0
    none: int = 0
    disagreements: list = field(default_factory=list)
    partition_checks: int = 0
    partition_disagreements: list = field(default_factory=list)
    seconds: float = 0.0

    @property
    def ok(self) -> bool:
        return not (self.disagreements or self.partition_disagreements)


def oracle_agreement(seed: int = 2024, count: int = 50, max_vertices: int = 4,
                     partition_max: int = 6, fresh: int = 1,
                     ones: int = 1) -> AgreementReport:
    """Compare the structured refinement search with the brute-force
    enumerator, and the partition refinement with the pruning fixpoint, on
    seeded random 1-free charts over two actions."""
    import random

    from .bisim import brute_force_bisimilarity
    from .fuzz import random_chart

    rng = random.Random(seed)
    rep = AgreementReport(seed)
    t0 = time.perf_counter()
    for _ in range(count):
        n = rng.randint(1, max_vertices)
        c = random_chart(rng, n, density=rng.choice([0.2, 0.3, 0.45]))
        rep.charts += 1
        s = search_wg_llee_refinement(c, fresh, ones)
        b = brute_force_refinement(c, fresh, ones)
        if s.found and not s.certificate.moves:
            rep.already_lee += 1
        elif s.found:
            rep.found += 1
        else:
            rep.none += 1
        if s.found != (b is not None):
            rep.disagreements.append(dumps(c))
    for _ in range(count):
        c = random_chart(rng, rng.randint(1, partition_max),
                         density=rng.choice([0.15, 0.25, 0.4]))
        rep.partition_checks += 1
        if bisimilarity(c).relation() != brute_force_bisimilarity(c):
            rep.partition_disagreements.append(dumps(c))
    rep.seconds = time.perf_counter() - t0
    return rep
