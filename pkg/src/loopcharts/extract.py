"""Extraction of star expressions from layered loop witnesses of 1-free charts.

For a witness ``w`` of a chart, ``extract(w)`` builds an expression whose
process chart is the image of the input under a functional bisimulation; the
map sends each vertex ``u`` to ``S(1, u)``.

Both extraction functions take an *initializer* expression that is placed to
the left of the leftmost product:

* ``T(e, u, v)`` for ``u`` looping back to ``v`` describes the behaviour from
  ``u`` up to the first return to ``v``;
* ``S(e, u)`` describes the behaviour from ``u`` up to termination.
"""

from __future__ import annotations

import sys
from contextlib import contextmanager
from dataclasses import dataclass, field

from .bisim import is_bisimulation, is_collapsed, iso
from .chart import Chart, LabeledChart
from .expr import ONE, ZERO, Act, Expr, Prod, Star, Sum, sum_of
from .interp import chart_interp
from .lee import (directly_loops_back, loop_members, loops_back,
                  verify_llee_witness)


class ExtractionError(RuntimeError):
    pass


@dataclass(frozen=True)
class LoopsBackRelation:
    members: frozenset        # (u, v): u lies in a loop nested in one at v
    loops_back: frozenset     # (u, v): v is on u's chain of direct returns
    direct: dict              # u -> innermost root u returns to

    def chain(self, u) -> list:
        """Vertices reached from ``u`` by repeatedly looping back directly."""
        out = []
        while u in self.direct:
            u = self.direct[u]
            out.append(u)
        return out


def loops_back_to(w: LabeledChart) -> LoopsBackRelation:
    rep = verify_llee_witness(w)
    if not rep.ok:
        raise ExtractionError("not an LLEE witness: " + "; ".join(rep.violations))
    raw = {(u, v) for u, vs in loops_back(w).items() for v in vs}
    try:
        direct = directly_loops_back(w)
    except AssertionError as exc:
        raise ExtractionError(str(exc)) from None
    chains = LoopsBackRelation(frozenset(), frozenset(), direct)
    pairs = frozenset((u, v) for u in direct for v in chains.chain(u))
    # direct loop-backs must account for every returning loop membership
    if not raw <= pairs:
        raise ExtractionError("loops-back relation is not generated by its "
                              "direct part")
    members = set()
    for u, vs in loop_members(w).items():
        for v in vs:
            members.add((u, v))
            members |= {(u, x) for x in chains.chain(v)}
    rel = LoopsBackRelation(frozenset(members), pairs, direct)
    return rel


@dataclass
class ExtractionEnv:
    witness: LabeledChart
    rel: LoopsBackRelation
    memo_t: dict = field(default_factory=dict)
    memo_s: dict = field(default_factory=dict)
    depth: int = 0
    # (kind, arguments, case) for every computed value; used by the checks
    log: list = field(default_factory=list)

    @classmethod
    def of(cls, w: LabeledChart) -> "ExtractionEnv":
        if not w.chart.is_one_free():
            raise ExtractionError("extraction expects a 1-free chart")
        return cls(w, loops_back_to(w))

    @property
    def limit(self) -> int:
        n = len(self.witness.chart.vertices)
        return n * n + 8


@contextmanager
def _deep_stack(frames: int):
    old = sys.getrecursionlimit()
    sys.setrecursionlimit(max(old, 12 * frames + 1000))
    try:
        yield
    finally:
        sys.setrecursionlimit(old)


def _split(env: ExtractionEnv, u, v=None):
    """Transitions from ``u`` as the index sets of the two representations:
    entry self-loops, other entries, body steps to ``v``, other body steps.
    Each list is sorted by label, then target."""
    w = env.witness
    loops, entries, exits, body = [], [], [], []
    for t in sorted(w.chart.out(u), key=lambda t: (t[1], t[2])):
        _, a, x = t
        if w.level(t) > 0:
            (loops if x == u else entries).append((a, x))
        elif x == u:
            raise ExtractionError(f"body self-loop at {u!r}")
        elif v is not None and x == v:
            exits.append((a, x))
        else:
            body.append((a, x))
    return loops, entries, exits, body


def _iteration(env, e, u, loops, entries) -> Expr:
    parts = [Act(a) for (a, _) in loops]
    parts += [extract_T(env, Act(a), x, u) for (a, x) in entries]
    return Prod(e, Star(sum_of(parts)))


def _enter(env):
    env.depth += 1
    if env.depth > env.limit:
        raise ExtractionError("recursion depth guard exceeded; the witness "
                              "is corrupt")


def extract_T(env: ExtractionEnv, e: Expr, u, v) -> Expr:
    if (u, v) not in env.rel.members:
        raise ExtractionError(f"{u!r} is not inside a loop at {v!r}")
    key = (e, u, v)
    if key in env.memo_t:
        return env.memo_t[key]
    _enter(env)
    try:
        d = env.rel.direct.get(u)
        if d is None:
            # u cannot return to v: the value is not normed and must agree
            # with S(e, u), hence the termination constant in the exit
            loops, entries, _, body = _split(env, u)
            tail = sum_of([extract_T(env, Act(a), x, v) for (a, x) in body])
            res = Prod(_iteration(env, e, u, loops, entries),
                       Sum(tau(env.witness.chart, u), tail))
            case = "free"
        elif d == v:
            loops, entries, exits, body = _split(env, u, v)
            tail = [Act(a) for (a, _) in exits]
            tail += [extract_T(env, Act(a), x, v) for (a, x) in body]
            res = Prod(_iteration(env, e, u, loops, entries), sum_of(tail))
            case = "direct"
        else:
            res = extract_T(env, extract_T(env, e, u, d), d, v)
            case = "compose"
    finally:
        env.depth -= 1
    env.memo_t[key] = res
    env.log.append(("T", key, case, res))
    return res


def tau(c: Chart, u) -> Expr:
    return ONE if u in c.terminating else ZERO


def extract_S(env: ExtractionEnv, e: Expr, u) -> Expr:
    key = (e, u)
    if key in env.memo_s:
        return env.memo_s[key]
    _enter(env)
    try:
        d = env.rel.direct.get(u)
        if d is None:
            loops, entries, _, body = _split(env, u)
            tail = sum_of([extract_S(env, Act(a), x) for (a, x) in body])
            res = Prod(_iteration(env, e, u, loops, entries),
                       Sum(tau(env.witness.chart, u), tail))
            case = "free"
        else:
            res = extract_S(env, extract_T(env, e, u, d), d)
            case = "compose"
    finally:
        env.depth -= 1
    env.memo_s[key] = res
    env.log.append(("S", key, case, res))
    return res


def extraction_map(w: LabeledChart, env: ExtractionEnv = None) -> dict:
    """``u -> S(1, u)`` for every vertex."""
    env = env or ExtractionEnv.of(w)
    with _deep_stack(env.limit):
        return {u: extract_S(env, ONE, u) for u in w.chart.sorted_vertices()}


def extract(w: LabeledChart) -> Expr:
    env = ExtractionEnv.of(w)
    with _deep_stack(env.limit):
        return extract_S(env, ONE, w.chart.start)


@dataclass
class ExtractionReport:
    expr: Expr
    image: Chart
    mapping: dict             # vertex -> vertex id in the image chart
    functional_bisim: bool
    collapsed: bool
    isomorphism: bool         # only meaningful when ``collapsed``
    problems: list

    @property
    def ok(self) -> bool:
        return not self.problems


def verify_extraction(c: Chart, w: LabeledChart, e: Expr = None
                      ) -> ExtractionReport:
    """Check that ``u -> S(1, u)`` is a functional bisimulation from ``c`` to
    the chart of the extracted expression, and an isomorphism when ``c`` is
    collapsed."""
    if w.chart != c:
        raise ExtractionError("witness does not mark the given chart")
    env = ExtractionEnv.of(w)
    smap = extraction_map(w, env)
    if e is None:
        e = smap[c.start]
    problems = []
    if smap[c.start] != e:
        problems.append("expression is not the value at the start vertex")
    image = chart_interp(e)
    # actions of the chart that label no transition do not occur in e
    image = image.replace(alphabet=image.alphabet | c.alphabet)
    mapping = {u: str(x) for u, x in smap.items()}
    missing = sorted(u for u, x in mapping.items() if x not in image.vertices)
    if missing:
        problems.append(f"values outside the image chart at {missing}")
        fb = False
    else:
        fb = is_bisimulation(c, image, set(mapping.items()))
        if not fb:
            problems.append("vertex map is not a bisimulation")
    collapsed = is_collapsed(c)
    isom = False
    if collapsed and fb:
        bij = (len(set(mapping.values())) == len(mapping)
               and set(mapping.values()) == set(image.vertices))
        isom = bij and iso(c, image) is not None
        if not isom:
            problems.append("collapsed input but no isomorphism")
    return ExtractionReport(e, image, mapping, fb, collapsed, isom, problems)
