"""Charts and 1-charts.

A chart is a finite rooted transition graph whose vertices may permit
immediate termination.  A 1-chart additionally has empty steps; they are
represented as transitions carrying the reserved label :data:`ONE_LABEL`.
Every chart built through :func:`make_chart` is garbage collected, so all its
vertices are reachable from the start vertex.

Transitions are plain ``(source, label, target)`` triples.  Marking levels,
when present, live in a separate mapping on :class:`LabeledChart`.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Mapping, NamedTuple, Optional

from .expr import ONE_LABEL, valid_action

Transition = tuple  # (source, label, target)


class ChartError(ValueError):
    pass


@dataclass(frozen=True)
class Chart:
    """Immutable (1-)chart.

    ``exprs`` optionally maps vertex ids to the star expressions they stand
    for; it is ignored by equality.
    """

    start: str
    vertices: frozenset
    transitions: frozenset
    terminating: frozenset
    alphabet: frozenset
    exprs: Mapping = field(default_factory=dict, compare=False, hash=False,
                           repr=False)

    def __post_init__(self):
        if self.start not in self.vertices:
            raise ChartError(f"start vertex {self.start!r} is not a vertex")
        for (src, label, dst) in self.transitions:
            if src not in self.vertices or dst not in self.vertices:
                raise ChartError(f"dangling transition {(src, label, dst)!r}")
            if label != ONE_LABEL and label not in self.alphabet:
                raise ChartError(f"label {label!r} not in alphabet")
        if not self.terminating <= self.vertices:
            raise ChartError("terminating vertices must be vertices")
        if ONE_LABEL in self.alphabet:
            raise ChartError("the empty-step label cannot be an action")
        for a in self.alphabet:
            if not valid_action(a):
                raise ChartError(f"invalid action symbol {a!r}")

    # -- views --------------------------------------------------------------

    def out(self, v) -> list:
        """Outgoing transitions of ``v``, sorted."""
        return self._succ().get(v, [])

    def _succ(self) -> dict:
        cached = self.__dict__.get("_succ_cache")
        if cached is None:
            cached = {}
            for t in sorted(self.transitions):
                cached.setdefault(t[0], []).append(t)
            object.__setattr__(self, "_succ_cache", cached)
        return cached

    @property
    def one_transitions(self) -> list:
        return sorted(t for t in self.transitions if t[1] == ONE_LABEL)

    @property
    def proper_transitions(self) -> list:
        return sorted(t for t in self.transitions if t[1] != ONE_LABEL)

    def is_one_free(self) -> bool:
        return all(t[1] != ONE_LABEL for t in self.transitions)

    def sorted_vertices(self) -> list:
        """Vertices in breadth-first discovery order from the start."""
        order = [self.start]
        seen = {self.start}
        i = 0
        while i < len(order):
            for (_, _, w) in self.out(order[i]):
                if w not in seen:
                    seen.add(w)
                    order.append(w)
            i += 1
        order.extend(sorted(self.vertices - seen))
        return order

    def replace(self, **changes) -> "Chart":
        fields = dict(start=self.start, vertices=self.vertices,
                      transitions=self.transitions,
                      terminating=self.terminating, alphabet=self.alphabet,
                      exprs=self.exprs)
        fields.update(changes)
        return make_chart(**fields)

    def __len__(self):
        return len(self.vertices)


def make_chart(start, transitions: Iterable, terminating: Iterable = (),
               alphabet: Optional[Iterable] = None,
               vertices: Optional[Iterable] = None,
               exprs: Optional[Mapping] = None, collect: bool = True) -> Chart:
    """Build a chart; unreachable vertices are dropped unless ``collect`` is
    false."""
    transitions = frozenset(tuple(t) for t in transitions)
    if alphabet is None:
        alphabet = {t[1] for t in transitions if t[1] != ONE_LABEL}
    verts = {start}
    for (src, _, dst) in transitions:
        verts.add(src)
        verts.add(dst)
    if vertices is not None:
        verts.update(vertices)
    verts.update(terminating)
    c = Chart(start, frozenset(verts), transitions, frozenset(terminating),
              frozenset(alphabet), dict(exprs or {}))
    return garbage_collect(c) if collect else c


def reachable(c: Chart, sources: Iterable, labels=None) -> set:
    """Vertices reachable from ``sources``, optionally only via ``labels``."""
    seen = set(sources)
    todo = deque(seen)
    while todo:
        v = todo.popleft()
        for (_, lab, w) in c.out(v):
            if labels is not None and lab not in labels:
                continue
            if w not in seen:
                seen.add(w)
                todo.append(w)
    return seen


def garbage_collect(c: Chart) -> Chart:
    keep = reachable(c, [c.start])
    if keep == set(c.vertices):
        return c
    keep = frozenset(keep)
    trans = frozenset(t for t in c.transitions if t[0] in keep)
    exprs = {v: e for v, e in c.exprs.items() if v in keep}
    return Chart(c.start, keep, trans, c.terminating & keep, c.alphabet, exprs)


def has_cycle(vertices: Iterable, edges: Iterable) -> bool:
    """Cycle detection in a finite directed graph given as (src, dst) pairs."""
    succ: dict = {}
    indeg = {v: 0 for v in vertices}
    for (s, d) in edges:
        succ.setdefault(s, []).append(d)
        indeg.setdefault(s, 0)
        indeg[d] = indeg.get(d, 0) + 1
    todo = [v for v, k in indeg.items() if k == 0]
    removed = 0
    while todo:
        v = todo.pop()
        removed += 1
        for w in succ.get(v, ()):
            indeg[w] -= 1
            if indeg[w] == 0:
                todo.append(w)
    return removed != len(indeg)


def is_weakly_guarded(c: Chart) -> bool:
    """No infinite path of 1-transitions, i.e. no 1-cycle."""
    return not has_cycle(c.vertices,
                         [(s, d) for (s, lab, d) in c.one_transitions])


def one_closure(c: Chart, v) -> set:
    """Vertices reachable from ``v`` by 1-transitions, including ``v``."""
    return reachable(c, [v], labels={ONE_LABEL})


def induced_steps(c: Chart) -> tuple:
    """Induced transitions and induced termination over all vertices.

    Returns ``(transitions, terminating)`` where transitions are the triples
    ``v -(a)-> w`` obtained from 1-steps followed by one proper step.
    """
    trans = set()
    term = set()
    for v in c.vertices:
        for u in one_closure(c, v):
            if u in c.terminating:
                term.add(v)
            for (_, lab, w) in c.out(u):
                if lab != ONE_LABEL:
                    trans.add((v, lab, w))
    return trans, term


def induced_chart(c: Chart) -> Chart:
    """The 1-free chart of induced transitions, keeping vertex ids."""
    if c.is_one_free():
        return c
    trans, term = induced_steps(c)
    return make_chart(c.start, trans, term, alphabet=c.alphabet,
                      exprs=c.exprs)


def embed(c: Chart) -> Chart:
    """View a chart as a 1-chart; with this representation the identity."""
    return c


def is_proper_target(c: Chart, v) -> bool:
    if v not in c.vertices:
        raise ChartError(f"unknown vertex {v!r}")
    return any(t[2] == v and t[1] != ONE_LABEL for t in c.transitions)


class Signature(NamedTuple):
    vertex: str
    actions: frozenset
    terminating: bool


def signatures(c: Chart) -> dict:
    """Per-vertex actions of induced transitions and induced termination."""
    trans, term = induced_steps(c)
    acts: dict = {v: set() for v in c.vertices}
    for (v, a, _) in trans:
        acts[v].add(a)
    return {v: Signature(v, frozenset(acts[v]), v in term) for v in c.vertices}


# -- marking labels ---------------------------------------------------------

@dataclass(frozen=True)
class LabeledChart:
    """A 1-chart whose transitions carry marking levels.

    Level 0 marks body transitions, a positive level marks loop-entry
    transitions.  Transitions absent from ``levels`` are body transitions.
    """

    chart: Chart
    levels: Mapping = field(default_factory=dict, compare=False, hash=False)

    def level(self, t) -> int:
        return self.levels.get(tuple(t), 0)

    def entries(self) -> list:
        return sorted(t for t in self.chart.transitions if self.level(t) > 0)

    def body(self) -> list:
        return sorted(t for t in self.chart.transitions if self.level(t) == 0)

    def entry_ids(self) -> list:
        """Sorted (vertex, level) pairs of entry transition identifiers."""
        return sorted({(t[0], self.level(t)) for t in self.entries()})

    def key(self) -> tuple:
        return (self.chart, frozenset(
            (t, lv) for t, lv in self.levels.items()
            if lv > 0 and t in self.chart.transitions))

    def __eq__(self, other):
        return isinstance(other, LabeledChart) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())


def strip_levels(w: LabeledChart) -> Chart:
    return w.chart


# -- serialization ----------------------------------------------------------

def to_json_obj(c: Chart, levels: Optional[Mapping] = None) -> dict:
    verts = []
    for v in sorted(c.vertices):
        item = {"id": v, "terminating": v in c.terminating}
        if v in c.exprs:
            item["expr"] = str(c.exprs[v])
        verts.append(item)
    trans = []
    for (s, lab, d) in sorted(c.transitions):
        item = {"from": s, "to": d}
        if lab == ONE_LABEL:
            item["kind"] = "one"
        else:
            item["kind"] = "act"
            item["act"] = lab
        if levels is not None:
            item["level"] = int(levels.get((s, lab, d), 0))
        trans.append(item)
    return {"alphabet": sorted(c.alphabet), "start": c.start,
            "vertices": verts, "transitions": trans}


def dumps(c, levels: Optional[Mapping] = None) -> str:
    """Canonical JSON text of a chart or labelled chart."""
    if isinstance(c, LabeledChart):
        c, levels = c.chart, c.levels
    return json.dumps(to_json_obj(c, levels), sort_keys=True,
                      ensure_ascii=False, indent=1) + "\n"


def from_json_obj(obj: Mapping):
    """Inverse of :func:`to_json_obj`.

    Returns a :class:`LabeledChart` when any transition carries a level,
    otherwise a :class:`Chart`.
    """
    from .expr import parse_expr

    try:
        start = obj["start"]
        verts = obj["vertices"]
        term = [v["id"] for v in verts if v.get("terminating")]
        exprs = {v["id"]: parse_expr(v["expr"]) for v in verts if "expr" in v}
        trans = []
        levels = {}
        has_levels = False
        for t in obj["transitions"]:
            if t["kind"] == "one":
                lab = ONE_LABEL
            elif t["kind"] == "act":
                lab = t["act"]
            else:
                raise ChartError(f"unknown transition kind {t['kind']!r}")
            tr = (t["from"], lab, t["to"])
            trans.append(tr)
            if "level" in t:
                has_levels = True
                lv = int(t["level"])
                if lv < 0:
                    raise ChartError("levels must be nonnegative")
                if lv:
                    levels[tr] = lv
        c = make_chart(start, trans, term, alphabet=obj.get("alphabet"),
                       vertices=[v["id"] for v in verts], exprs=exprs)
    except (KeyError, TypeError) as exc:
        raise ChartError(f"malformed chart JSON: {exc}") from exc
    if has_levels:
        return LabeledChart(c, levels)
    return c


def loads(text: str):
    return from_json_obj(json.loads(text))


def _dot_quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def to_dot(c, levels: Optional[Mapping] = None, name: str = "chart"):
    """Yield the lines of a Graphviz rendering."""
    if isinstance(c, LabeledChart):
        c, levels = c.chart, c.levels
    levels = levels or {}
    yield f"digraph {name} {{"
    yield "  __start [shape=point, style=invis];"
    for v in c.sorted_vertices():
        shape = "doublecircle" if v in c.terminating else "circle"
        yield f"  {_dot_quote(v)} [shape={shape}];"
    yield f"  __start -> {_dot_quote(c.start)};"
    for (s, lab, d) in sorted(c.transitions):
        lv = levels.get((s, lab, d), 0)
        shown = "1" if lab == ONE_LABEL else lab
        attrs = []
        if lv > 0:
            attrs += [f"label={_dot_quote(f'{shown} [{lv}]')}", "style=bold"]
        else:
            attrs.append(f"label={_dot_quote(shown)}")
            if lab == ONE_LABEL:
                attrs.append("style=dashed")
        yield f"  {_dot_quote(s)} -> {_dot_quote(d)} [{', '.join(attrs)}];"
    yield "}"


def dot_text(c, levels: Optional[Mapping] = None) -> str:
    return "\n".join(to_dot(c, levels)) + "\n"
