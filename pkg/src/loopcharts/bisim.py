"""Bisimulation: checking, largest bisimilarity, collapse, isomorphism and the
substate relation.

For 1-charts all notions are taken with respect to induced transitions and
induced termination, i.e. 1-bisimilarity.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

from .chart import Chart, induced_steps, make_chart


class SearchCapError(RuntimeError):
    """Backtracking search exceeded its node budget (inconclusive)."""


@dataclass(frozen=True)
class BisimPartition:
    blocks: tuple          # tuple of frozensets, deterministic order
    class_of: dict

    def relation(self) -> set:
        return {(u, v) for b in self.blocks for u in b for v in b}

    def same(self, u, v) -> bool:
        return self.class_of[u] == self.class_of[v]

    def nontrivial(self) -> list:
        return [b for b in self.blocks if len(b) > 1]


def _steps_of(c: Chart) -> tuple:
    """Successor map ``v -> set of (label, w)`` and termination set, induced
    for 1-charts."""
    if c.is_one_free():
        trans, term = c.transitions, c.terminating
    else:
        trans, term = induced_steps(c)
    succ = {v: set() for v in c.vertices}
    for (v, a, w) in trans:
        succ[v].add((a, w))
    return succ, set(term)


def refine_partition(vertices: Iterable, succ: dict, term: set) -> dict:
    """Coarsest stable partition; returns ``vertex -> block number``."""
    vertices = sorted(vertices)
    cls = {v: int(v in term) for v in vertices}
    while True:
        sigs = {}
        new = {}
        for v in vertices:
            sig = (cls[v], frozenset((a, cls[w]) for (a, w) in succ[v]))
            new[v] = sigs.setdefault(sig, len(sigs))
        if len(sigs) == len(set(cls.values())):
            return new
        cls = new


def _partition_from(cls: dict, start) -> BisimPartition:
    groups: dict = {}
    for v, k in cls.items():
        groups.setdefault(k, set()).add(v)
    # start's block first, then by least member
    blocks = sorted((frozenset(g) for g in groups.values()),
                    key=lambda b: (start not in b, min(b)))
    class_of = {v: i for i, b in enumerate(blocks) for v in b}
    return BisimPartition(tuple(blocks), class_of)


def bisimilarity(c: Chart) -> BisimPartition:
    succ, term = _steps_of(c)
    return _partition_from(refine_partition(c.vertices, succ, term), c.start)


def is_bisimulation(c1: Chart, c2: Chart, rel: Iterable) -> bool:
    rel = set(rel)
    if (c1.start, c2.start) not in rel:
        return False
    s1, t1 = _steps_of(c1)
    s2, t2 = _steps_of(c2)
    for (v1, v2) in rel:
        if v1 not in c1.vertices or v2 not in c2.vertices:
            return False
        if (v1 in t1) != (v2 in t2):
            return False
        for (a, w1) in s1[v1]:
            if not any(b == a and (w1, w2) in rel for (b, w2) in s2[v2]):
                return False
        for (a, w2) in s2[v2]:
            if not any(b == a and (w1, w2) in rel for (b, w1) in s1[v1]):
                return False
    return True


def brute_force_bisimilarity(c: Chart) -> set:
    """Greatest bisimulation on ``c`` by pruning the full relation until
    stable.  Quadratic memory; meant as an oracle for small charts."""
    succ, term = _steps_of(c)
    rel = {(u, v) for u in c.vertices for v in c.vertices
           if (u in term) == (v in term)}
    changed = True
    while changed:
        changed = False
        for (u, v) in sorted(rel):
            ok = all(any(b == a and (x, y) in rel for (b, y) in succ[v])
                     for (a, x) in succ[u])
            ok = ok and all(any(b == a and (x, y) in rel for (b, x) in succ[u])
                            for (a, y) in succ[v])
            if not ok:
                rel.discard((u, v))
                changed = True
    return rel


def _disjoint_union(c1: Chart, c2: Chart):
    s1, t1 = _steps_of(c1)
    s2, t2 = _steps_of(c2)
    succ = {}
    for tag, s in ((1, s1), (2, s2)):
        for v, out in s.items():
            succ[(tag, v)] = {(a, (tag, w)) for (a, w) in out}
    term = {(1, v) for v in t1} | {(2, v) for v in t2}
    return succ, term


def are_bisimilar(c1: Chart, c2: Chart) -> bool:
    succ, term = _disjoint_union(c1, c2)
    cls = refine_partition(succ.keys(), succ, term)
    return cls[(1, c1.start)] == cls[(2, c2.start)]


def collapse(c: Chart) -> tuple:
    """Quotient of a 1-free chart by bisimilarity.

    Returns ``(quotient, qmap)``; each block is named by its least vertex id
    (the start's block by the start id).
    """
    if not c.is_one_free():
        raise ValueError("collapse expects a 1-free chart; take the induced "
                         "chart first")
    part = bisimilarity(c)
    rep = {}
    for b in part.blocks:
        name = c.start if c.start in b else min(b)
        for v in b:
            rep[v] = name
    trans = set()
    per_block: dict = {}
    for v in c.vertices:
        out = frozenset((a, rep[w]) for (_, a, w) in c.out(v))
        per_block.setdefault(rep[v], set()).add(out)
        trans |= {(rep[v], a, w) for (a, w) in out}
    for name, outs in per_block.items():
        if len(outs) != 1:
            raise AssertionError(f"quotient not well defined at {name!r}")
    term = {rep[v] for v in c.terminating}
    exprs = {rep[v]: c.exprs[rep[v]] for v in c.vertices
             if rep[v] in c.exprs}
    q = make_chart(rep[c.start], trans, term, alphabet=c.alphabet,
                   vertices=set(rep.values()), exprs=exprs)
    return q, rep


def is_collapsed(c: Chart) -> bool:
    return all(len(b) == 1 for b in bisimilarity(c).blocks)


def substate(c: Chart, w1, w2) -> bool:
    """Whether ``w1`` is a substate of ``w2``: every induced step of ``w1``
    is matched by an induced step of ``w2`` into a 1-bisimilar target, and
    induced termination of ``w1`` carries over to ``w2``."""
    for w in (w1, w2):
        if w not in c.vertices:
            raise KeyError(f"unknown vertex {w!r}")
    succ, term = _steps_of(c)
    cls = refine_partition(c.vertices, succ, term)
    if w1 in term and w2 not in term:
        return False
    have = {(a, cls[x]) for (a, x) in succ[w2]}
    return all((a, cls[x]) in have for (a, x) in succ[w1])


# -- isomorphism ------------------------------------------------------------

def _colour(vertices, transitions, starts, terminating) -> dict:
    """Isomorphism-invariant vertex colours by iterated refinement over raw
    (not induced) transitions, kinds included."""
    succ = {v: [] for v in vertices}
    pred = {v: [] for v in vertices}
    for (s, lab, d) in transitions:
        succ[s].append((lab, d))
        pred[d].append((lab, s))
    col = {v: (v in starts, v in terminating) for v in vertices}
    ncol = len(set(col.values()))
    while True:
        sig = {v: (col[v], tuple(sorted((lab, col[w]) for lab, w in succ[v])),
                   tuple(sorted((lab, col[w]) for lab, w in pred[v])))
               for v in vertices}
        canon = {k: i for i, k in enumerate(sorted(set(sig.values())))}
        col = {v: canon[sig[v]] for v in vertices}
        if len(canon) == ncol:
            return col
        ncol = len(canon)


def iso(c1: Chart, c2: Chart, cap: int = 10 ** 7) -> Optional[dict]:
    """A bijection ``V1 -> V2`` preserving start, termination and labelled
    transitions (empty steps included), or ``None``.

    Raises :class:`SearchCapError` if more than ``cap`` search nodes are
    visited.
    """
    if (len(c1.vertices) != len(c2.vertices)
            or len(c1.transitions) != len(c2.transitions)
            or len(c1.terminating) != len(c2.terminating)
            or c1.alphabet != c2.alphabet):
        return None
    # colours are computed jointly so that they are comparable
    verts = [(1, v) for v in c1.vertices] + [(2, v) for v in c2.vertices]
    trans = ([((1, s), l, (1, d)) for (s, l, d) in c1.transitions]
             + [((2, s), l, (2, d)) for (s, l, d) in c2.transitions])
    term = ({(1, v) for v in c1.terminating}
            | {(2, v) for v in c2.terminating})
    col = _colour(verts, trans, {(1, c1.start), (2, c2.start)}, term)
    col1 = {v: col[(1, v)] for v in c1.vertices}
    col2 = {v: col[(2, v)] for v in c2.vertices}
    if sorted(col1.values()) != sorted(col2.values()):
        return None
    out1 = {v: set() for v in c1.vertices}
    out2 = {v: set() for v in c2.vertices}
    for (s, l, d) in c1.transitions:
        out1[s].add((l, d))
    for (s, l, d) in c2.transitions:
        out2[s].add((l, d))
    in1 = {v: set() for v in c1.vertices}
    for (s, l, d) in c1.transitions:
        in1[d].add((l, s))
    order = c1.sorted_vertices()
    mapping: dict = {}
    used: set = set()
    nodes = [0]

    def consistent(v, w) -> bool:
        for (l, d) in out1[v]:
            if d in mapping and (l, mapping[d]) not in out2[w]:
                return False
            if d == v and (l, w) not in out2[w]:
                return False
        for (l, s) in in1[v]:
            if s in mapping and (l, w) not in out2[mapping[s]]:
                return False
        return True

    def extend(i) -> bool:
        nodes[0] += 1
        if nodes[0] > cap:
            raise SearchCapError(f"isomorphism search exceeded {cap} nodes")
        if i == len(order):
            return True
        v = order[i]
        cands = [c2.start] if v == c1.start else sorted(
            w for w in c2.vertices if col2[w] == col1[v] and w not in used)
        for w in cands:
            if w in used or col2[w] != col1[v] or not consistent(v, w):
                continue
            mapping[v] = w
            used.add(w)
            if extend(i + 1):
                return True
            del mapping[v]
            used.discard(w)
        return False

    if not extend(0):
        return None
    # final full check
    image = {(mapping[s], l, mapping[d]) for (s, l, d) in c1.transitions}
    if image != set(c2.transitions):
        return None
    if {mapping[v] for v in c1.terminating} != set(c2.terminating):
        return None
    return dict(mapping)
