"""Derivative engines turning star expressions into charts.

Four rule systems are provided (see :class:`TssKind`):

``CHART``
    Milner's process semantics.  Sums offer the steps of both summands,
    a product ``e1 . e2`` steps in ``e1`` and continues with ``e2`` unless the
    target of ``e1`` can no longer terminate, and may step in ``e2`` right away
    when ``e1`` terminates.  A star unrolls its body once.
``CHART_T0``
    The same without the normedness side conditions: products and stars
    always keep their continuation.
``ONE_CHART``
    The 1-chart semantics.  Choices in sums, leaving ``1 . e`` and leaving a
    star are empty steps, and only the expression ``1`` terminates.  A star
    unrolls along induced steps (empty steps followed by one proper step) of
    its body, so empty steps strictly decrease the expression size.
``LABELED``
    ``ONE_CHART`` with marking levels: a star unrolling into a normed
    derivative is a loop entry whose level is the star height of the star;
    every other rule yields body steps, except that product lifting keeps the
    level of its premise.
"""

from __future__ import annotations

import os
from collections import deque
from enum import Enum
from functools import lru_cache

from .chart import Chart, LabeledChart, make_chart
from .expr import (ONE, ONE_LABEL, Act, Expr, One, Prod, Star, Sum, actions,
                   is_normed, star_height, terminates)

DEFAULT_VERTEX_CAP = 100_000


class ResourceCapError(RuntimeError):
    """A state space grew beyond the configured vertex cap."""


class TssKind(Enum):
    CHART = "chart"
    CHART_T0 = "t0"
    ONE_CHART = "one"
    LABELED = "labeled"


def vertex_cap() -> int:
    raw = os.environ.get("LOOPCHARTS_VERTEX_CAP")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            pass
    return DEFAULT_VERTEX_CAP


@lru_cache(maxsize=200_000)
def _chart_steps(e: Expr, t0: bool) -> frozenset:
    if isinstance(e, Act):
        return frozenset([(e.name, ONE)])
    if isinstance(e, Sum):
        return _chart_steps(e.left, t0) | _chart_steps(e.right, t0)
    if isinstance(e, Prod):
        out = set()
        for (a, l1) in _chart_steps(e.left, t0):
            out.add((a, Prod(l1, e.right) if t0 or is_normed(l1) else l1))
        if terminates(e.left):
            out |= _chart_steps(e.right, t0)
        return frozenset(out)
    if isinstance(e, Star):
        out = set()
        for (a, b1) in _chart_steps(e.body, t0):
            out.add((a, Prod(b1, e) if t0 or is_normed(b1) else b1))
        return frozenset(out)
    return frozenset()


@lru_cache(maxsize=200_000)
def _one_steps(e: Expr) -> dict:
    """Map ``(label, target) -> level`` of 1-chart steps from ``e``."""
    out: dict = {}

    def add(lab, tgt, lv):
        key = (lab, tgt)
        out[key] = max(lv, out.get(key, 0))

    if isinstance(e, Act):
        add(e.name, ONE, 0)
    elif isinstance(e, Sum):
        add(ONE_LABEL, e.left, 0)
        add(ONE_LABEL, e.right, 0)
    elif isinstance(e, Prod):
        if isinstance(e.left, One):
            add(ONE_LABEL, e.right, 0)
        for (lab, l1), lv in _one_steps(e.left).items():
            if is_normed(l1):
                add(lab, Prod(l1, e.right), lv)
            else:
                add(lab, l1, 0)
    elif isinstance(e, Star):
        add(ONE_LABEL, ONE, 0)
        level = star_height(e)
        for (a, b1) in _one_induced(e.body):
            if is_normed(b1):
                add(a, Prod(b1, e), level)
            else:
                add(a, b1, 0)
    return out


@lru_cache(maxsize=200_000)
def _one_induced(e: Expr) -> frozenset:
    """Induced proper steps of ``e`` in the 1-chart semantics."""
    seen = {e}
    todo = [e]
    out = set()
    while todo:
        f = todo.pop()
        for (lab, g) in _one_steps(f):
            if lab == ONE_LABEL:
                if g not in seen:
                    seen.add(g)
                    todo.append(g)
            else:
                out.add((lab, g))
    return frozenset(out)


def _sort_steps(steps) -> list:
    return sorted(steps, key=lambda s: (s[0], str(s[1])))


def derivatives(e: Expr, kind: TssKind = TssKind.CHART) -> list:
    """One-step successors ``(label, expression)`` of ``e``.

    Empty steps carry the label :data:`ONE_LABEL`.
    """
    kind = TssKind(kind)
    if kind is TssKind.CHART:
        return _sort_steps(_chart_steps(e, False))
    if kind is TssKind.CHART_T0:
        return _sort_steps(_chart_steps(e, True))
    return _sort_steps(_one_steps(e).keys())


def labeled_derivatives(e: Expr) -> list:
    """Triples ``(label, expression, level)``; level 0 marks body steps."""
    steps = _one_steps(e)
    return [(lab, tgt, steps[(lab, tgt)])
            for (lab, tgt) in _sort_steps(steps.keys())]


def _closure(e: Expr, step_fn):
    """Breadth-first derivative closure; returns (order, transitions)."""
    cap = vertex_cap()
    order = [e]
    seen = {e}
    trans = []
    todo = deque([e])
    while todo:
        f = todo.popleft()
        for item in step_fn(f):
            g = item[1]
            trans.append((f,) + tuple(item))
            if g not in seen:
                if len(seen) >= cap:
                    raise ResourceCapError(
                        f"more than {cap} vertices while interpreting")
                seen.add(g)
                order.append(g)
                todo.append(g)
    return order, trans


def _build(e: Expr, step_fn, term_fn):
    order, trans = _closure(e, step_fn)
    exprs = {str(f): f for f in order}
    triples = [(str(f), lab, str(g)) for (f, lab, g, *_) in trans]
    term = [str(f) for f in order if term_fn(f)]
    chart = make_chart(str(e), triples, term, alphabet=actions(e),
                       vertices=exprs.keys(), exprs=exprs)
    return chart, trans


def chart_interp(e: Expr) -> Chart:
    """Chart of ``e`` under the process semantics; vertex ids are the
    canonical texts of the reachable expressions."""
    return _build(e, lambda f: derivatives(f, TssKind.CHART), terminates)[0]


def chart_interp_t0(e: Expr) -> Chart:
    return _build(e, lambda f: derivatives(f, TssKind.CHART_T0),
                  terminates)[0]


def one_chart_interp(e: Expr) -> Chart:
    return _build(e, lambda f: derivatives(f, TssKind.ONE_CHART),
                  lambda f: isinstance(f, One))[0]


def labeled_interp(e: Expr) -> LabeledChart:
    chart, trans = _build(e, labeled_derivatives, lambda f: isinstance(f, One))
    levels = {(str(f), lab, str(g)): lv
              for (f, lab, g, lv) in trans if lv > 0}
    return LabeledChart(chart, levels)


def interpret(e: Expr, kind: TssKind = TssKind.CHART):
    kind = TssKind(kind)
    return {TssKind.CHART: chart_interp, TssKind.CHART_T0: chart_interp_t0,
            TssKind.ONE_CHART: one_chart_interp,
            TssKind.LABELED: labeled_interp}[kind](e)
