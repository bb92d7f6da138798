"""Seeded random expressions and charts, and the cross-module property suite.

Each property is a function from an expression to a list of violation
messages.  The first failing expression of a run is shrunk by replacing
subexpressions with children, ``0``, ``1`` or an action.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .bisim import collapse
from .chart import (ONE_LABEL, Chart, induced_chart, is_weakly_guarded,
                    make_chart)
from .elim import elim_step, normalize, one_heights
from .expr import (ONE, ZERO, Act, Expr, One, Prod, Star, Sum, expr_size,
                   is_understar_1free, terminates)
from .interp import (_chart_steps, _one_induced, _one_steps, chart_interp,
                     labeled_interp, one_chart_interp)
from .lee import lee_check, verify_llee_witness

ALPHABET = ("a", "b")


# -- generators --------------------------------------------------------------

def random_expr(rng: random.Random, size: int, alphabet=ALPHABET) -> Expr:
    """Random expression with exactly ``size`` nodes."""
    if size <= 1:
        k = rng.randrange(len(alphabet) + 2)
        return ZERO if k == 0 else ONE if k == 1 else Act(alphabet[k - 2])
    if size == 2:
        return Star(random_expr(rng, 1, alphabet))
    op = rng.choice("+.*")
    if op == "*":
        return Star(random_expr(rng, size - 1, alphabet))
    left = rng.randint(1, size - 2)
    l = random_expr(rng, left, alphabet)
    r = random_expr(rng, size - 1 - left, alphabet)
    return Sum(l, r) if op == "+" else Prod(l, r)


def random_1free(rng: random.Random, size: int, alphabet=ALPHABET) -> Expr:
    """Random 1-free expression: built from 0, actions, sums, products and
    iterations ``f* . g``."""
    if size <= 2:
        return ZERO if rng.random() < 0.15 else Act(rng.choice(alphabet))
    op = rng.choice("+.*")
    if op == "*" and size >= 4:
        left = rng.randint(1, size - 3)
        return Prod(Star(random_1free(rng, left, alphabet)),
                    random_1free(rng, size - 2 - left, alphabet))
    left = rng.randint(1, size - 2)
    l = random_1free(rng, left, alphabet)
    r = random_1free(rng, size - 1 - left, alphabet)
    return Sum(l, r) if op == "+" else Prod(l, r)


def random_understar_1free(rng: random.Random, size: int,
                           alphabet=ALPHABET) -> Expr:
    """Random expression in which every star body is 1-free."""
    if size <= 1:
        k = rng.randrange(len(alphabet) + 2)
        return ZERO if k == 0 else ONE if k == 1 else Act(alphabet[k - 2])
    op = rng.choice("+.*")
    if op == "*":
        return Star(random_1free(rng, size - 1, alphabet))
    if size == 2:
        return Star(Act(rng.choice(alphabet)))
    left = rng.randint(1, size - 2)
    l = random_understar_1free(rng, left, alphabet)
    r = random_understar_1free(rng, size - 1 - left, alphabet)
    return Sum(l, r) if op == "+" else Prod(l, r)


def random_chart(rng: random.Random, n: int, alphabet=ALPHABET,
                 density: float = 0.35, p_term: float = 0.3) -> Chart:
    """Random 1-free chart on vertices ``s0 .. s{n-1}`` with start ``s0``,
    garbage collected."""
    verts = [f"s{i}" for i in range(n)]
    trans = [(u, a, v) for u in verts for a in alphabet for v in verts
             if rng.random() < density]
    term = [u for u in verts if rng.random() < p_term]
    return make_chart(verts[0], trans, term, alphabet=frozenset(alphabet))


# -- properties --------------------------------------------------------------

def _one_terminates(f: Expr) -> bool:
    seen = {f}
    todo = [f]
    while todo:
        g = todo.pop()
        if isinstance(g, One):
            return True
        for (lab, h) in _one_steps(g):
            if lab == ONE_LABEL and h not in seen:
                seen.add(h)
                todo.append(h)
    return False


def prop_step_correspondence(e: Expr) -> list:
    """Termination and steps agree between the chart semantics and the
    induced steps of the 1-chart semantics, on every derivative."""
    out = []
    for f in chart_interp(e).exprs.values():
        if terminates(f) != _one_terminates(f):
            out.append(f"termination differs at {f}")
        if set(_chart_steps(f, False)) != set(_one_induced(f)):
            out.append(f"steps differ at {f}")
    return out


def prop_induced_equals_chart(e: Expr) -> list:
    if induced_chart(one_chart_interp(e)) != chart_interp(e):
        return ["induced chart of the 1-chart differs from the chart"]
    return []


def prop_normalize(e: Expr) -> list:
    n, _ = normalize(one_chart_interp(e))
    return [] if n == chart_interp(e) else ["normal form differs from chart"]


def prop_one_chart_shape(e: Expr) -> list:
    c = one_chart_interp(e)
    out = []
    if not is_weakly_guarded(c):
        out.append("1-chart not weakly guarded")
    for (s, lab, d) in c.one_transitions:
        if expr_size(c.exprs[d]) >= expr_size(c.exprs[s]):
            out.append(f"1-step does not shrink: {s} -> {d}")
    return out


def prop_witness(e: Expr) -> list:
    rep = verify_llee_witness(labeled_interp(e))
    return [] if rep.ok else list(rep.violations)


def prop_elim_steps(e: Expr, seed: int = 0) -> list:
    """Vertex bounds and induced invariance per step, and equal normal forms
    for bottom-up and random elimination orders."""
    c = one_chart_interp(e)
    target = induced_chart(c)
    out = []
    rng = random.Random(seed)
    cur = c
    while cur.one_transitions:
        t = rng.choice(cur.one_transitions)
        nxt, _ = elim_step(cur, t)
        if not len(cur.vertices) - 1 <= len(nxt.vertices) <= len(cur.vertices):
            out.append(f"vertex bound violated eliminating {t}")
        if induced_chart(nxt) != target:
            out.append(f"induced chart changed eliminating {t}")
            break
        cur = nxt
    if cur != normalize(c)[0]:
        out.append("random and bottom-up orders reach different normal forms")
    return out


PROPERTIES = {
    "step-correspondence": prop_step_correspondence,
    "induced-equals-chart": prop_induced_equals_chart,
    "normalize-equals-chart": prop_normalize,
    "one-chart-shape": prop_one_chart_shape,
    "labeled-witness": prop_witness,
    "elimination-steps": prop_elim_steps,
}


def extraction_roundtrip(f: Expr) -> list:
    """Collapse the chart of ``f``, find a witness, extract and verify."""
    from .extract import verify_extraction
    from .expr import is_understar_1free as usf

    c, _ = collapse(chart_interp(f))
    w, _ = lee_check(c)
    if w is None:
        return ["collapsed chart has no witness"]
    rep = verify_extraction(c, w)
    out = list(rep.problems)
    if not usf(rep.expr):
        out.append("extracted expression is not under-star-1-free")
    if not rep.isomorphism:
        out.append("no isomorphism to the collapsed chart")
    return out


# -- shrinking ---------------------------------------------------------------

def _candidates(e: Expr, alphabet):
    """Smaller expressions obtained by one local replacement."""
    atoms = [ZERO, ONE] + [Act(a) for a in alphabet]
    for x in atoms:
        if expr_size(x) < expr_size(e) or (x != e and expr_size(e) == 1
                                           and str(x) < str(e)):
            yield x
    if isinstance(e, (Sum, Prod)):
        yield e.left
        yield e.right
        for l in _candidates(e.left, alphabet):
            yield type(e)(l, e.right)
        for r in _candidates(e.right, alphabet):
            yield type(e)(e.left, r)
    elif isinstance(e, Star):
        yield e.body
        for b in _candidates(e.body, alphabet):
            yield Star(b)


def shrink(e: Expr, fails, alphabet=ALPHABET, max_rounds: int = 200) -> Expr:
    """Greedy shrinking of ``e`` while ``fails`` stays true."""
    for _ in range(max_rounds):
        for cand in _candidates(e, alphabet):
            try:
                bad = fails(cand)
            except Exception:
                bad = True
            if bad:
                e = cand
                break
        else:
            return e
    return e


# -- the suite ---------------------------------------------------------------

@dataclass
class Violation:
    prop: str
    expr: str
    shrunk: str
    messages: list


@dataclass
class FuzzReport:
    seed: int
    count: int
    max_size: int
    checked: int = 0
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_json_obj(self) -> dict:
        return {"seed": self.seed, "count": self.count,
                "max_size": self.max_size, "checked": self.checked,
                "violations": [v.__dict__ for v in self.violations]}


def generate(seed: int, count: int, max_size: int, kind: str = "any") -> list:
    rng = random.Random(seed)
    gen = {"any": random_expr, "usf": random_understar_1free,
           "1free": random_1free}[kind]
    return [gen(rng, rng.randint(1, max_size)) for _ in range(count)]


def _run_props(e: Expr, props) -> dict:
    bad = {}
    for name in props:
        try:
            msgs = PROPERTIES[name](e)
        except Exception as exc:  # a crash is a violation too
            msgs = [f"{type(exc).__name__}: {exc}"]
        if msgs:
            bad[name] = msgs
    return bad


def fuzz(seed: int = 42, count: int = 200, max_size: int = 12,
         props=None, shrink_first: bool = True) -> FuzzReport:
    if count <= 0 or max_size <= 0:
        raise ValueError("count and max_size must be positive")
    props = list(props or PROPERTIES)
    report = FuzzReport(seed, count, max_size)
    shrunk_one = False
    for e in generate(seed, count, max_size):
        report.checked += 1
        for name, msgs in _run_props(e, props).items():
            small = str(e)
            if shrink_first and not shrunk_one:
                small = str(shrink(e, lambda x, n=name: bool(_run_props(x, [n]))))
                shrunk_one = True
            report.violations.append(Violation(name, str(e), small, msgs))
    return report
