"""Star expressions: syntax tree, parser, canonical printer and classifiers.

Grammar of the surface syntax, loosest binding first::

    sum   := prod ('+' prod)*
    prod  := post ('.' post)*
    post  := atom '*'*
    atom  := '0' | '1' | action | '(' sum ')'

Actions are words over ``[a-zA-Z0-9_]``; the words ``0`` and ``1`` are the
constants.  The canonical printer is fully parenthesised so that parsing its
output gives back the very same tree.
"""

from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass, field
from functools import lru_cache
from typing import NamedTuple, Union

#: Reserved label of empty steps in 1-charts; never a valid action.
ONE_LABEL = "__1__"

_ACTION_RE = re.compile(r"[A-Za-z0-9_]+")


class ParseError(ValueError):
    """Raised on malformed expression text; ``offset`` is the byte offset."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


class _Node:
    """Shared behaviour: cached hash and cached canonical text."""

    __slots__ = ()

    def _key(self):
        raise NotImplementedError

    def __hash__(self):
        h = self._hash
        if h is None:
            h = hash((type(self).__name__,) + self._key())
            object.__setattr__(self, "_hash", h)
        return h

    def __str__(self):
        s = self._text
        if s is None:
            s = self._render()
            object.__setattr__(self, "_text", s)
        return s


def _cache():
    return field(default=None, init=False, repr=False, compare=False)


@dataclass(frozen=True, eq=True)
class Zero(_Node):
    _hash: int = _cache()
    _text: str = _cache()

    def _key(self):
        return ()

    def _render(self):
        return "0"


@dataclass(frozen=True, eq=True)
class One(_Node):
    _hash: int = _cache()
    _text: str = _cache()

    def _key(self):
        return ()

    def _render(self):
        return "1"


@dataclass(frozen=True, eq=True)
class Act(_Node):
    name: str
    _hash: int = _cache()
    _text: str = _cache()

    def __post_init__(self):
        if not valid_action(self.name):
            raise ValueError(f"invalid action symbol {self.name!r}")

    def _key(self):
        return (self.name,)

    def _render(self):
        return self.name


@dataclass(frozen=True, eq=True)
class Sum(_Node):
    left: "Expr"
    right: "Expr"
    _hash: int = _cache()
    _text: str = _cache()

    def _key(self):
        return (self.left, self.right)

    def _render(self):
        return f"({self.left} + {self.right})"


@dataclass(frozen=True, eq=True)
class Prod(_Node):
    left: "Expr"
    right: "Expr"
    _hash: int = _cache()
    _text: str = _cache()

    def _key(self):
        return (self.left, self.right)

    def _render(self):
        return f"({self.left} . {self.right})"


@dataclass(frozen=True, eq=True)
class Star(_Node):
    body: "Expr"
    _hash: int = _cache()
    _text: str = _cache()

    def _key(self):
        return (self.body,)

    def _render(self):
        return f"({self.body})*"


Expr = Union[Zero, One, Act, Sum, Prod, Star]

ZERO = Zero()
ONE = One()


def valid_action(name: str) -> bool:
    return (isinstance(name, str) and bool(_ACTION_RE.fullmatch(name))
            and name not in ("0", "1", ONE_LABEL))


def print_canonical(e: Expr) -> str:
    return str(e)


def sum_of(terms, empty: Expr = ZERO) -> Expr:
    """Left-folded sum of ``terms``; ``empty`` when there are none."""
    terms = list(terms)
    if not terms:
        return empty
    acc = terms[0]
    for t in terms[1:]:
        acc = Sum(acc, t)
    return acc


def prod_of(*factors: Expr) -> Expr:
    acc = factors[0]
    for f in factors[1:]:
        acc = Prod(acc, f)
    return acc


# -- parsing ---------------------------------------------------------------

class _Tok(NamedTuple):
    kind: str
    text: str
    offset: int


def _tokenize(text: str) -> list[_Tok]:
    data = text.encode("utf-8")
    toks = []
    i = 0
    while i < len(data):
        ch = chr(data[i])
        if ch.isspace():
            i += 1
        elif ch in "+.*()":
            toks.append(_Tok(ch, ch, i))
            i += 1
        else:
            m = re.compile(rb"[A-Za-z0-9_]+").match(data, i)
            if not m:
                raise ParseError(f"unexpected character {data[i:i + 1]!r}", i)
            toks.append(_Tok("word", m.group().decode(), i))
            i = m.end()
    toks.append(_Tok("end", "", len(data)))
    return toks


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.pos = 0

    def peek(self) -> _Tok:
        return self.toks[self.pos]

    def take(self, kind: str) -> _Tok:
        tok = self.peek()
        if tok.kind != kind:
            found = tok.text or "end of input"
            raise ParseError(f"expected {kind!r}, found {found!r}", tok.offset)
        self.pos += 1
        return tok

    def parse_sum(self) -> Expr:
        e = self.parse_prod()
        while self.peek().kind == "+":
            self.pos += 1
            e = Sum(e, self.parse_prod())
        return e

    def parse_prod(self) -> Expr:
        e = self.parse_post()
        while self.peek().kind == ".":
            self.pos += 1
            e = Prod(e, self.parse_post())
        return e

    def parse_post(self) -> Expr:
        e = self.parse_atom()
        while self.peek().kind == "*":
            self.pos += 1
            e = Star(e)
        return e

    def parse_atom(self) -> Expr:
        tok = self.peek()
        if tok.kind == "(":
            self.pos += 1
            e = self.parse_sum()
            self.take(")")
            return e
        if tok.kind == "word":
            self.pos += 1
            if tok.text == "0":
                return ZERO
            if tok.text == "1":
                return ONE
            if tok.text == ONE_LABEL:
                raise ParseError("reserved token used as action", tok.offset)
            return Act(tok.text)
        found = tok.text or "end of input"
        raise ParseError(f"unexpected {found!r}", tok.offset)


def parse_expr(text: str) -> Expr:
    """Parse expression text.

    >>> print_canonical(parse_expr("(a* . b*)*"))
    '(((a)* . (b)*))*'
    """
    if not text or not text.strip():
        raise ParseError("empty expression", 0)
    p = _Parser(text)
    e = p.parse_sum()
    tok = p.peek()
    if tok.kind != "end":
        raise ParseError(f"trailing input {tok.text!r}", tok.offset)
    return e


# -- measures and classifiers ----------------------------------------------

@lru_cache(maxsize=None)
def star_height(e: Expr) -> int:
    if isinstance(e, (Sum, Prod)):
        return max(star_height(e.left), star_height(e.right))
    if isinstance(e, Star):
        return 1 + star_height(e.body)
    return 0


@lru_cache(maxsize=None)
def expr_size(e: Expr) -> int:
    if isinstance(e, (Sum, Prod)):
        return 1 + expr_size(e.left) + expr_size(e.right)
    if isinstance(e, Star):
        return 1 + expr_size(e.body)
    return 1


@lru_cache(maxsize=None)
def is_normed(e: Expr) -> bool:
    """Whether ``e`` can reach immediate termination (structural test)."""
    if isinstance(e, Zero):
        return False
    if isinstance(e, Sum):
        return is_normed(e.left) or is_normed(e.right)
    if isinstance(e, Prod):
        return is_normed(e.left) and is_normed(e.right)
    return True


@lru_cache(maxsize=None)
def terminates(e: Expr) -> bool:
    """Immediate termination in the chart semantics."""
    if isinstance(e, (One, Star)):
        return True
    if isinstance(e, Sum):
        return terminates(e.left) or terminates(e.right)
    if isinstance(e, Prod):
        return terminates(e.left) and terminates(e.right)
    return False


def is_normed_semantic(e: Expr) -> bool:
    """Breadth-first search for a terminating derivative of ``e``."""
    from .interp import derivatives, TssKind

    seen = {e}
    todo = deque([e])
    while todo:
        f = todo.popleft()
        if terminates(f):
            return True
        for _, g in derivatives(f, TssKind.CHART):
            if g not in seen:
                seen.add(g)
                todo.append(g)
    return False


class ExprClass(NamedTuple):
    is_1free: bool
    is_understar_1free: bool


def _factors(e: Expr) -> list:
    """Factors of a product chain, associativity ignored."""
    if isinstance(e, Prod):
        return _factors(e.left) + _factors(e.right)
    return [e]


@lru_cache(maxsize=None)
def is_1free(e: Expr) -> bool:
    """Built from 0, actions, sums, products and iterations ``f* . g``.

    Products are read up to associativity, so ``(a . f*) . g`` qualifies as
    well as ``a . (f* . g)``: every starred factor of a product chain needs a
    1-free body and a factor after it.
    """
    if isinstance(e, (Zero, Act)):
        return True
    if isinstance(e, Sum):
        return is_1free(e.left) and is_1free(e.right)
    if isinstance(e, Prod):
        fs = _factors(e)
        if isinstance(fs[-1], Star):
            return False
        return all(is_1free(f.body) if isinstance(f, Star) else is_1free(f)
                   for f in fs)
    return False


@lru_cache(maxsize=None)
def is_understar_1free(e: Expr) -> bool:
    if isinstance(e, (Zero, One, Act)):
        return True
    if isinstance(e, (Sum, Prod)):
        return is_understar_1free(e.left) and is_understar_1free(e.right)
    return is_1free(e.body)


def classify(e: Expr) -> ExprClass:
    return ExprClass(is_1free(e), is_understar_1free(e))


def actions(e: Expr) -> frozenset:
    """Action symbols occurring in ``e``."""
    if isinstance(e, Act):
        return frozenset([e.name])
    if isinstance(e, (Sum, Prod)):
        return actions(e.left) | actions(e.right)
    if isinstance(e, Star):
        return actions(e.body)
    return frozenset()
