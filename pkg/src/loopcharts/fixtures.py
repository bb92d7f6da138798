"""Named example expressions with their expected properties.

The data lives in ``fixtures/*.json`` next to this module.  Every expected
value records its provenance: ``published`` (stated in the literature),
``derived`` (computed by an independent route) or ``trivial``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources

from .expr import Expr, parse_expr


@dataclass(frozen=True)
class Fixture:
    id: str
    title: str
    expr_text: str
    expected: dict          # name -> {"value": ..., "provenance": ...}

    @property
    def expr(self) -> Expr:
        return parse_expr(self.expr_text)

    def value(self, name: str):
        return self.expected[name]["value"]


def _dir():
    return resources.files(__package__).joinpath("fixtures")


def list_fixtures() -> list:
    return sorted(p.name[:-5] for p in _dir().iterdir()
                  if p.name.endswith(".json"))


def load_fixture(fid: str) -> Fixture:
    path = _dir().joinpath(fid + ".json")
    if not path.is_file():
        raise KeyError(f"unknown fixture {fid!r}; known: {list_fixtures()}")
    obj = json.loads(path.read_text(encoding="utf-8"))
    return Fixture(obj["id"], obj["title"], obj["expr"], obj["expected"])
