"""Command line interface.

Exit codes: 0 success or positive verdict, 1 negative verdict, 2 usage error,
3 resource cap hit, 4 internal invariant failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .bisim import SearchCapError, are_bisimilar, collapse
from .chart import Chart, ChartError, LabeledChart, dot_text, dumps, loads
from .expr import ParseError, parse_expr
from .interp import ResourceCapError, TssKind, interpret

EXIT_OK, EXIT_NEGATIVE, EXIT_USAGE, EXIT_CAP, EXIT_INTERNAL = 0, 1, 2, 3, 4


class UsageError(Exception):
    pass


def _read_input(arg: str, tss: str = "chart"):
    """A chart (or labelled chart) from a JSON file, ``-`` for stdin, or an
    expression interpreted with the given rule system."""
    if arg == "-":
        return loads(sys.stdin.read())
    if os.path.exists(arg):
        with open(arg, encoding="utf-8") as fh:
            return loads(fh.read())
    try:
        e = parse_expr(arg)
    except ParseError as exc:
        raise UsageError(f"{arg!r} is neither a file nor an expression: "
                         f"{exc}") from None
    return interpret(e, TssKind(tss))


def _as_chart(x) -> Chart:
    return x.chart if isinstance(x, LabeledChart) else x


def _emit(obj, fmt: str):
    if fmt == "json":
        sys.stdout.write(dumps(obj))
    elif fmt == "dot":
        sys.stdout.write(dot_text(obj))
    else:
        c = _as_chart(obj)
        levels = obj.levels if isinstance(obj, LabeledChart) else {}
        print(f"start {c.start}")
        for v in c.sorted_vertices():
            mark = "  (terminating)" if v in c.terminating else ""
            print(f"vertex {v}{mark}")
        for t in sorted(c.transitions):
            lv = levels.get(t, 0)
            print(f"{t[0]} --{'1' if t[1] == '__1__' else t[1]}"
                  f"{f' [{lv}]' if lv else ''}--> {t[2]}")


def cmd_interp(a) -> int:
    e = parse_expr(a.expr)
    _emit(interpret(e, TssKind(a.tss)), a.out)
    return EXIT_OK


def cmd_bisim(a) -> int:
    c1 = _as_chart(_read_input(a.left, a.tss))
    c2 = _as_chart(_read_input(a.right, a.tss))
    same = are_bisimilar(c1, c2)
    print("bisimilar" if same else "not bisimilar")
    return EXIT_OK if same else EXIT_NEGATIVE


def cmd_collapse(a) -> int:
    from .chart import induced_chart
    c = _as_chart(_read_input(a.input, a.tss))
    q, _ = collapse(induced_chart(c))
    _emit(q, a.out)
    return EXIT_OK


def cmd_lee(a) -> int:
    from .lee import compact_levels, lee_check
    c = _as_chart(_read_input(a.input, a.tss))
    w, run = lee_check(c)
    if w is None:
        print("no LEE witness: the chart does not satisfy LEE")
        return EXIT_NEGATIVE
    if a.compact:
        w = compact_levels(w)
    _emit(w, a.out)
    return EXIT_OK


def cmd_elim(a) -> int:
    from .elim import eliminate_nonbacklinks, normalize
    from .lee import lee_check
    x = _read_input(a.input, a.tss)
    if a.mode == "normalize":
        n, trace = normalize(_as_chart(x))
        print(f"# {len(trace)} eliminations", file=sys.stderr)
        _emit(n, a.out)
        return EXIT_OK
    w = x
    if not isinstance(w, LabeledChart):
        w, _ = lee_check(w)
        if w is None:
            print("no LEE witness to start from")
            return EXIT_NEGATIVE
    res, trace, fallbacks = eliminate_nonbacklinks(w)
    print(f"# {len(trace)} eliminations, {fallbacks} witness recomputations",
          file=sys.stderr)
    _emit(res, a.out)
    return EXIT_OK


def cmd_extract(a) -> int:
    from .extract import extract, verify_extraction
    from .lee import lee_check
    x = _read_input(a.input, a.tss)
    w = x if isinstance(x, LabeledChart) else lee_check(x)[0]
    if w is None:
        print("no LEE witness: nothing to extract")
        return EXIT_NEGATIVE
    e = extract(w)
    print(e)
    if a.verify:
        rep = verify_extraction(w.chart, w, e)
        for p in rep.problems:
            print(f"verification: {p}", file=sys.stderr)
        if not rep.ok:
            return EXIT_INTERNAL
        kind = "isomorphism" if rep.isomorphism else "functional bisimulation"
        print(f"# verified: {kind}", file=sys.stderr)
    return EXIT_OK


def cmd_counterexample(a) -> int:
    from .counterexample import run_counterexample_suite
    fresh, ones = a.budget
    rep = run_counterexample_suite(fresh, ones)
    for line in rep.lines():
        print(line)
    if a.report:
        with open(a.report, "w", encoding="utf-8") as fh:
            json.dump(rep.to_json_obj(), fh, indent=1, sort_keys=True)
            fh.write("\n")
    return EXIT_OK if rep.ok else EXIT_INTERNAL


def cmd_fuzz(a) -> int:
    from .fuzz import fuzz
    if a.count <= 0 or a.max_size <= 0:
        raise UsageError("--count and --max-size must be positive")
    rep = fuzz(a.seed, a.count, a.max_size)
    print(json.dumps(rep.to_json_obj(), indent=1, sort_keys=True))
    return EXIT_OK if rep.ok else EXIT_INTERNAL


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="loopcharts",
        description="Star expressions as process charts: interpretation, "
                    "bisimulation, loop structure and extraction.")
    sub = p.add_subparsers(dest="command", required=True)
    tss_choices = [k.value for k in TssKind]
    fmt = ["json", "dot", "text"]

    def chart_arg(sp, name="input"):
        sp.add_argument(name, help="chart JSON file, '-' for stdin, or an "
                                   "expression")
        sp.add_argument("--tss", choices=tss_choices, default="chart",
                        help="rule system for expression inputs")

    s = sub.add_parser("interp", help="interpret an expression as a chart")
    s.add_argument("expr")
    s.add_argument("--tss", choices=tss_choices, default="chart")
    s.add_argument("--out", choices=fmt, default="json")
    s.set_defaults(fn=cmd_interp)

    s = sub.add_parser("bisim", help="decide bisimilarity of two charts")
    s.add_argument("left")
    s.add_argument("right")
    s.add_argument("--tss", choices=tss_choices, default="chart")
    s.set_defaults(fn=cmd_bisim)

    s = sub.add_parser("collapse", help="bisimulation collapse")
    chart_arg(s)
    s.add_argument("--out", choices=fmt, default="json")
    s.set_defaults(fn=cmd_collapse)

    s = sub.add_parser("lee", help="search a layered LEE witness")
    chart_arg(s)
    s.add_argument("--out", choices=fmt, default="json")
    s.add_argument("--compact", action="store_true",
                   help="renumber levels to the fewest stages")
    s.set_defaults(fn=cmd_lee)

    s = sub.add_parser("elim", help="eliminate 1-transitions")
    chart_arg(s)
    s.add_argument("--mode", choices=["normalize", "nonbacklinks"],
                   default="normalize")
    s.add_argument("--out", choices=fmt, default="json")
    s.set_defaults(fn=cmd_elim)

    s = sub.add_parser("extract", help="extract an expression from a "
                                       "witnessed chart")
    chart_arg(s)
    s.add_argument("--verify", action="store_true")
    s.set_defaults(fn=cmd_extract)

    s = sub.add_parser("counterexample", help="the non-collapsible example")
    csub = s.add_subparsers(dest="action", required=True)
    r = csub.add_parser("run", help="run the check suite")
    r.add_argument("--budget", nargs=2, type=int, default=[1, 2],
                   metavar=("FRESH", "ONES"))
    r.add_argument("--report", help="write a JSON report here")
    r.set_defaults(fn=cmd_counterexample)

    s = sub.add_parser("fuzz", help="random property suite")
    s.add_argument("--seed", type=int, default=42)
    s.add_argument("--count", type=int, default=200)
    s.add_argument("--max-size", type=int, default=12)
    s.set_defaults(fn=cmd_fuzz)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.fn(args)
    except (UsageError, ParseError, ChartError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ResourceCapError, SearchCapError, RecursionError) as exc:
        print(f"resource cap: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (AssertionError, RuntimeError) as exc:
        print(f"internal invariant failure: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
