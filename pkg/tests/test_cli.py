import json
import subprocess
import sys

import pytest

from loopcharts.chart import dumps, loads
from loopcharts.cli import main
from loopcharts.expr import parse_expr
from loopcharts.interp import chart_interp, labeled_interp

SOS = "(a* . b*)*"
E0 = "((1 . a) . (c . a + a . (b + b . a))*) . 0"


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_interp_outputs_canonical_json(capsys):
    code, out, _ = run(capsys, "interp", SOS)
    assert code == 0
    assert loads(out) == chart_interp(parse_expr(SOS))
    assert out == dumps(chart_interp(parse_expr(SOS)))


@pytest.mark.parametrize("fmt,marker", [("dot", "digraph"), ("text", "start")])
def test_interp_other_formats(capsys, fmt, marker):
    code, out, _ = run(capsys, "interp", SOS, "--tss", "one", "--out", fmt)
    assert code == 0 and out.startswith(marker)


def test_labelled_interpretation_keeps_levels(capsys):
    code, out, _ = run(capsys, "interp", SOS, "--tss", "labeled")
    assert code == 0
    assert loads(out) == labeled_interp(parse_expr(SOS))


def test_bisim_verdicts(capsys):
    assert run(capsys, "bisim", "a*", "(a . a*)*")[0] == 0
    code, out, _ = run(capsys, "bisim", "a . b + a . c", "a . (b + c)")
    assert code == 1 and "not" in out


def test_lee_verdicts(capsys, tmp_path):
    assert run(capsys, "lee", SOS)[0] == 1
    code, out, _ = run(capsys, "lee", E0)
    assert code == 0
    path = tmp_path / "w.json"
    path.write_text(out)
    code, out, err = run(capsys, "extract", str(path), "--verify")
    assert code == 0 and "isomorphism" in err
    assert parse_expr(out.strip())


def test_extract_from_expression_and_negative_case(capsys):
    code, out, _ = run(capsys, "extract", E0, "--verify")
    assert code == 0
    assert run(capsys, "extract", SOS)[0] == 1


def test_collapse_reads_chart_files(capsys, tmp_path):
    path = tmp_path / "c.json"
    path.write_text(dumps(chart_interp(parse_expr("a . a* + a . a*"))))
    code, out, _ = run(capsys, "collapse", str(path))
    assert code == 0 and len(loads(out).vertices) == 2


def test_elim_modes(capsys):
    code, out, err = run(capsys, "elim", SOS, "--tss", "one")
    assert code == 0 and loads(out) == chart_interp(parse_expr(SOS))
    code, out, err = run(capsys, "elim", SOS, "--tss", "labeled",
                         "--mode", "nonbacklinks")
    assert code == 0 and "4 eliminations" in err


def test_usage_errors_exit_with_two(capsys):
    assert run(capsys, "interp", "(a +")[0] == 2
    assert run(capsys, "nonsense")[0] == 2
    assert run(capsys, "fuzz", "--count", "0")[0] == 2
    assert run(capsys, "bisim", "a")[0] == 2


def test_resource_cap_exits_with_three(capsys, monkeypatch):
    monkeypatch.setenv("LOOPCHARTS_VERTEX_CAP", "2")
    code, _, err = run(capsys, "interp", SOS)
    assert code == 3 and "cap" in err


def test_fuzz_reports_json(capsys):
    code, out, _ = run(capsys, "fuzz", "--seed", "1", "--count", "15",
                       "--max-size", "8")
    obj = json.loads(out)
    assert code == 0 and obj["checked"] == 15 and obj["violations"] == []


def test_module_entry_point_and_stdin():
    text = dumps(chart_interp(parse_expr("a . a*")))
    res = subprocess.run([sys.executable, "-m", "loopcharts", "collapse", "-"],
                         input=text, capture_output=True, text=True,
                         check=False)
    assert res.returncode == 0
    assert len(loads(res.stdout).vertices) == 2


@pytest.mark.slow
def test_counterexample_report(capsys, tmp_path):
    path = tmp_path / "report.json"
    code, out, _ = run(capsys, "counterexample", "run", "--report", str(path))
    assert code == 0
    assert "budget: 1 fresh vertices, 2 added 1-transitions" in out
    rep = json.loads(path.read_text())
    assert rep["ok"] and rep["budget"]["added_one_transitions"] == 2
