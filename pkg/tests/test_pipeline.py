import json
from pathlib import Path

import pytest

from flatpencil.cli import main
from flatpencil.pipeline import PipelineReport, Stage, emit, run_branches, run_pipeline

FIXTURE = Path(__file__).parent / "fixtures" / "report_n2_plus.json"


def test_plus_branch_all_stages_pass():
    rep = run_pipeline(2, "plus")
    assert rep.passed
    assert [s.name for s in rep.stages] == [
        "group-relations", "invariants", "syzygy", "quotient-metric",
        "lie-derivative-metric", "scaling-ode", "flat-pencil", "quasihomogeneity",
        "regularity", "flat-coordinates", "potential-reconstruction",
        "frobenius-axioms", "normal-form"]
    assert rep.stage("potential-reconstruction").details["matches_closed_form"]


def test_minus_branch_passes_with_charge_flag():
    rep = run_pipeline(5, "minus")
    assert rep.passed
    kinds = [d["kind"] for d in rep.discrepancies]
    assert "charge-sign" in kinds
    quasi = rep.stage("quasihomogeneity").details
    assert quasi["sign_flag"] is True
    assert quasi["charge_matches"] is True


def test_small_n_rejected():
    with pytest.raises(ValueError):
        run_pipeline(1, "plus")


def test_unknown_branch_rejected():
    with pytest.raises(ValueError):
        run_pipeline(2, "sideways")


def test_json_matches_golden_fixture():
    doc = emit(run_branches(2, "plus"), "json")
    assert doc == FIXTURE.read_text()


def test_reports_are_deterministic():
    a = emit(run_branches(3, "both"), "json")
    b = emit(run_branches(3, "both"), "json")
    assert a == b


def test_json_schema_fields():
    doc = json.loads(emit(run_branches(2, "minus"), "json"))
    assert doc["schema_version"] == 1
    run = doc["runs"][0]
    assert run["branch"] == "minus"
    assert run["parameters"]["precision_bits"] == 256
    assert {s["name"] for s in run["stages"]} >= {"syzygy", "normal-form"}
    assert run["numeric_backstop"]["all_passed"] is True


def test_text_output_marks_stages():
    text = emit(run_branches(2, "plus"), "text")
    assert "[PASS] group-relations" in text
    assert "overall: PASS" in text
    assert "[FLAG] regularity-convention" in text


def test_latex_output_reproduces_displayed_objects():
    tex = emit(run_branches(2, "plus"), "latex")
    # quotient-chart metric entries in published notation
    assert "\\frac{4}{3} \\, u_1" in tex
    assert "\\frac{4}{3} \\, u_2" in tex
    # flat metric is the antidiagonal identity pair after sign unwinding
    assert "0 & 1 \\\\\n1 & 0" in tex
    # the potential renders against t_1, not the internal variable
    assert "\\left(-t_1\\right)^{1-2 \\sqrt{3}}" in tex
    assert "w1" not in tex
    assert tex.startswith("\\documentclass")


def test_latex_minus_branch_uses_plain_t1():
    tex = emit(run_branches(2, "minus"), "latex")
    assert "\\left(-t_1\\right)" not in tex
    assert "t_1^{1+2 \\sqrt{3}}" in tex


def test_cli_json_roundtrip(capsys):
    code = main(["--n", "2", "--branch", "plus", "--format", "json"])
    out = capsys.readouterr().out
    assert code == 0
    assert json.loads(out)["runs"][0]["passed"] is True


def test_cli_writes_file(tmp_path):
    target = tmp_path / "report.txt"
    code = main(["--n", "2", "--branch", "minus", "--format", "text",
                 "--out", str(target)])
    assert code == 0
    assert "overall: PASS" in target.read_text()


def test_cli_rejects_n_one():
    with pytest.raises(SystemExit) as exc:
        main(["--n", "1", "--branch", "plus"])
    assert exc.value.code == 2


def test_cli_rejects_bad_branch():
    with pytest.raises(SystemExit) as exc:
        main(["--n", "2", "--branch", "diagonal"])
    assert exc.value.code == 2


def test_cli_exit_code_on_stage_failure(monkeypatch, capsys):
    failing = PipelineReport(
        n=2, branch="plus", precision_bits=256, samples=10, seed=0,
        stages=[Stage("syzygy", False, {})], discrepancies=[],
        numeric={"checks": 0, "all_passed": True, "max_abs": "0",
                 "tolerance": "1e-60", "failed": []})
    monkeypatch.setattr("flatpencil.cli.run_branches", lambda *a, **k: [failing])
    code = main(["--n", "2", "--branch", "plus", "--format", "text"])
    assert code == 1
    assert "overall: FAIL" in capsys.readouterr().out
