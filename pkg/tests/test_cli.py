"""Command-line behavior: exit codes, traces, reports."""

import subprocess
import sys
from importlib import resources

import pytest

from cfj.cli import main
from cfj.fixtures import fixture_source


@pytest.fixture
def fixture_file(tmp_path):
    def write(name, content=None):
        path = tmp_path / name
        path.write_text(content if content is not None else fixture_source(name),
                        encoding="utf-8")
        return str(path)
    return write


def test_check_accepts_and_prints_the_main_type(fixture_file, capsys):
    assert main(["check", fixture_file("p_game.cfj")]) == 0
    assert capsys.readouterr().out.strip() == "Text"


def test_check_rejects_with_exit_1_citing_the_rule(fixture_file, capsys):
    assert main(["check", fixture_file("p_cex1.cfj")]) == 1
    err = capsys.readouterr().err
    assert "T-LayerSW" in err and "requires" in err


def test_check_malformed_file_exits_2(fixture_file, capsys):
    assert main(["check", fixture_file("bad.cfj", "class {")]) == 2
    assert main(["check", fixture_file("cycle.cfj",
                                       "class A extends A { } main { new A() }")]) == 2


def test_check_missing_file_exits_2(tmp_path, capsys):
    assert main(["check", str(tmp_path / "nope.cfj")]) == 2


def test_run_prints_the_final_value(fixture_file, capsys):
    assert main(["run", fixture_file("tiny.cfj", "main { new Object() }")]) == 0
    assert capsys.readouterr().out.strip() == "new Object()"


def test_run_trace_matches_the_golden_file(fixture_file, capsys):
    from cfj.fixtures import golden_source
    assert main(["run", "--trace", fixture_file("p_lookup2.cfj")]) == 0
    out = capsys.readouterr().out
    golden = golden_source("p_lookup2.trace")
    trace_lines = [l for l in golden.splitlines() if l.startswith("#")]
    assert out.splitlines()[: len(trace_lines)] == trace_lines
    assert "R-Invk " in out and "R-InvkP" in out


def test_run_unchecked_counterexample_exits_3(fixture_file, capsys):
    assert main(["run", "--unchecked", fixture_file("p_cex1.cfj")]) == 3
    captured = capsys.readouterr()
    assert "stuck" in captured.err


def test_run_rejects_without_unchecked(fixture_file, capsys):
    assert main(["run", fixture_file("p_cex1.cfj")]) == 1


def test_run_fuel_exhaustion_exits_4(fixture_file, capsys):
    assert main(["run", "--max-steps", "40",
                 fixture_file("c16_diverge.cfj")]) == 4


def test_max_steps_env_override(fixture_file, capsys, monkeypatch):
    monkeypatch.setenv("CFJ_MAX_STEPS", "30")
    assert main(["run", fixture_file("c16_diverge.cfj")]) == 4
    assert "30 steps" in capsys.readouterr().err


def test_soundness_single_program(fixture_file, capsys):
    assert main(["soundness", fixture_file("p_lookup2.cfj")]) == 0
    assert "pass" in capsys.readouterr().out


def test_soundness_suite_with_depth_and_report(tmp_path, fixture_file, capsys):
    suite = tmp_path / "suite"
    suite.mkdir()
    for name in ("p_lookup1.cfj", "c05_with_basic.cfj"):
        (suite / name).write_text(fixture_source(name), encoding="utf-8")
    report_dir = tmp_path / "out"
    assert main(["soundness", "--suite", str(suite), "--depth", "2",
                 "--report-dir", str(report_dir)]) == 0
    out = capsys.readouterr().out
    assert "candidates" in out
    assert (report_dir / "report.csv").exists()
    assert (report_dir / "verdicts.png").exists()
    assert (report_dir / "trace_lengths.png").exists()
    header = (report_dir / "report.csv").read_text().splitlines()[0]
    assert header == "id,verdict,steps,failing_step,detail"


def test_soundness_empty_suite(tmp_path, capsys):
    suite = tmp_path / "empty"
    suite.mkdir()
    assert main(["soundness", "--suite", str(suite)]) == 0
    assert "0 programs" in capsys.readouterr().out


def test_soundness_detects_a_corrupted_evaluator(fixture_file, capsys, monkeypatch):
    monkeypatch.setenv("CFJ_TEST_BREAK_WITHVAL", "1")
    assert main(["soundness", fixture_file("c05_with_basic.cfj")]) == 5
    assert "FAIL" in capsys.readouterr().out


def test_console_script_wiring(fixture_file):
    proc = subprocess.run(
        [sys.executable, "-m", "cfj.cli", "check", fixture_file("p_game.cfj")],
        capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.strip() == "Text"


def test_identical_inputs_identical_outputs(fixture_file, capsys):
    path = fixture_file("p_lookup1.cfj")
    main(["run", "--trace", path])
    first = capsys.readouterr().out
    main(["run", "--trace", path])
    second = capsys.readouterr().out
    assert first == second
