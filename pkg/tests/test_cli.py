"""Command-line behavior: verdict exit codes, formats, determinism."""

import json
import subprocess
import sys

import pytest

from rctc.cli import main


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_parse_prints_normal_form(capsys):
    code, out, _ = run(["parse", "a . ( b.nil+c.nil )"], capsys)
    assert code == 0
    assert out.strip() == "a.(b.nil + c.nil)"


def test_parse_machine_includes_sort_and_keys(capsys):
    code, out, _ = run(["parse", "--format", "machine", "a[2].~b.nil"], capsys)
    doc = json.loads(out)
    assert code == 0
    assert doc["keys"] == [2]
    assert doc["sort"] == ["a", "~b"]
    assert doc["standard"] is False


def test_parse_error_exits_2(capsys):
    code, _, err = run(["parse", "a.(b"], capsys)
    assert code == 2
    assert "error" in err


def test_trace_shows_one_round_and_the_undo(capsys):
    code, out, _ = run(["trace", "a.nil"], capsys)
    assert code == 0
    assert "edge 0 --{a}--> 1" in out
    assert "edge 1 --{a[1]}~~> 0" in out


def test_check_reports_the_separating_step(capsys):
    code, out, _ = run(
        ["check", "--flavor", "step", "--strength", "strong",
         "a.nil | b.nil", "a.b.nil + b.a.nil"],
        capsys,
    )
    assert code == 1
    assert "inequivalent" in out
    assert "{a, b}" in out


def test_check_equivalent_exits_0(capsys):
    code, out, _ = run(["check", "a.nil + a.nil", "a.nil"], capsys)
    assert code == 0
    assert "equivalent" in out


def test_check_weak_flag(capsys):
    code, out, _ = run(["check", "--strength", "weak", "tau.a.nil", "a.nil"], capsys)
    assert code == 0


def test_explore_truncation_exits_3(tmp_path, capsys):
    defs = tmp_path / "defs.rctc"
    defs.write_text("A := a.A\n")
    code, out, _ = run(
        ["explore", "--defs", str(defs), "--depth", "5", "--states", "3", "A"],
        capsys,
    )
    assert code == 3
    assert "truncated: yes" in out


def test_explore_machine_round_trips_states(capsys):
    code, out, _ = run(["explore", "--format", "machine", "a.nil | b.nil"], capsys)
    doc = json.loads(out)
    assert code == 0
    assert len(doc["states"]) == 4
    assert doc["truncated"] is False


def test_laws_small_run_reports_every_case(capsys):
    code, out, _ = run(
        ["laws", "--samples", "1", "--seed", "5", "--depth", "3",
         "--width", "2", "--states", "300", "--format", "machine"],
        capsys,
    )
    doc = json.loads(out)
    assert len(doc["cases"]) == 196
    assert doc["total_fails"] == 0
    assert code in (0, 3)  # tight bounds may truncate some games, never fail them


def test_missing_defs_file_exits_2(capsys):
    code, _, err = run(["explore", "--defs", "/nonexistent/defs", "a.nil"], capsys)
    assert code == 2
    assert "error" in err


def test_same_invocation_same_bytes(capsys):
    argv = ["explore", "tau.(a.nil | ~a.nil) + b.c.nil"]
    _, first, _ = run(argv, capsys)
    _, second, _ = run(argv, capsys)
    assert first == second


def test_console_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "rctc.cli", "check", "a.nil", "b.nil"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 1
    assert "inequivalent" in proc.stdout


def test_usage_error_exits_2():
    proc = subprocess.run(
        [sys.executable, "-m", "rctc.cli", "frobnicate"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 2
