import io
import subprocess
import sys
from pathlib import Path

import pytest

from bore import FIXTURES, fixture_text
from bore.cli import run_command
from conftest import TABLE1


@pytest.fixture
def fx(tmp_path):
    """Bundled fixtures copied into a temp dir; returns a path lookup."""
    for name in FIXTURES:
        (tmp_path / name).write_text(fixture_text(name), encoding="utf-8")
    return lambda name: str(tmp_path / name)


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run_command(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


def test_validate_ok(fx):
    assert run("validate", fx("journal.asis")) == (0, "ok\n", "")


def test_validate_reports_violations(fx, tmp_path):
    bad = tmp_path / "bad.asis"
    bad.write_text('process "P"\nrole r\ntask t1 "T" role=r\nflow s -> t1\nstart s\nend e\n')
    code, out, _ = run("validate", str(bad))
    assert code == 1
    assert "end-unreachable" in out


def test_missing_file_is_usage_error(tmp_path):
    code, out, err = run("validate", str(tmp_path / "nope.asis"))
    assert code == 2 and out == ""
    assert "cannot read" in err


def test_parse_error_is_usage_error(tmp_path):
    p = tmp_path / "x.asis"
    p.write_text("role r\n")
    code, _, err = run("validate", str(p))
    assert code == 2 and "missing-process-header" in err


@pytest.mark.parametrize("argv", [[], ["frobnicate"], ["decide", "only-one-arg"], ["metrics", "a", "b", "--format", "xml"]])
def test_bad_usage(argv):
    code, _, err = run(*argv)
    assert code == 2 and err


def test_decide_lines_and_overrides(fx):
    code, out, _ = run("decide", fx("journal.asis"), fx("journal.annot"))
    assert code == 0
    lines = out.splitlines()
    assert len(lines) == 22
    assert {line.split()[0]: line.split()[1] for line in lines} == TABLE1
    assert sum(" override " in line for line in lines) == 4


def test_decide_check_golden(fx, tmp_path):
    code, _, err = run("decide", fx("journal.asis"), fx("journal.annot"), "--check-golden")
    assert code == 0 and "22/22" in err
    wrong = tmp_path / "wrong.golden"
    wrong.write_text(fixture_text("table1.golden").replace("t1 A", "t1 M"))
    code, _, err = run("decide", fx("journal.asis"), fx("journal.annot"), "--check-golden", str(wrong))
    assert code == 1 and "golden mismatch t1" in err


def test_tobe_then_diff(fx, tmp_path):
    tobe = tmp_path / "journal.tobe"
    assert run("tobe", fx("journal.asis"), fx("journal.annot"), "-o", str(tobe))[0] == 0
    code, out, _ = run("diff", fx("journal.asis"), str(tobe))
    assert code == 0
    lines = out.splitlines()
    assert len(lines) == 22
    assert all(line.startswith("SYSTEMINFORMATION LABELASSIGNED t") for line in lines)


def test_diff_identical_is_empty(fx):
    assert run("diff", fx("journal.asis"), fx("journal.asis")) == (0, "", "")


def test_metrics_formats(fx):
    code, out, _ = run("metrics", fx("journal.asis"), fx("journal.annot"))
    assert (code, out) == (0, "A=6\nS=7\nM=9\nautomation_degree=19/44\n")
    code, out, _ = run("metrics", fx("journal.asis"), fx("journal.annot"), "--format", "text")
    assert code == 0 and "19/44" in out


def test_usecases(fx):
    code, out, _ = run("usecases", fx("journal.asis"), "--packages", fx("journal.packages"))
    assert code == 0
    assert sum(line.startswith("package ") for line in out.splitlines()) == 3
    counts = {parts[1]: int(parts[2]) for parts in (line.split() for line in out.splitlines()) if parts[0] == "actor"}
    assert counts["EiC"] == 7 and counts["EiC"] > max(v for k, v in counts.items() if k != "EiC")


def test_usecases_unknown_actor(fx):
    code, _, err = run("usecases", fx("journal.asis"), "--packages", fx("journal.packages"), "--actors", "Nobody")
    assert code == 1 and err


def test_usecases_dot(fx):
    code, out, _ = run("usecases", fx("journal.asis"), "--packages", fx("journal.packages"), "--dot")
    assert code == 0 and out.startswith("digraph") and out.count("subgraph") == 3


@pytest.fixture
def tobe_path(fx, tmp_path):
    path = tmp_path / "journal.tobe"
    run("tobe", fx("journal.asis"), fx("journal.annot"), "-o", str(path))
    return str(path)


@pytest.mark.parametrize("script, end", [("accept.events", "end_published"), ("reject.events", "end_rejected"),
                                         ("revise.events", "end_published")])
def test_simulate_scripts(fx, tobe_path, script, end):
    code, out, _ = run("simulate", tobe_path, "--script", fx(script))
    assert code == 0
    assert out.splitlines()[-1].startswith(f"# final {end}")


def test_simulate_budget_exceeded(fx, tobe_path):
    code, _, err = run("simulate", tobe_path, "--script", fx("revise.events"), "--max-revisions", "0")
    assert code == 1 and "RevisionBudgetExceeded" in err


def test_enumerate(tobe_path):
    code, out, _ = run("enumerate", tobe_path)
    assert code == 0
    assert out.splitlines() == ["end_published 48", "end_rejected 24", "terminates=true max_steps=37 bound=93"]


def test_render(tobe_path, tmp_path):
    code, out, _ = run("render", tobe_path)
    assert code == 0 and out.count("fillcolor=green") == 6
    target = tmp_path / "j.dot"
    assert run("render", tobe_path, "-o", str(target)) == (0, "", "")
    assert target.read_text() == out


def test_output_is_byte_identical_across_runs(fx, tobe_path):
    for argv in (["decide", fx("journal.asis"), fx("journal.annot")], ["render", tobe_path], ["enumerate", tobe_path]):
        assert run(*argv) == run(*argv)


def test_console_script_pipes(fx, tmp_path):
    """tobe output piped through a file into diff, via a real subprocess."""
    exe = [sys.executable, "-m", "bore.cli"]
    tobe = subprocess.run(exe + ["tobe", fx("journal.asis"), fx("journal.annot")],
                          capture_output=True, text=True, check=True).stdout
    path = Path(tmp_path / "piped.tobe")
    path.write_text(tobe)
    diff = subprocess.run(exe + ["diff", fx("journal.asis"), str(path)], capture_output=True, text=True)
    assert diff.returncode == 0 and len(diff.stdout.splitlines()) == 22
    missing = subprocess.run(exe + ["validate", str(tmp_path / "missing")], capture_output=True, text=True)
    assert missing.returncode == 2 and missing.stderr
