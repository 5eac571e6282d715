import os
import subprocess
import sys

import pytest

from conftest import HIVE_PUPPET, HERE
from iacsmells.cli import EXIT_FATAL, EXIT_OK, EXIT_PARSE_FAILED, main


@pytest.fixture
def hive(write, monkeypatch):
    root = write({"hive.pp": HIVE_PUPPET})
    monkeypatch.chdir(root)
    return root


def test_golden_csv(hive, capsys):
    assert main(["hive.pp", "--tech", "puppet", "--csv"]) == EXIT_OK
    with open(os.path.join(HERE, "golden", "hive_security.csv")) as f:
        assert capsys.readouterr().out == f.read()


def test_design_family(hive, capsys):
    assert main(["hive.pp", "--tech", "puppet", "--smells", "design", "--csv"]) == EXIT_OK
    rows = capsys.readouterr().out.splitlines()[1:]
    assert rows == [
        "hive.pp,1,design_avoid_comments,Avoid comments",
        "hive.pp,2,design_improper_alignment,Improper alignment",
    ]


def test_nonexistent_path(tmp_path, capsys):
    assert main([str(tmp_path / "nope"), "--tech", "puppet"]) == EXIT_FATAL
    captured = capsys.readouterr()
    assert "nope" in captured.err and captured.out == ""


def test_bad_config(hive, capsys):
    (hive / "c.ini").write_text("[smells]\nlong_statement_max = -3\n")
    assert main(["hive.pp", "--tech", "puppet", "--config", "c.ini"]) == EXIT_FATAL
    assert "long_statement_max" in capsys.readouterr().err


def test_missing_tech_is_usage_error(hive, capsys):
    assert main(["hive.pp"]) == EXIT_FATAL
    assert "--tech" in capsys.readouterr().err


def test_unknown_tech(hive, capsys):
    assert main(["hive.pp", "--tech", "salt"]) == EXIT_FATAL


def test_partial_parse(write, monkeypatch, capsys):
    root = write({"good.pp": HIVE_PUPPET, "bad.pp": "exec { 'x':\n"})
    monkeypatch.chdir(root)
    assert main([".", "--tech", "puppet", "--csv"]) == EXIT_PARSE_FAILED
    captured = capsys.readouterr()
    assert "bad.pp" in captured.err
    assert {line.split(",")[0] for line in captured.out.splitlines()[1:]} == {os.path.join(".", "good.pp")}


def test_module_flag(write, monkeypatch, capsys):
    root = write({"ntp/manifests/init.pp": "class ntp {\n  # note\n}\n"})
    monkeypatch.chdir(root)
    assert main(["ntp", "--tech", "puppet", "--module", "--smells", "design", "--csv"]) == EXIT_OK
    assert capsys.readouterr().out.splitlines()[1:] == [
        f"{os.path.join('ntp', 'manifests', 'init.pp')},2,design_avoid_comments,Avoid comments"
    ]


def test_tables(hive, capsys):
    assert main(["hive.pp", "--tech", "puppet"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "security_hardcoded_secret" in out and "Files analyzed" in out
    assert main(["hive.pp", "--tech", "puppet", "--tableformat", "latex"]) == EXIT_OK
    assert "\\begin{tabular}" in capsys.readouterr().out


def test_csv_wins_over_tableformat(hive, capsys):
    assert main(["hive.pp", "--tech", "puppet", "--tableformat", "latex", "--csv"]) == EXIT_OK
    assert capsys.readouterr().out.startswith("path,line,smell_code,smell_label\n")


def test_verbose_prints_warnings(tmp_path, capsys):
    assert main([str(tmp_path), "--tech", "puppet", "--module", "-v"]) == EXIT_OK
    assert "warning:" in capsys.readouterr().err


def test_module_entry_point(hive):
    proc = subprocess.run(
        [sys.executable, "-m", "iacsmells", "hive.pp", "--tech", "puppet", "--csv"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == EXIT_OK
    assert proc.stdout.count("\n") == 3
    missing = subprocess.run([sys.executable, "-m", "iacsmells", "nope.pp", "--tech", "puppet"], capture_output=True)
    assert missing.returncode == EXIT_FATAL and missing.stderr
