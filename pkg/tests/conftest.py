import csv
import os
import textwrap

import pytest

from iacsmells.analysis import analyze
from iacsmells.parsers import parse_file, parse_text

HERE = os.path.dirname(__file__)
CORPUS = os.path.join(HERE, "corpus")
TECHS = ("ansible", "chef", "docker", "puppet", "terraform")

HIVE_PUPPET = """\
# Hive metastore MySQL database need a (...)
exec { 'hive_mysql_create_database':
  command => "/usr/bin/mysql (...)",
  unless => "/usr/bin/mysql (...)",
  user => 'root',
}
"""

HIVE_CHEF = """\
# Hive metastore MySQL database need a (...)
execute 'hive_mysql_create_database' do
    command "/usr/bin/mysql (...)"
    not_if "/usr/bin/mysql (...)"
    user 'root'
end
"""

# a real-world 140-character comment line from a Foreman manifest
FOREMAN_LINE = (
    "# $unattended_url::               URL hosts will retrieve templates from during "
    "build (normally http as many installers don't support https)"
)


def dedent(text: str) -> str:
    return textwrap.dedent(text).lstrip("\n")


def parse(text, tech, path="<string>"):
    return parse_text(dedent(text), tech, path)


def findings(text, tech, family, config=None, path="f"):
    report = analyze(parse(text, tech, path), tech, family, config)
    return [(s.line, s.code) for s in report.findings]


def codes(text, tech, family, config=None):
    return sorted({code for _, code in findings(text, tech, family, config)})


def corpus_labels():
    with open(os.path.join(CORPUS, "labels.csv"), newline="") as f:
        return {(r["file"], int(r["line"]), r["smell_code"]) for r in csv.DictReader(f)}


def corpus_files():
    out = []
    for tech in TECHS:
        folder = os.path.join(CORPUS, tech)
        for name in sorted(os.listdir(folder)):
            out.append((tech, f"{tech}/{name}"))
    return out


def corpus_findings(config=None):
    """Run both families over every corpus file; returns {(file, line, code)} and failures."""
    got, failed = set(), []
    for tech, rel in corpus_files():
        outcome = parse_file(os.path.join(CORPUS, rel), tech)
        failed.extend(outcome.failed_files)
        for family in ("design", "security"):
            for s in analyze(outcome.result, tech, family, config).findings:
                got.add((rel, s.line, s.code))
    return got, failed


@pytest.fixture
def write(tmp_path):
    """Write ``{relative path: text}`` under tmp_path and return the root."""

    def _write(files):
        for rel, text in files.items():
            full = tmp_path / rel
            full.parent.mkdir(parents=True, exist_ok=True)
            full.write_text(dedent(text) if text else "")
        return tmp_path

    return _write


# one line per acceptance criterion, echoed at the end of the session
ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE):
            terminalreporter.write_line(line)
