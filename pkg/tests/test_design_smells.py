import itertools

import pytest

from conftest import findings, parse
from iacsmells.analysis import analyze
from iacsmells.config import AnalysisConfig, load_config
from iacsmells.parsers import parse_folder
from iacsmells.repr import AtomicUnit, atomic_unit_equivalent, traverse


def design(text, tech="puppet", config=None):
    return findings(text, tech, "design", config)


def only(code, text, tech="puppet", config=None):
    return [line for line, c in design(text, tech, config) if c == code]


LS = "design_long_statement"


def comment_line(n):
    return "#" + "x" * (n - 1)


class TestLongStatement:
    def test_exactly_at_limit(self):
        text = comment_line(140) + "\n"
        inclusive = AnalysisConfig().replace(long_statement_inclusive=True)
        assert only(LS, text, config=inclusive) == [1]
        assert only(LS, text) == []

    def test_one_over_and_one_under(self):
        assert only(LS, comment_line(141) + "\n") == [1]
        for inclusive in (True, False):
            cfg = AnalysisConfig().replace(long_statement_inclusive=inclusive)
            assert only(LS, comment_line(139) + "\n", config=cfg) == []

    def test_reports_each_long_line(self):
        text = "\n".join([comment_line(150), "", comment_line(20), comment_line(141)]) + "\n"
        assert only(LS, text) == [1, 4]

    def test_config_file_threshold(self, tmp_path):
        ini = tmp_path / "c.ini"
        ini.write_text("[smells]\nlong_statement_max = 100\n")
        cfg = load_config(str(ini))
        assert only(LS, comment_line(101) + "\n", config=cfg) == [1]
        assert only(LS, comment_line(100) + "\n", config=cfg) == []


class TestAvoidComments:
    def test_none(self):
        assert only("design_avoid_comments", "notify { 'x': }\n") == []

    def test_three(self):
        text = "# a\nnotify { 'x': } # b\n# c\n"
        assert only("design_avoid_comments", text) == [1, 2, 3]


AL = "design_improper_alignment"


class TestAlignment:
    def test_aligned(self):
        text = """
            file { '/tmp/x':
              ensure  => file,
              mode    => '0644',
              content => 'x',
            }
            """
        assert only(AL, text) == []

    def test_arrow_two_spaces_past_longest(self):
        text = """
            file { '/tmp/x':
              ensure   => file,
              mode     => '0644',
              content  => 'x',
            }
            """
        assert only(AL, text) == [1]

    def test_uneven_indentation(self):
        text = "file { '/tmp/x':\n  ensure => file,\n   mode   => '0644',\n}\n"
        assert only(AL, text) == [1]

    def test_configurable_gap(self):
        text = "file { '/tmp/x':\n  ensure   => file,\n  mode     => '0644',\n}\n"
        assert only(AL, text, config=AnalysisConfig().replace(alignment_gap=3)) == []

    def test_single_line_resource_is_not_checked(self):
        assert only(AL, "file { '/tmp/x': ensure => file, mode => '0644' }\n") == []

    def test_hash_contents_are_not_checked(self):
        text = """
            class { 'app':
              config => {
                'a' => 1,
                'long_key' => 2,
              },
              ensure => present,
            }
            """
        assert only(AL, text) == []

    def test_ansible_tab(self):
        text = "- name: tabbed\n  file: {path: /tmp/x,\n\tstate: touch}\n"
        assert only(AL, text, "ansible") == [1]
        assert only(AL, "- name: ok\n  file:\n    path: /tmp/x\n    state: touch\n", "ansible") == []

    def test_chef_and_terraform_indentation(self):
        assert only(AL, "service 'a' do\n  action :start\n    retries 3\nend\n", "chef") == [1]
        assert only(AL, "service 'a' do\n  action :start\n  retries 3\nend\n", "chef") == []
        assert only(AL, 'resource "a" "b" {\n  x = 1\n\ty = 2\n}\n', "terraform") == [1]


LR = "design_long_resource"


def resource(lines):
    body = "".join(f"  a{i:02d} => {i},\n" for i in range(lines - 2))
    return "notify { 'x':\n" + body + "}\n"


class TestLongResource:
    def test_thirteen_lines(self):
        assert only(LR, resource(13)) == [1]

    def test_twelve_lines(self):
        assert only(LR, resource(12)) == []

    def test_threshold_from_config(self):
        cfg = AnalysisConfig().replace(long_resource_max_lines=5)
        assert only(LR, resource(6), config=cfg) == [1]
        assert only(LR, resource(5), config=cfg) == []


DUP = "design_duplicate_block"


def brute_force_duplicates(block, min_attrs=2):
    units = [n for n in traverse(block) if isinstance(n, AtomicUnit) and len(n.attributes) >= min_attrs]
    lines = set()
    for a, b in itertools.combinations(units, 2):
        if atomic_unit_equivalent(a, b, ignore_name=True):
            lines.update((a.span.start_line, b.span.start_line))
    return sorted(lines)


class TestDuplicateBlock:
    TWO = """
        exec { 'one':
          command => '/bin/true',
          path    => '/bin',
        }
        exec { 'two':
          command => '/bin/true',
          path    => '/bin',
        }
        exec { 'three':
          command => '/bin/false',
          path    => '/bin',
        }
        """

    def test_identical_resources_with_different_titles(self):
        assert only(DUP, self.TWO) == [1, 5]
        assert only(DUP, self.TWO) == brute_force_duplicates(parse(self.TWO, "puppet"))

    def test_single_resource(self):
        assert only(DUP, "exec { 'one':\n  command => 'x',\n  path    => '/bin',\n}\n") == []

    def test_below_minimum_attributes(self):
        text = "package { 'a':\n  ensure => present,\n}\npackage { 'b':\n  ensure => present,\n}\n"
        assert only(DUP, text) == []
        assert only(DUP, text, config=AnalysisConfig().replace(duplicate_min_attrs=1)) == [1, 4]

    def test_scope_is_one_file(self, write):
        unit = "exec { 'x':\n  command => '/bin/true',\n  path    => '/bin',\n}\n"
        root = write({"a.pp": unit, "b.pp": unit})
        report = analyze(parse_folder(str(root), "puppet").result, "puppet", "design")
        assert [s for s in report.findings if s.code == DUP] == []

    def test_duplicates_inside_nested_blocks(self):
        text = """
            class a {
              exec { 'x':
                command => '/bin/true',
                path    => '/bin',
              }
            }
            exec { 'y':
              command => '/bin/true',
              path    => '/bin',
            }
            """
        assert only(DUP, text) == [2, 7]


MIS = "design_misplaced_attribute"


class TestMisplacedAttribute:
    def test_ensure_first(self):
        assert only(MIS, "file { 'x':\n  ensure => file,\n  mode   => '0644',\n}\n") == []

    def test_ensure_second(self):
        assert only(MIS, "file { 'x':\n  mode   => '0644',\n  ensure => file,\n}\n") == [1]

    def test_no_ensure(self):
        assert only(MIS, "file { 'x':\n  mode  => '0644',\n  owner => 'a',\n}\n") == []

    def test_other_technologies_off_by_default(self):
        assert only(MIS, "file '/x' do\n  mode '1'\n  action :create\nend\n", "chef") == []

    def test_configured_order(self):
        cfg = AnalysisConfig().replace(misplaced_order_chef=("action", "mode"))
        assert only(MIS, "file '/x' do\n  mode '1'\n  action :create\nend\n", "chef", cfg) == [1]
        assert only(MIS, "file '/x' do\n  action :create\n  mode '1'\nend\n", "chef", cfg) == []


MF = "design_multifaceted_abstraction"


class TestMultifaceted:
    def test_pipe_counts(self):
        text = "exec { 'x':\n  command => \"mysql -e 'x' | grep y\",\n}\n"
        assert only(MF, text) == [1]

    def test_single_command(self):
        assert only(MF, "exec { 'x':\n  command => '/usr/bin/make',\n}\n") == []

    def test_continuation_line(self):
        text = "exec { 'x':\n  command => \"service app stop \\\n    && restart\",\n}\n"
        assert only(MF, text) == [1]

    def test_separator_inside_quotes(self):
        assert only(MF, "exec { 'x':\n  command => \"echo 'a && b'\",\n}\n") == []

    def test_docker_statements_are_already_split(self):
        assert only(MF, "FROM alpine\nRUN apk update && apk add git\n", "docker") == []
        assert only(MF, "FROM alpine\nRUN curl -s x | sh\n", "docker") == [2]


TMV = "design_too_many_variables"


class TestTooManyVariables:
    @staticmethod
    def script(declared, lines):
        decl = [f"$v{i} = {i}" for i in range(declared)]
        rest = [f"notify {{ 'n{i}': }}" for i in range(lines - declared)]
        return "\n\n".join(decl + rest) + "\n"

    def test_over_ratio(self):
        assert only(TMV, self.script(4, 10)) == [1]

    def test_at_ratio(self):
        assert only(TMV, self.script(3, 10)) == []

    def test_references_do_not_count(self):
        lines = [f"notify {{ 'n{i}': message => $greeting }}" for i in range(50)]
        assert only(TMV, "\n".join(lines) + "\n") == []

    def test_nested_variables_count(self):
        text = "- hosts: all\n  vars:\n    db:\n      host: h\n      port: 1\n  tasks: []\n"
        # db + host + port = 3 declarations over 6 lines
        assert only(TMV, text, "ansible") == [1]

    def test_empty_file(self):
        assert only(TMV, "") == []


UV = "design_unguarded_variable"


class TestUnguardedVariable:
    def test_bare_reference(self):
        assert only(UV, "notify { 'x':\n  message => \"Hello $user\",\n}\n") == [2]

    def test_braced_reference(self):
        assert only(UV, "notify { 'x':\n  message => \"Hello ${user}\",\n}\n") == []

    def test_single_quotes(self):
        assert only(UV, "notify { 'x':\n  message => 'costs $5',\n}\n") == []

    def test_in_variable_and_list(self):
        assert only(UV, '$a = "x $y"\n$b = ["$c", "d"]\n') == [1, 2]

    def test_off_for_other_technologies_unless_enabled(self):
        text = "FROM alpine\nRUN echo $HOME\n"
        assert only(UV, text, "docker") == []
        cfg = AnalysisConfig().replace(unguarded_variable_techs=("puppet", "docker"))
        assert only(UV, text, "docker", cfg) == [2]


@pytest.mark.parametrize("tech", ["ansible", "chef", "docker", "puppet", "terraform"])
def test_empty_input_has_no_design_smells(tech):
    assert design("", tech) == []
