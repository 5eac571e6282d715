"""Property suites, 1000 generated cases each."""

import csv
import io
import itertools
from collections import Counter
from fractions import Fraction

from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from conftest import parse
from strategies import (
    LITERALS,
    SCRIPTS,
    WORDS,
    any_script,
    atomic_units,
    attributes,
    count_nodes,
    projects,
    puppet_item_lists,
    puppet_resource,
    puppet_scripts,
)
from iacsmells.analysis import SMELLS, SmellReport, analyze, build_detectors, run
from iacsmells.analysis.engine import Smell
from iacsmells.config import AnalysisConfig, default_config_path, dump_config, load_config
from iacsmells.parsers import parse_text
from iacsmells.report import emit_csv, table_rows
from iacsmells.repr import (
    AtomicUnit,
    SourceSpan,
    UnitBlock,
    atomic_unit_equivalent,
    traverse,
)

LS = "design_long_statement"
CASES = settings(max_examples=1000, deadline=None, suppress_health_check=list(HealthCheck))
FAMILIES = ("design", "security")


def all_findings(block, tech, config=None):
    out = set()
    for family in FAMILIES:
        out |= {(s.path, s.line, s.code) for s in analyze(block, tech, family, config).findings}
    return out


def count(text, code, config=None, tech="puppet"):
    family = code.split("_", 1)[0]
    return sum(1 for s in analyze(parse(text, tech, "p"), tech, family, config).findings if s.code == code)


# ---------- ir-core ----------

@CASES
@given(projects)
def test_traversal_totality(project):
    nodes = traverse(project)
    assert len(nodes) == count_nodes(project)
    assert len({id(n) for n in nodes}) == len(nodes)
    assert nodes[0] is project


@CASES
@given(projects)
def test_traversal_determinism(project):
    assert [id(n) for n in traverse(project)] == [id(n) for n in traverse(project)]


@CASES
@given(any_script())
def test_span_soundness(tech_text):
    tech, text = tech_text
    lines = text.split("\n")
    block = parse_text(text, tech, "g")
    for node in traverse(block):
        span = getattr(node, "span", None)
        if span is not None and span.raw_code:
            assert "\n".join(lines[span.start_line - 1 : span.end_line]) == span.raw_code


@CASES
@given(any_script())
def test_source_order_within_collections(tech_text):
    tech, text = tech_text
    for node in traverse(parse_text(text, tech, "g")):
        if isinstance(node, UnitBlock):
            for coll in (node.atomic_units, node.variables, node.comments, node.attributes, node.nested_blocks):
                starts = [n.span.start_line for n in coll]
                assert starts == sorted(starts)


@st.composite
def populations(draw):
    units = draw(st.lists(atomic_units(), min_size=1, max_size=4))
    # equivalent twins: same attributes in another order
    for au in draw(st.lists(st.sampled_from(units), max_size=3)):
        units.append(AtomicUnit(au.name, au.type, au.span, list(reversed(au.attributes))))
    return draw(st.permutations(units))


@CASES
@given(populations())
def test_equivalence_relation(units):
    eq = atomic_unit_equivalent
    for a in units:
        assert eq(a, a)
    for a, b in itertools.product(units, repeat=2):
        assert eq(a, b) == eq(b, a)
    for a, b, c in itertools.product(units, repeat=3):
        if eq(a, b) and eq(b, c):
            assert eq(a, c)


# ---------- smell-engine ----------

@CASES
@given(any_script(), st.randoms(use_true_random=False))
def test_order_independence(tech_text, rnd):
    tech, text = tech_text
    block = parse_text(text, tech, "g")
    for family in FAMILIES:
        detectors = build_detectors(tech, family)
        shuffled = list(detectors)
        rnd.shuffle(shuffled)
        assert run(block, detectors).findings == run(block, shuffled).findings


@CASES
@given(any_script())
def test_exhaustiveness(tech_text):
    tech, text = tech_text
    block = parse_text(text, tech, "g")
    for family in FAMILIES:
        detectors = build_detectors(tech, family)
        union = set()
        for d in detectors:
            union |= {s.identity() for s in run(block, [d]).findings}
        assert {s.identity() for s in run(block, detectors).findings} == union


# accumulate over a whole file, so they are checked separately
NON_LOCAL = {"design_duplicate_block", "design_too_many_variables", "design_long_statement"}


@CASES
@given(puppet_item_lists(), st.data())
def test_node_locality(items, data):
    text = "\n".join(items) + "\n"
    block = parse(text, "puppet", "p")
    detectors = [d for f in FAMILIES for d in build_detectors("puppet", f) if d.code not in NON_LOCAL]
    before = run(block, detectors).findings
    owners = [
        (coll, node)
        for coll in (block.atomic_units, block.variables, block.comments, block.nested_blocks)
        for node in coll
    ]
    if not owners:
        return
    coll, node = data.draw(st.sampled_from(owners))
    coll.remove(node)
    after = run(block, detectors).findings
    expected = [s for s in before if not node.span.contains(s.span)]
    assert [s.identity() for s in after] == [s.identity() for s in expected]


@st.composite
def configs(draw):
    words = st.lists(st.sampled_from(WORDS + ("x1", "y-2")), min_size=1, max_size=4, unique=True)
    return AnalysisConfig().replace(
        long_statement_max=draw(st.integers(1, 500)),
        long_statement_inclusive=draw(st.booleans()),
        long_resource_max_lines=draw(st.integers(1, 100)),
        too_many_vars_ratio=draw(st.sampled_from((0.05, 0.25, 0.3, 0.5, 1.0))),
        duplicate_min_attrs=draw(st.integers(1, 9)),
        alignment_gap=draw(st.integers(1, 4)),
        misplaced_order_chef=tuple(draw(st.lists(st.sampled_from(WORDS), max_size=3, unique=True))),
        unguarded_variable_techs=tuple(draw(st.lists(st.sampled_from(sorted(SCRIPTS)), max_size=3, unique=True))),
        suspicious_comment_words=tuple(draw(words)),
        weak_crypto_terms=tuple(draw(words)),
        checksum_markers=tuple(draw(words)),
        insecure_url_scheme=draw(st.sampled_from(("http", "ftp"))),
    )


@CASES
@given(cfg=configs())
def test_config_round_trip(cfg, tmp_path_factory):
    path = tmp_path_factory.getbasetemp() / "round_trip.ini"
    path.write_text(dump_config(cfg))
    assert load_config(str(path)) == cfg


def test_config_identity():
    assert load_config(default_config_path()) == AnalysisConfig()


# ---------- design-smells ----------
# Boundary checks append the item under test to random context, so the two
# inputs differ only in that item and must differ by exactly one finding.

ATTR_NAMES = ("ensure", "mode", "owner", "group", "content", "source", "path", "require", "notify", "x")
attr_values = st.sampled_from(("1", "'a'", "true", "'/tmp/x'", "undef"))


def boundary(context, code, cfg, below, at):
    return count(context + at, code, cfg) - count(context + below, code, cfg)


@CASES
@given(puppet_scripts(max_items=3), st.integers(1, 200), st.booleans())
def test_boundary_long_statement(context, limit, inclusive):
    cfg = AnalysisConfig().replace(long_statement_max=limit, long_statement_inclusive=inclusive)
    first = limit if inclusive else limit + 1  # shortest line that fires
    assert boundary(context, LS, cfg, "#" * (first - 1) + "\n", "#" * first + "\n") == 1


@st.composite
def resource_bodies(draw, size):
    return [f"  a{i:03d} => {draw(attr_values)},\n" for i in range(size)]


@CASES
@given(puppet_scripts(max_items=3), st.integers(2, 100), st.data())
def test_boundary_long_resource(context, limit, data):
    cfg = AnalysisConfig().replace(long_resource_max_lines=limit)
    body = data.draw(resource_bodies(limit - 1))
    # a resource spans its body plus the opening and closing lines
    below = "notify { 'edge':\n" + "".join(body[:-1]) + "}\n"
    at = "notify { 'edge':\n" + "".join(body) + "}\n"
    assert boundary(context, "design_long_resource", cfg, below, at) == 1


@CASES
@given(st.integers(1, 100), st.integers(2, 60), st.randoms(use_true_random=False))
def test_boundary_too_many_variables(percent, lines, rnd):
    allowed = int(Fraction(percent, 100) * lines)  # largest V with V / lines <= ratio
    if allowed + 1 > lines:
        return
    cfg = AnalysisConfig().replace(too_many_vars_ratio=percent / 100)
    order = list(range(lines))
    rnd.shuffle(order)

    def script(v):
        declared = set(order[:v])
        return "".join(f"$v{i} = 1\n" if i in declared else f"notify {{ 'n{i}': }}\n" for i in range(lines))

    assert count(script(allowed), "design_too_many_variables", cfg) == 0
    assert count(script(allowed + 1), "design_too_many_variables", cfg) == 1


@CASES
@given(st.integers(1, 8), st.data())
def test_boundary_duplicate_min_attrs(minimum, data):
    cfg = AnalysisConfig().replace(duplicate_min_attrs=minimum)
    values = [data.draw(attr_values) for _ in range(minimum)]
    kind = data.draw(st.sampled_from(("exec", "file", "package")))

    def pair(n):
        body = "".join(f"  a{i} => {v},\n" for i, v in enumerate(values[:n]))
        return f"{kind} {{ 'one':\n{body}}}\n{kind} {{ 'two':\n{body}}}\n"

    # below the minimum no group exists; at the minimum one group of two members
    assert count(pair(minimum - 1), "design_duplicate_block", cfg) == 0
    assert count(pair(minimum), "design_duplicate_block", cfg) == 2


@CASES
@given(
    st.integers(1, 6),
    st.lists(st.sampled_from(ATTR_NAMES), min_size=2, max_size=6, unique=True),
    st.integers(1, 4),
    st.data(),
)
def test_boundary_alignment_gap(gap, names, indent, data):
    cfg = AnalysisConfig().replace(alignment_gap=gap)
    width = max(map(len, names))
    values = [data.draw(attr_values) for _ in names]

    def resource(g):
        body = "".join(f"{' ' * indent}{n.ljust(width + g)}=> {v},\n" for n, v in zip(names, values))
        return f"notify {{ 'x':\n{body}}}\n"

    assert count(resource(gap), "design_improper_alignment", cfg) == 0
    assert count(resource(gap + 1), "design_improper_alignment", cfg) == 1


BODIES = (
    {"command": "'/bin/true'", "path": "'/bin'"},
    {"command": "'/bin/false'", "path": "'/bin'"},
    {"ensure": "present", "mode": "'0644'", "owner": "'root'"},
)


@st.composite
def duplicate_scripts(draw):
    picks = draw(st.lists(st.sampled_from(range(len(BODIES))), min_size=1, max_size=6))
    return [draw(puppet_resource(f"t{i}", BODIES[b], "exec")) for i, b in enumerate(picks)], picks


def duplicate_titles(resources):
    text = "\n".join(resources) + "\n"
    block = parse(text, "puppet", "p")
    units = {au.span.start_line: au.name for au in block.atomic_units}
    return {units[s.line] for s in analyze(block, "puppet", "design").findings if s.code == "design_duplicate_block"}


@CASES
@given(duplicate_scripts())
def test_duplicate_symmetry(generated):
    resources, picks = generated
    titles = duplicate_titles(resources)
    expected = {f"t{i}" for i, b in enumerate(picks) if picks.count(b) > 1}
    assert titles == expected
    assert duplicate_titles(list(reversed(resources))) == titles


@CASES
@given(puppet_scripts(), st.integers(1, 300), st.integers(0, 100))
def test_long_statement_monotone(text, limit, raise_by):
    low = AnalysisConfig().replace(long_statement_max=limit)
    high = AnalysisConfig().replace(long_statement_max=limit + raise_by)
    assert count(text, "design_long_statement", high) <= count(text, "design_long_statement", low)


# ---------- security-smells ----------

LEXICONS = (
    "suspicious_comment_words",
    "secret_key_patterns",
    "password_patterns",
    "user_patterns",
    "weak_crypto_terms",
    "invalid_bind_addresses",
    "download_commands",
    "default_admin_names",
    "command_attributes",
    "unguarded_variable_techs",
)
EXTRA = WORDS + LITERALS[:-1] + ("apk", "echo", "make", "http", "o", "a")


@CASES
@given(any_script(), st.sampled_from(LEXICONS + ("checksum_markers",)), st.sampled_from(EXTRA + tuple(SCRIPTS)))
def test_lexicon_monotonicity(tech_text, key, extra):
    tech, text = tech_text
    if key == "unguarded_variable_techs":
        extra = tech
    elif not extra:
        return
    base = AnalysisConfig()
    grown = base.replace(**{key: getattr(base, key) + (extra,)})
    block = parse_text(text, tech, "g")
    before, after = all_findings(block, tech, base), all_findings(block, tech, grown)
    if key == "checksum_markers":
        # markers suppress findings, so this list can only take smells away
        assert after <= before
    else:
        assert before <= after


@CASES
@given(attributes())
def test_interpolation_shield(attr):
    from iacsmells.analysis.security import HardcodedSecret
    from iacsmells.repr import Text

    hit = HardcodedSecret("puppet").visit(attr)
    if isinstance(attr.value, Text) and attr.value.interpolations:
        assert hit == []


@CASES
@given(attributes())
def test_value_rules_are_independent(attr):
    detectors = build_detectors("puppet", "security")
    together = {s.code for s in run(attr, detectors).findings}
    assert together == {s.code for d in detectors for s in run(attr, [d]).findings}


# ---------- cli-report ----------

@st.composite
def reports(draw):
    codes = sorted(SMELLS)
    smells = [
        Smell(code, SMELLS[code], SourceSpan(draw(st.sampled_from(("a.pp", "b,c.pp", 'd"e.pp'))), line, line))
        for code, line in draw(st.lists(st.tuples(st.sampled_from(codes), st.integers(1, 20)), max_size=12))
    ]
    return SmellReport(sorted(smells, key=Smell.sort_key), ["a.pp"])


@CASES
@given(reports())
def test_stats_consistency(report):
    rows = list(csv.DictReader(io.StringIO(emit_csv(report))))
    by_code = Counter(r["smell_code"] for r in rows)
    files_by_code = {}
    for r in rows:
        files_by_code.setdefault(r["smell_code"], set()).add(r["path"])
    for family in FAMILIES:
        for label, code, occurrences, files in table_rows(report, family):
            assert label == SMELLS[code]
            assert occurrences == by_code.get(code, 0)
            assert files == len(files_by_code.get(code, ()))
