"""Design & implementation smell detectors."""

from collections import defaultdict

from iacsmells import shell
from iacsmells.analysis.engine import DESIGN, Detector
from iacsmells.parsers.base import TechnologyId
from iacsmells.repr import (
    AtomicUnit,
    SourceSpan,
    Text,
    Variable,
    atomic_unit_signature,
    traverse,
)


def _line_span(path, line_no, text):
    return SourceSpan(path, line_no, line_no, text)


class LongStatement(Detector):
    code = "design_long_statement"
    label = "Long statement"
    family = DESIGN
    reads = ("long_statement_max", "long_statement_inclusive")

    def is_long(self, length: int) -> bool:
        limit = self.config.long_statement_max
        if self.config.long_statement_inclusive:
            return length >= limit
        return length > limit

    def check_unit_block(self, node):
        if not node.is_file or not node.span.raw_code:
            return []
        out = []
        for offset, line in enumerate(node.span.raw_code.split("\n")):
            if self.is_long(len(line)):
                n = node.span.start_line + offset
                out.append(
                    self.smell(_line_span(node.span.path, n, line), f"line has {len(line)} characters")
                )
        return out


class AvoidComments(Detector):
    code = "design_avoid_comments"
    label = "Avoid comments"
    family = DESIGN

    def check_comment(self, node):
        return [self.smell(node.span, "comment")]


def _own_line_attributes(au: AtomicUnit):
    """(attribute, first source line) for attributes that start their own line."""
    out = []
    for attr in au.attributes:
        first = attr.span.raw_code.split("\n", 1)[0]
        if first.lstrip().startswith(attr.name) and attr.span.start_line > au.span.start_line:
            out.append((attr, first))
    return out


def _indent(line: str) -> str:
    return line[: len(line) - len(line.lstrip())]


class PuppetAlignment:
    """Arrows one space past the longest attribute name, equal indentation."""

    def __init__(self, gap: int):
        self.gap = gap

    def check(self, au):
        attrs = _own_line_attributes(au)
        if not attrs:
            return None
        width = max(len(a.name) for a, _ in attrs)
        indents = {_indent(line) for _, line in attrs}
        if len(indents) > 1:
            return "attributes are not equally indented"
        for attr, line in attrs:
            indent = len(_indent(line))
            after = indent + len(attr.name)
            arrow = min(
                (p for p in (line.find("=>", after), line.find("+>", after)) if p >= 0),
                default=-1,
            )
            if arrow != indent + width + self.gap:
                return f"arrow of '{attr.name}' is not aligned"
        return None


class IndentAlignment:
    """Attribute lines share one space-only indentation."""

    def check(self, au):
        attrs = _own_line_attributes(au)
        indents = {_indent(line) for _, line in attrs}
        if any("\t" in i for i in indents):
            return "tab used to indent an attribute"
        if len(indents) > 1:
            return "attributes are not equally indented"
        return None


class TabAlignment:
    """YAML enforces sibling indentation itself; only tabs can slip through."""

    def check(self, au):
        for attr, line in _own_line_attributes(au):
            if "\t" in _indent(line):
                return f"tab used to indent '{attr.name}'"
        return None


class ImproperAlignment(Detector):
    code = "design_improper_alignment"
    label = "Improper alignment"
    family = DESIGN
    reads = ("alignment_gap",)

    def __init__(self, tech, config=None):
        super().__init__(tech, config)
        if self.tech is TechnologyId.PUPPET:
            self.strategy = PuppetAlignment(self.config.alignment_gap)
        elif self.tech is TechnologyId.ANSIBLE:
            self.strategy = TabAlignment()
        else:
            self.strategy = IndentAlignment()

    def check_atomic_unit(self, node):
        problem = self.strategy.check(node)
        return [self.smell(node.span, problem)] if problem else []


class LongResource(Detector):
    code = "design_long_resource"
    label = "Long resource"
    family = DESIGN
    reads = ("long_resource_max_lines",)

    def check_atomic_unit(self, node):
        lines = node.span.end_line - node.span.start_line + 1
        if lines > self.config.long_resource_max_lines:
            return [self.smell(node.span, f"resource spans {lines} lines")]
        return []


class DuplicateBlock(Detector):
    """Equivalent atomic units (titles ignored) within one file."""

    code = "design_duplicate_block"
    label = "Duplicate block"
    family = DESIGN
    reads = ("duplicate_min_attrs",)

    def check_unit_block(self, node):
        if not node.is_file:
            return []
        groups = defaultdict(list)
        for au in traverse(node):
            if isinstance(au, AtomicUnit) and len(au.attributes) >= self.config.duplicate_min_attrs:
                groups[atomic_unit_signature(au, ignore_name=True)].append(au)
        out = []
        for members in groups.values():
            if len(members) < 2:
                continue
            lines = ", ".join(str(m.span.start_line) for m in members)
            for au in members:
                out.append(self.smell(au.span, f"duplicated at lines {lines}"))
        return out


class MisplacedAttribute(Detector):
    code = "design_misplaced_attribute"
    label = "Misplaced attribute"
    family = DESIGN
    reads = tuple(f"misplaced_order_{t.value}" for t in TechnologyId)

    def __init__(self, tech, config=None):
        super().__init__(tech, config)
        self.order = self.config.misplaced_order(self.tech)

    def check_atomic_unit(self, node):
        if not self.order:
            return []
        # listed names come first, in list order; everything else after
        last = len(self.order)
        ranks = [self.order.index(a.name) if a.name in self.order else last for a in node.attributes]
        for prev, cur, attr in zip(ranks, ranks[1:], node.attributes[1:]):
            if cur < prev:
                return [self.smell(node.span, f"'{attr.name}' should come earlier")]
        return []


def command_strings(au: AtomicUnit, names) -> list:
    """String values of command-bearing attributes, nested ones included.

    A top-level ``args`` attribute holds the arguments of the command named
    by the unit's type, so the type is put back in front.
    """
    out = []
    stack = [(a, True) for a in reversed(au.attributes)]
    while stack:
        attr, top = stack.pop()
        if attr.name in names and isinstance(attr.value, str):
            text = str(attr.value)
            if top and attr.name == "args":
                text = f"{au.type} {text}"
            out.append(text)
        stack.extend((n, False) for n in reversed(attr.nested))
    return out


class MultifacetedAbstraction(Detector):
    code = "design_multifaceted_abstraction"
    label = "Multifaceted abstraction"
    family = DESIGN
    reads = ("command_attributes",)

    def check_atomic_unit(self, node):
        for command in command_strings(node, self.config.command_attributes):
            count = shell.count_statements(command)
            if count > 1:
                return [self.smell(node.span, f"command runs {count} statements")]
        return []


class TooManyVariables(Detector):
    code = "design_too_many_variables"
    label = "Too many variables"
    family = DESIGN
    reads = ("too_many_vars_ratio",)

    def check_unit_block(self, node):
        if not node.is_file:
            return []
        declared = sum(1 for n in traverse(node) if isinstance(n, Variable))
        lines = sum(1 for line in node.span.raw_code.split("\n") if line.strip())
        if lines and declared / lines > self.config.too_many_vars_ratio:
            span = SourceSpan(node.span.path, node.span.start_line, node.span.start_line)
            return [self.smell(span, f"{declared} variables in {lines} lines")]
        return []


def _text_values(value):
    if isinstance(value, Text):
        yield value
    elif isinstance(value, list):
        for item in value:
            yield from _text_values(item)


class UnguardedVariable(Detector):
    code = "design_unguarded_variable"
    label = "Unguarded variable"
    family = DESIGN
    reads = ("unguarded_variable_techs",)

    def __init__(self, tech, config=None):
        super().__init__(tech, config)
        self.enabled = self.tech.value in self.config.unguarded_variable_techs

    def _check(self, node):
        if not self.enabled:
            return []
        out = []
        for text in _text_values(node.value):
            for marker in text.interpolations:
                if not marker.guarded:
                    out.append(self.smell(node.span, f"${marker.name} is not enclosed in braces"))
        return out

    def check_attribute(self, node):
        return self._check(node)

    def check_variable(self, node):
        return self._check(node)


DESIGN_DETECTORS = (
    AvoidComments,
    DuplicateBlock,
    ImproperAlignment,
    LongResource,
    LongStatement,
    MisplacedAttribute,
    MultifacetedAbstraction,
    TooManyVariables,
    UnguardedVariable,
)
