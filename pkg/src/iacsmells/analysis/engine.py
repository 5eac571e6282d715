from __future__ import annotations

from collections import Counter, defaultdict
from dataclasses import dataclass, field

from iacsmells.config import AnalysisConfig
from iacsmells.parsers.base import TechnologyId
from iacsmells.repr import (
    AtomicUnit,
    Attribute,
    Comment,
    Module,
    Project,
    SourceSpan,
    UnitBlock,
    Variable,
    file_blocks,
    traverse,
)

DESIGN = "design"
SECURITY = "security"


@dataclass(frozen=True)
class Smell:
    code: str
    label: str
    span: SourceSpan
    detail: str = ""

    @property
    def path(self) -> str:
        return self.span.path

    @property
    def line(self) -> int:
        return self.span.start_line

    def sort_key(self):
        return (self.span.path, self.span.start_line, self.code)

    def identity(self):
        return (self.code, self.span.path, self.span.start_line, self.span.end_line)


@dataclass
class SmellReport:
    findings: list = field(default_factory=list)
    files_analyzed: list = field(default_factory=list)
    files_failed: list = field(default_factory=list)  # (path, reason)

    def counts_by_code(self) -> Counter:
        return Counter(s.code for s in self.findings)

    def files_by_code(self) -> dict:
        files = defaultdict(set)
        for s in self.findings:
            files[s.code].add(s.path)
        return dict(files)

    def counts_by_file(self) -> Counter:
        return Counter(s.path for s in self.findings)


class Detector:
    """Base class for smell detectors.

    The engine calls :meth:`visit` once per IR node; subclasses override the
    ``check_*`` hook for the node kinds they care about and return the smells
    found on that node only. Behaviour that differs per technology is chosen
    once, in ``__init__``.
    """

    code: str = ""
    label: str = ""
    family: str = ""
    reads: tuple = ()

    def __init__(self, tech, config: AnalysisConfig = None):
        self.tech = TechnologyId(tech)
        self.config = config or AnalysisConfig()

    def smell(self, span: SourceSpan, detail: str = "") -> Smell:
        return Smell(self.code, self.label, span, detail)

    def visit(self, node) -> list:
        if isinstance(node, AtomicUnit):
            return self.check_atomic_unit(node)
        if isinstance(node, Attribute):
            return self.check_attribute(node)
        if isinstance(node, Variable):
            return self.check_variable(node)
        if isinstance(node, Comment):
            return self.check_comment(node)
        if isinstance(node, UnitBlock):
            return self.check_unit_block(node)
        if isinstance(node, Module):
            return self.check_module(node)
        if isinstance(node, Project):
            return self.check_project(node)
        raise TypeError(f"not an IR node: {type(node).__name__}")

    def check_project(self, node: Project) -> list:
        return []

    def check_module(self, node: Module) -> list:
        return []

    def check_unit_block(self, node: UnitBlock) -> list:
        return []

    def check_atomic_unit(self, node: AtomicUnit) -> list:
        return []

    def check_attribute(self, node: Attribute) -> list:
        return []

    def check_variable(self, node: Variable) -> list:
        return []

    def check_comment(self, node: Comment) -> list:
        return []

    def __repr__(self):
        return f"{type(self).__name__}({self.tech.value})"


def visit(detector: Detector, node) -> list:
    return detector.visit(node)


def finalize(smells) -> list:
    """Collapse identical findings and order by (path, line, code)."""
    unique = {}
    for s in smells:
        unique.setdefault(s.identity(), s)
    return sorted(unique.values(), key=lambda s: (s.sort_key(), s.span.end_line, s.detail))


def run(root, detectors) -> SmellReport:
    """Apply every detector to every node of ``root`` in depth-first order."""
    found = []
    for node in traverse(root):
        for detector in detectors:
            found.extend(detector.visit(node))
    files = sorted({b.span.path for b in file_blocks(root)})
    return SmellReport(finalize(found), files)
