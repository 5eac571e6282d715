from __future__ import annotations

import enum
import logging
import os
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Optional

from iacsmells.repr import (
    AtomicUnit,
    Attribute,
    BlockKind,
    Module,
    Project,
    SourceFile,
    SourceSpan,
    UnitBlock,
)

log = logging.getLogger(__name__)


class TechnologyId(str, enum.Enum):
    ANSIBLE = "ansible"
    CHEF = "chef"
    DOCKER = "docker"
    PUPPET = "puppet"
    TERRAFORM = "terraform"


class ParseError(Exception):
    def __init__(self, message: str, line: Optional[int] = None):
        self.message = message
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)


@dataclass
class ParseOutcome:
    result: object
    warnings: list = field(default_factory=list)
    failed_files: list = field(default_factory=list)  # (path, reason) pairs


SCRIPT = "script"
MODULE_MEMBER = "module-member"


def add_attribute(au: AtomicUnit, attr: Attribute, warnings: list) -> None:
    """Append ``attr`` unless the name is taken; the first occurrence wins."""
    if au.attribute(attr.name) is not None:
        warnings.append(
            f"{attr.span.path}:{attr.span.start_line}: duplicate attribute "
            f"'{attr.name}' in {au.type} '{au.name}' ignored"
        )
        return
    au.attributes.append(attr)


class Parser(ABC):
    """Maps one IaC technology onto the intermediate representation.

    Subclasses implement :meth:`parse_source`, :meth:`matches` and
    :meth:`module_root`; file, folder and module handling is shared.
    """

    tech: TechnologyId

    @abstractmethod
    def parse_source(self, source: SourceFile, warnings: list) -> UnitBlock:
        """Lower one file. Raises ParseError on syntax errors."""

    @abstractmethod
    def matches(self, filename: str) -> bool:
        """Whether a file name belongs to this technology."""

    @abstractmethod
    def module_root(self, root: str, rel_parts: tuple) -> Optional[tuple]:
        """Leading path parts of the module owning the file, if any."""

    def empty_block(self, path: str) -> UnitBlock:
        return UnitBlock(
            os.path.basename(path), BlockKind.SCRIPT, SourceSpan(path, 1, 1, "")
        )

    def parse_file(self, path: str) -> ParseOutcome:
        source = SourceFile.read(path)
        outcome = ParseOutcome(self.empty_block(path))
        warnings = []
        try:
            outcome.result = self.parse_source(source, warnings)
        except ParseError as e:
            outcome.failed_files.append((path, str(e)))
        except RecursionError:
            outcome.failed_files.append((path, "nesting too deep"))
        else:
            outcome.warnings.extend(warnings)
        return outcome

    def discover(self, path: str) -> list:
        found = []
        for dirpath, dirnames, filenames in os.walk(path):
            dirnames.sort()
            for name in filenames:
                if not self.matches(name):
                    continue
                full = os.path.join(dirpath, name)
                rel = tuple(os.path.relpath(full, path).split(os.sep))
                role = MODULE_MEMBER if self.module_root(path, rel) else SCRIPT
                found.append((full, role))
        found.sort(key=lambda item: item[0])
        return found

    def _parse_many(self, files: list, outcome: ParseOutcome) -> list:
        blocks = []
        for file in files:
            sub = self.parse_file(file)
            outcome.warnings.extend(sub.warnings)
            if sub.failed_files:
                outcome.failed_files.extend(sub.failed_files)
            else:
                blocks.append(sub.result)
        return blocks

    def parse_module(self, path: str) -> ParseOutcome:
        _check_dir(path)
        module = Module(os.path.basename(os.path.normpath(path)), SourceSpan(path, 1, 1))
        outcome = ParseOutcome(module)
        files = [f for f, _ in self.discover(path)]
        if not files:
            outcome.warnings.append(f"{path}: no {self.tech.value} files found")
        module.unit_blocks = self._parse_many(files, outcome)
        return outcome

    def parse_folder(self, path: str) -> ParseOutcome:
        _check_dir(path)
        project = Project(os.path.basename(os.path.normpath(path)))
        outcome = ParseOutcome(project)
        loose = []
        grouped = {}
        for file, _ in self.discover(path):
            rel = tuple(os.path.relpath(file, path).split(os.sep))
            owner = self.module_root(path, rel)
            if owner is None:
                loose.append(file)
            else:
                grouped.setdefault(owner, []).append(file)

        names = [parts[-1] for parts in grouped]
        for parts in sorted(grouped):
            name = parts[-1] if names.count(parts[-1]) == 1 else "/".join(parts)
            mod_path = os.path.join(path, *parts)
            module = Module(name, SourceSpan(mod_path, 1, 1))
            module.unit_blocks = self._parse_many(grouped[parts], outcome)
            project.modules.append(module)
        project.unit_blocks = self._parse_many(loose, outcome)
        return outcome


def _check_dir(path: str) -> None:
    if not os.path.isdir(path):
        raise OSError(f"not a directory: {path}")
    if not os.access(path, os.R_OK | os.X_OK):
        raise PermissionError(f"cannot read directory: {path}")


def outermost(rel_parts: tuple, predicate) -> Optional[tuple]:
    """First (shallowest) proper directory prefix of ``rel_parts`` accepted by ``predicate``."""
    for i in range(1, len(rel_parts)):
        if predicate(rel_parts[:i]):
            return rel_parts[:i]
    return None


def assign_comments(root: UnitBlock, comments: list) -> None:
    """Attach each comment to the innermost unit block spanning its line."""

    def blocks(block, depth):
        yield depth, block
        for nested in block.nested_blocks:
            yield from blocks(nested, depth + 1)

    candidates = list(blocks(root, 0))
    for comment in comments:
        line = comment.span.start_line
        owner = root
        best = -1
        for depth, block in candidates:
            if block is root:
                continue
            if block.span.start_line <= line <= block.span.end_line and depth > best:
                owner, best = block, depth
        owner.comments.append(comment)
    for _, block in candidates:
        block.comments.sort(key=lambda c: c.span.start_line)
