"""Technology-agnostic intermediate representation of IaC scripts.

Every parser lowers its technology into the node classes defined here:
``Project`` > ``Module`` > ``UnitBlock`` > ``AtomicUnit`` > ``Attribute``,
with ``Variable`` and ``Comment`` hanging off unit blocks.
"""

from __future__ import annotations

import enum
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterator, Mapping, Optional, Union


@dataclass(frozen=True)
class SourceSpan:
    path: str
    start_line: int
    end_line: int
    raw_code: str = ""

    def __post_init__(self):
        if self.start_line < 1 or self.end_line < self.start_line:
            raise ValueError(
                f"invalid span {self.start_line}-{self.end_line} in {self.path}"
            )

    def contains(self, other: "SourceSpan") -> bool:
        return (
            self.path == other.path
            and self.start_line <= other.start_line
            and other.end_line <= self.end_line
        )


class SourceFile:
    """LF-normalized source text with helpers to cut spans out of it."""

    def __init__(self, path: str, text: str):
        self.path = path
        self.text = normalize_newlines(text)
        lines = self.text.split("\n")
        if self.text.endswith("\n"):
            lines.pop()
        self.lines = lines if self.text else []

    @classmethod
    def read(cls, path: str) -> "SourceFile":
        with open(path, "rb") as f:
            data = f.read()
        return cls(path, data.decode("utf-8", errors="replace"))

    @property
    def line_count(self) -> int:
        return len(self.lines)

    def span(self, start_line: int, end_line: Optional[int] = None) -> SourceSpan:
        if end_line is None:
            end_line = start_line
        start_line = max(1, start_line)
        end_line = max(start_line, end_line)
        raw = "\n".join(self.lines[start_line - 1 : end_line])
        return SourceSpan(self.path, start_line, end_line, raw)

    def whole(self) -> SourceSpan:
        return self.span(1, max(1, self.line_count))


def normalize_newlines(text: str) -> str:
    return text.replace("\r\n", "\n").replace("\r", "\n")


@dataclass(frozen=True)
class Interpolation:
    """A variable reference inside a string, as offsets into the string."""

    start: int
    end: int
    name: str
    guarded: bool = True


class Text(str):
    """String value carrying interpolation markers.

    ``expr`` is set when the text is a raw, unevaluated expression (a function
    call, a hash, a variable reference...) rather than a literal.
    """

    interpolations: tuple
    expr: bool

    def __new__(cls, value="", interpolations=(), expr=False):
        obj = super().__new__(cls, value)
        markers = tuple(interpolations)
        for m in markers:
            if not (0 <= m.start < m.end <= len(obj)):
                raise ValueError(f"interpolation {m} out of bounds for {value!r}")
        obj.interpolations = markers
        obj.expr = expr
        return obj

    def __reduce__(self):
        return (Text, (str(self), self.interpolations, self.expr))

    def __repr__(self):
        flags = ""
        if self.interpolations:
            flags += f", {len(self.interpolations)} interp"
        if self.expr:
            flags += ", expr"
        return f"Text({str.__repr__(self)}{flags})"


Value = Union[None, bool, int, float, str, list]


class BlockKind(str, enum.Enum):
    SCRIPT = "script"
    BLOCK = "block"
    BUILD_STAGE = "build-stage"
    CLASS_LIKE = "class-like"


@dataclass(eq=False)
class Comment:
    text: str
    span: SourceSpan


@dataclass(eq=False)
class Attribute:
    name: str
    value: Value
    span: SourceSpan
    nested: list = field(default_factory=list)


@dataclass(eq=False)
class Variable:
    name: str
    value: Value
    span: SourceSpan
    nested: list = field(default_factory=list)


@dataclass(eq=False)
class AtomicUnit:
    name: str
    type: str
    span: SourceSpan
    attributes: list = field(default_factory=list)

    def attribute(self, name: str) -> Optional[Attribute]:
        for a in self.attributes:
            if a.name == name:
                return a
        return None


@dataclass(eq=False)
class UnitBlock:
    name: str
    kind: BlockKind
    span: SourceSpan
    atomic_units: list = field(default_factory=list)
    variables: list = field(default_factory=list)
    comments: list = field(default_factory=list)
    attributes: list = field(default_factory=list)
    nested_blocks: list = field(default_factory=list)
    # case-like blocks only: whether a default branch exists
    default_branch: Optional[bool] = None

    @property
    def is_file(self) -> bool:
        return self.kind is BlockKind.SCRIPT


@dataclass(eq=False)
class Module:
    name: str
    span: SourceSpan
    unit_blocks: list = field(default_factory=list)


@dataclass(eq=False)
class Project:
    name: str
    modules: list = field(default_factory=list)
    unit_blocks: list = field(default_factory=list)


IRNode = Union[Project, Module, UnitBlock, AtomicUnit, Attribute, Variable, Comment]


def children(node) -> Iterator:
    """Direct children of ``node`` in fixed field order."""
    if isinstance(node, Project):
        yield from node.modules
        yield from node.unit_blocks
    elif isinstance(node, Module):
        yield from node.unit_blocks
    elif isinstance(node, UnitBlock):
        yield from node.atomic_units
        yield from node.variables
        yield from node.comments
        yield from node.attributes
        yield from node.nested_blocks
    elif isinstance(node, AtomicUnit):
        yield from node.attributes
    elif isinstance(node, (Attribute, Variable)):
        yield from node.nested


def traverse(root) -> list:
    """Pre-order depth-first walk of the IR rooted at ``root``."""
    out = []
    stack = [root]
    while stack:
        node = stack.pop()
        out.append(node)
        stack.extend(reversed(list(children(node))))
    return out


def file_blocks(root) -> list:
    """File-level unit blocks reachable from ``root``."""
    return [n for n in traverse(root) if isinstance(n, UnitBlock) and n.is_file]


def _normalize_value(value):
    if isinstance(value, bool):
        return ("bool", value)
    if isinstance(value, (int, float)):
        return ("num", value)
    if isinstance(value, str):
        return ("str", " ".join(value.split()))
    if isinstance(value, list):
        return ("list", tuple(_normalize_value(v) for v in value))
    return ("null", None)


def _canonical_names(name_map: Optional[Mapping[str, str]]):
    pairs = {}
    for a, b in (name_map or {}).items():
        rep = min(a, b)
        pairs[a] = rep
        pairs[b] = rep
    return lambda n: pairs.get(n, n)


def _attr_key(attr, canon):
    return (
        canon(attr.name),
        _normalize_value(attr.value),
        tuple(sorted((_attr_key(n, canon) for n in attr.nested), key=repr)),
    )


def atomic_unit_signature(au: AtomicUnit, ignore_name=False, name_map=None):
    canon = _canonical_names(name_map)
    attrs = Counter(_attr_key(a, canon) for a in au.attributes)
    key = (canon(au.type), tuple(sorted(attrs.items(), key=repr)))
    if not ignore_name:
        key += (au.name,)
    return key


def atomic_unit_equivalent(
    a: AtomicUnit,
    b: AtomicUnit,
    ignore_name: bool = False,
    name_map: Optional[Mapping[str, str]] = None,
) -> bool:
    """Compare two atomic units structurally.

    ``name_map`` pairs up type and attribute names that mean the same thing
    in different technologies (e.g. ``{"exec": "execute"}``); it is applied
    in both directions. String values are compared with whitespace runs
    collapsed.
    """
    return atomic_unit_signature(a, ignore_name, name_map) == atomic_unit_signature(
        b, ignore_name, name_map
    )


def dump(node, indent: int = 0) -> str:
    """Render the IR as an indented tree, one node per line."""
    lines = []

    def label(n):
        kind = type(n).__name__
        if isinstance(n, Project):
            return f"{kind} {n.name!r}"
        if isinstance(n, UnitBlock):
            return f"{kind}[{n.kind.value}] {n.name!r} {_fmt_span(n.span)}"
        if isinstance(n, AtomicUnit):
            return f"{kind} {n.type} {n.name!r} {_fmt_span(n.span)}"
        if isinstance(n, (Attribute, Variable)):
            return f"{kind} {n.name} = {n.value!r} {_fmt_span(n.span)}"
        if isinstance(n, Comment):
            return f"{kind} {n.text!r} {_fmt_span(n.span)}"
        return f"{kind} {n.name!r} {_fmt_span(n.span)}"

    def walk(n, depth):
        lines.append("  " * depth + label(n))
        for c in children(n):
            walk(c, depth + 1)

    walk(node, indent)
    return "\n".join(lines)


def _fmt_span(span: SourceSpan) -> str:
    if span.start_line == span.end_line:
        return f"{span.path}:{span.start_line}"
    return f"{span.path}:{span.start_line}-{span.end_line}"
