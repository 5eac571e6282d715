"""Chef recipes in a restricted grammar.

Only the resource idiom is modelled::

    TYPE 'NAME' do
      attribute value
    end

plus simple assignments and comments. Any other Ruby is skipped with a
warning; conditionals and nested blocks inside a resource are skipped.
"""

import os
import re

from iacsmells.parsers.base import (
    ParseError,
    Parser,
    TechnologyId,
    add_attribute,
    assign_comments,
    outermost,
)
from iacsmells.repr import (
    AtomicUnit,
    Attribute,
    BlockKind,
    Comment,
    Interpolation,
    SourceFile,
    Text,
    UnitBlock,
    Variable,
)

_HEREDOC = re.compile(r"<<([-~]?)(['\"]?)([A-Za-z_]\w*)\2")
_PLACEHOLDER = re.compile(r"\x00(\d+)\x00")
_RESOURCE = re.compile(r"^([a-z_]\w*)\s*(?:\(\s*(.+?)\s*\)|\s(.+?))\s+do(?:\s*\|[^|]*\|)?$")
_BARE_RESOURCE = re.compile(r"^([a-z_]\w*)\s*(?:\(\s*(['\"].*['\"])\s*\)|\s+(['\"].*['\"]))$")
_ASSIGN = re.compile(
    r"^((?:node\.)?(?:default|override|normal|set|force_default|force_override)"
    r"(?:\[[^\]]+\])+|[a-z_]\w*)\s*=(?!=)\s*(.+)$",
    re.S,
)
_ATTRIBUTE = re.compile(r"^([a-z_]\w*[?!]?)(?:\s*\((.*)\)|\s+(.*))?$", re.S)
_OPENERS = re.compile(r"^(if|unless|case|while|until|begin|for)\b")
_DO_BLOCK = re.compile(r"\bdo(\s*\|[^|]*\|)?$")
_INTERP = re.compile(r"#\{[^}]*\}")

# DSL calls that look like bare resources but are not
NOT_RESOURCES = {
    "include_recipe", "require", "require_relative", "name", "version",
    "maintainer", "maintainer_email", "license", "description",
    "long_description", "depends", "supports", "chef_version", "issues_url",
    "source_url", "recipe", "provides", "gem", "puts", "raise", "return",
    "load", "extend", "include", "attr_accessor", "default_action",
}
_KEYWORDS = {"if", "unless", "case", "while", "until", "begin", "for", "else",
             "elsif", "when", "rescue", "ensure", "end", "def", "class", "module",
             "return", "yield", "then"}


class _Line:
    __slots__ = ("start", "end", "text")

    def __init__(self, start, end, text):
        self.start = start
        self.end = end
        self.text = text


def _logical_lines(source: SourceFile, heredocs: list, comments: list):
    """Split into logical lines; strings may span physical lines.

    Heredoc bodies are stored in ``heredocs`` and replaced by ``\\x00N\\x00``
    placeholders; comments go to ``comments`` as (line, text).
    """
    lines = source.lines
    out = []
    buf = []
    start = 1
    quote = None
    pending = []
    n = 0
    while n < len(lines):
        line = lines[n]
        if not buf and quote is None:
            start = n + 1
        i = 0
        while i < len(line):
            c = line[i]
            if quote:
                if c == "\\":
                    buf.append(line[i : i + 2])
                    i += 2
                    continue
                if c == quote:
                    quote = None
                buf.append(c)
                i += 1
                continue
            if c in "'\"":
                quote = c
                buf.append(c)
                i += 1
                continue
            if c == "#":
                text = line[i + 1 :].strip()
                if text:
                    comments.append((n + 1, text))
                break
            m = _HEREDOC.match(line, i)
            if m:
                pending.append(m)
                buf.append(f"\x00{len(heredocs) + len(pending) - 1}\x00")
                i = m.end()
                continue
            buf.append(c)
            i += 1
        if quote:
            buf.append("\n")
            n += 1
            continue
        n += 1
        for m in pending:
            squiggly = m.group(1) in "-~" and m.group(1) != ""
            ident = m.group(3)
            body = []
            while True:
                if n >= len(lines):
                    raise ParseError(f"unterminated heredoc {ident}", start)
                current = lines[n]
                n += 1
                if (current.strip() if squiggly else current) == ident:
                    break
                body.append(current)
            if m.group(1) == "~":
                indent = min(
                    (len(b) - len(b.lstrip()) for b in body if b.strip()), default=0
                )
                body = [b[indent:] for b in body]
            heredocs.append((m.group(2) != "'", "\n".join(body)))
        pending = []
        text = "".join(buf).strip()
        buf = []
        if text:
            out.append(_Line(start, n, text))
    if quote:
        raise ParseError("unterminated string", start)
    return out


def _split_top(text: str, sep: str = ","):
    parts, buf, depth, quote = [], [], 0, None
    for i, c in enumerate(text):
        if quote:
            if c == quote and text[i - 1] != "\\":
                quote = None
        elif c in "'\"":
            quote = c
        elif c in "([{":
            depth += 1
        elif c in ")]}":
            depth -= 1
        elif c == sep and depth == 0:
            parts.append("".join(buf).strip())
            buf = []
            continue
        buf.append(c)
    parts.append("".join(buf).strip())
    return [p for p in parts if p]


def _string_value(body: str, interpolating: bool) -> Text:
    if not interpolating:
        return Text(body)
    markers = [
        Interpolation(m.start(), m.end(), m.group(0)[2:-1].strip(), True)
        for m in _INTERP.finditer(body)
    ]
    return Text(body, markers)


def _closing_quote(text: str, quote: str) -> int:
    i = 1
    while i < len(text):
        if text[i] == "\\":
            i += 2
            continue
        if text[i] == quote:
            return i
        i += 1
    return -1


def chef_value(text: str, heredocs: list):
    """Interpret a Ruby value expression; non-literals stay raw text."""
    text = text.strip()
    if not text:
        return None
    m = _PLACEHOLDER.fullmatch(text)
    if m:
        interpolating, body = heredocs[int(m.group(1))]
        return _string_value(body, interpolating)
    if text[0] in "'\"" and _closing_quote(text, text[0]) == len(text) - 1:
        return _string_value(text[1:-1], text[0] == '"')
    if re.fullmatch(r"-?\d+", text):
        return int(text)
    if re.fullmatch(r"-?\d+\.\d+", text):
        return float(text)
    if text in ("true", "false"):
        return text == "true"
    if text == "nil":
        return None
    if re.fullmatch(r":[A-Za-z_]\w*[?!]?", text):
        return Text(text)
    m = re.fullmatch(r"%w[\{\[\(](.*)[\}\]\)]", text, re.S)
    if m:
        return [Text(w) for w in m.group(1).split()]
    if text.startswith("[") and text.endswith("]"):
        items = [chef_value(p, heredocs) for p in _split_top(text[1:-1])]
        if all(not (isinstance(v, Text) and v.expr) for v in items):
            return items
    return Text(_restore(text, heredocs), expr=True)


def _restore(text: str, heredocs: list) -> str:
    return _PLACEHOLDER.sub(lambda m: heredocs[int(m.group(1))][1], text)


def _net_depth(text: str) -> int:
    """Block openers minus closers on one logical line."""
    code = re.sub(r"'(?:\\.|[^'])*'|\"(?:\\.|[^\"])*\"", "''", text)
    depth = 0
    if _OPENERS.match(code):
        depth += 1
    if _DO_BLOCK.search(code):
        depth += 1
    depth -= len(re.findall(r"\bend\b", code))
    depth += code.count("{") - code.count("}")
    return depth


class ChefParser(Parser):
    tech = TechnologyId.CHEF

    def matches(self, filename):
        return filename.endswith(".rb")

    def module_root(self, root, rel_parts):
        def is_cookbook(parts):
            base = os.path.join(root, *parts)
            return os.path.isfile(os.path.join(base, "metadata.rb")) or os.path.isdir(
                os.path.join(base, "recipes")
            )

        return outermost(rel_parts, is_cookbook)

    def parse_source(self, source, warnings):
        return parse_chef(source, warnings)


def parse_chef(source: SourceFile, warnings=None) -> UnitBlock:
    if warnings is None:
        warnings = []
    heredocs = []
    raw_comments = []
    lines = _logical_lines(source, heredocs, raw_comments)
    root = UnitBlock(os.path.basename(source.path), BlockKind.SCRIPT, source.whole())

    def warn(line, msg):
        warnings.append(f"{source.path}:{line.start}: {msg}")

    i = 0
    while i < len(lines):
        line = lines[i]
        text = line.text
        m = _RESOURCE.match(text)
        if m and m.group(1) not in _KEYWORDS:
            i = _resource(source, lines, i, m, root, heredocs, warnings)
            continue
        m = _BARE_RESOURCE.match(text)
        if m and m.group(1) not in NOT_RESOURCES and m.group(1) not in _KEYWORDS:
            title = chef_value(m.group(2) or m.group(3), heredocs)
            root.atomic_units.append(
                AtomicUnit(str(title), m.group(1), source.span(line.start, line.end))
            )
            i += 1
            continue
        m = _ASSIGN.match(text)
        if m and not _OPENERS.match(text):
            root.variables.append(
                Variable(
                    m.group(1),
                    chef_value(m.group(2), heredocs),
                    source.span(line.start, line.end),
                )
            )
            i += 1
            continue
        warn(line, f"unsupported statement skipped: {text.splitlines()[0][:60]}")
        i += 1

    assign_comments(
        root, [Comment(text, source.span(n)) for n, text in raw_comments]
    )
    return root


def _resource(source, lines, i, match, root, heredocs, warnings):
    first = lines[i]
    rtype = match.group(1)
    title = chef_value(match.group(2) or match.group(3), heredocs)
    au = AtomicUnit(str(title), rtype, source.span(first.start))
    i += 1
    while True:
        if i >= len(lines):
            raise ParseError(f"unterminated block for {rtype} '{au.name}'", first.start)
        line = lines[i]
        text = line.text
        if text == "end":
            au.span = source.span(first.start, line.end)
            root.atomic_units.append(au)
            return i + 1
        depth = _net_depth(text)
        if depth > 0:
            # nested conditional or block: skip to its matching end
            warnings.append(
                f"{source.path}:{line.start}: nested block in {rtype} '{au.name}' skipped"
            )
            start = line
            while depth > 0:
                i += 1
                if i >= len(lines):
                    raise ParseError("unterminated nested block", start.start)
                depth += _net_depth(lines[i].text)
            i += 1
            continue
        m = _ATTRIBUTE.match(text)
        if m:
            value_text = m.group(2) if m.group(2) is not None else m.group(3)
            parts = _split_top(value_text or "")
            if len(parts) > 1:
                value = Text(_restore(value_text.strip(), heredocs), expr=True)
            else:
                value = chef_value(value_text or "", heredocs)
            add_attribute(
                au, Attribute(m.group(1), value, source.span(line.start, line.end)), warnings
            )
        else:
            warnings.append(
                f"{source.path}:{line.start}: unsupported line in {rtype} '{au.name}' skipped"
            )
        i += 1
