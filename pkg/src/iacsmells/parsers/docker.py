import json
import os
import re

from iacsmells import shell
from iacsmells.parsers.base import ParseError, Parser, TechnologyId, add_attribute
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

INSTRUCTIONS = {
    "FROM", "RUN", "CMD", "LABEL", "MAINTAINER", "EXPOSE", "ENV", "ADD",
    "COPY", "ENTRYPOINT", "VOLUME", "USER", "WORKDIR", "ARG", "ONBUILD",
    "STOPSIGNAL", "HEALTHCHECK", "SHELL",
}

# single-valued instructions: attribute name holding the argument text
_SIMPLE = {
    "EXPOSE": "ports",
    "USER": "user",
    "WORKDIR": "path",
    "VOLUME": "paths",
    "STOPSIGNAL": "signal",
    "MAINTAINER": "maintainer",
    "ONBUILD": "instruction",
}
_COMMAND_LIKE = {"CMD", "ENTRYPOINT", "SHELL", "HEALTHCHECK"}

_VAR_REF = re.compile(r"\$(\{[A-Za-z_][A-Za-z0-9_]*[^}]*\}|[A-Za-z_][A-Za-z0-9_]*)")


def shell_text(text: str) -> Text:
    """Wrap shell text, marking ``$VAR`` / ``${VAR}`` references outside single quotes."""
    markers = []
    quote = None
    i = 0
    while i < len(text):
        c = text[i]
        if c == "\\":
            i += 2
            continue
        if c == "'" and quote != '"':
            quote = None if quote == "'" else "'"
        elif c == '"' and quote != "'":
            quote = None if quote == '"' else '"'
        elif c == "$" and quote != "'":
            m = _VAR_REF.match(text, i)
            if m:
                ref = m.group(1)
                guarded = ref.startswith("{")
                name = re.match(r"[A-Za-z0-9_]+", ref.lstrip("{")).group(0)
                markers.append(Interpolation(m.start(), m.end(), name, guarded))
                i = m.end()
                continue
        i += 1
    return Text(text, markers)


def _exec_form(rest: str):
    if rest.startswith("["):
        try:
            parsed = json.loads(rest)
        except ValueError:
            return None
        if isinstance(parsed, list) and all(isinstance(p, str) for p in parsed):
            return parsed
    return None


class _Instruction:
    __slots__ = ("keyword", "written", "rest", "start", "end")

    def __init__(self, keyword, written, rest, start, end):
        self.keyword = keyword
        self.written = written
        self.rest = rest
        self.start = start
        self.end = end


def _scan(source: SourceFile, comments: list):
    """Yield logical instructions, collecting comment lines into ``comments``."""
    lines = source.lines
    i = 0
    while i < len(lines):
        stripped = lines[i].strip()
        if not stripped:
            i += 1
            continue
        if stripped.startswith("#"):
            comments.append((i + 1, stripped[1:].strip()))
            i += 1
            continue
        start = i
        parts = []
        while True:
            body = lines[i].rstrip()
            if body.endswith("\\"):
                parts.append(body[:-1])
                i += 1
                # comment and blank lines inside a continuation are skipped
                while i < len(lines) and (
                    not lines[i].strip() or lines[i].strip().startswith("#")
                ):
                    if lines[i].strip():
                        comments.append((i + 1, lines[i].strip()[1:].strip()))
                    i += 1
                if i >= len(lines):
                    break
                continue
            parts.append(body)
            break
        end = min(i, len(lines) - 1)
        text = " ".join(p.strip() for p in parts).strip()
        written, _, rest = text.partition(" ")
        keyword = written.upper()
        if keyword not in INSTRUCTIONS:
            raise ParseError(f"unknown instruction '{written}'", start + 1)
        yield _Instruction(keyword, written, rest.strip(), start + 1, end + 1)
        i = end + 1


def _strip_flags(rest: str):
    flags = {}
    while rest.startswith("--"):
        flag, _, rest = rest.partition(" ")
        key, _, value = flag[2:].partition("=")
        flags[key] = value
        rest = rest.strip()
    return flags, rest


class DockerParser(Parser):
    tech = TechnologyId.DOCKER

    def matches(self, filename):
        return filename == "Dockerfile" or filename.lower().endswith(".dockerfile")

    def module_root(self, root, rel_parts):
        return None

    def parse_source(self, source, warnings):
        return parse_docker(source, warnings)


def parse_docker(source: SourceFile, warnings=None) -> UnitBlock:
    if warnings is None:
        warnings = []
    root = UnitBlock(os.path.basename(source.path), BlockKind.SCRIPT, source.whole())
    comments = []
    stage = None
    stages = []

    def open_stage(name, line):
        block = UnitBlock(name, BlockKind.BUILD_STAGE, source.span(line))
        stages.append(block)
        root.nested_blocks.append(block)
        return block

    for ins in _scan(source, comments):
        span = source.span(ins.start, ins.end)
        if ins.keyword == "FROM":
            _, rest = _strip_flags(ins.rest)
            tokens = rest.split()
            if not tokens:
                raise ParseError("FROM requires an image", ins.start)
            alias = None
            if len(tokens) >= 3 and tokens[1].lower() == "as":
                alias = tokens[2]
            stage = open_stage(alias or f"stage-{len(stages)}", ins.start)
            stage.attributes.append(Attribute("image", shell_text(tokens[0]), span))
            _extend(stage, source, ins.end)
            continue

        if stage is None:
            if ins.keyword == "ARG":
                root.variables.extend(_arg_vars(ins, span))
                continue
            warnings.append(
                f"{source.path}:{ins.start}: {ins.keyword} before any FROM; "
                "attached to stage-0"
            )
            stage = open_stage("stage-0", ins.start)
        _extend(stage, source, ins.end)

        if ins.keyword == "RUN":
            stage.atomic_units.extend(_run_units(ins, span, warnings))
        elif ins.keyword == "ENV":
            stage.variables.extend(_env_vars(ins, span))
        elif ins.keyword == "ARG":
            stage.variables.extend(_arg_vars(ins, span))
        else:
            stage.atomic_units.append(_instruction_unit(ins, span, warnings))

    for line, text in comments:
        if not text:
            continue
        owner = root
        for block in stages:
            if block.span.start_line <= line:
                owner = block
        owner.comments.append(Comment(text, source.span(line)))
    for block in stages:
        block.comments.sort(key=lambda c: c.span.start_line)
    return root


def _extend(stage: UnitBlock, source: SourceFile, end_line: int):
    if end_line > stage.span.end_line:
        stage.span = source.span(stage.span.start_line, end_line)


def _run_units(ins, span, warnings):
    _, rest = _strip_flags(ins.rest)
    exec_form = _exec_form(rest)
    if exec_form is not None:
        if not exec_form:
            return []
        au = AtomicUnit(exec_form[0], exec_form[0], span)
        au.attributes.append(Attribute("args", shell_text(" ".join(exec_form[1:])), span))
        return [au]
    units = []
    for statement in shell.split_statements(rest):
        tokens = shell.words(statement)
        # skip leading VAR=value assignments
        skip = 0
        while skip < len(tokens) - 1 and re.match(r"^[A-Za-z_]\w*=", tokens[skip]):
            skip += 1
        raw = statement
        for _ in range(skip + 1):
            raw = re.sub(r"^\s*(?:'[^']*'|\"(?:\\.|[^\"])*\"|\S)+", "", raw, count=1)
        if not tokens:
            continue
        command = tokens[skip]
        au = AtomicUnit(command, command, span)
        au.attributes.append(Attribute("args", shell_text(raw.strip()), span))
        units.append(au)
    return units


def _env_vars(ins, span):
    rest = ins.rest
    first = rest.split(None, 1)[0] if rest else ""
    if "=" not in first:
        name, _, value = rest.partition(" ")
        return [Variable(name, shell_text(value.strip()), span)]
    out = []
    for token in shell.words(rest):
        name, _, value = token.partition("=")
        out.append(Variable(name, shell_text(value), span))
    return out


def _arg_vars(ins, span):
    out = []
    for token in shell.words(ins.rest):
        name, eq, value = token.partition("=")
        out.append(Variable(name, shell_text(value) if eq else None, span))
    return out


def _instruction_unit(ins, span, warnings):
    au = AtomicUnit(ins.written, ins.keyword, span)
    flags, rest = _strip_flags(ins.rest)
    for key, value in flags.items():
        add_attribute(au, Attribute(key, shell_text(value), span), warnings)
    exec_form = _exec_form(rest)
    if ins.keyword in ("COPY", "ADD"):
        tokens = exec_form if exec_form is not None else shell.words(rest)
        if tokens:
            sources = [shell_text(t) for t in tokens[:-1]]
            src = sources[0] if len(sources) == 1 else sources
            add_attribute(au, Attribute("src", src, span), warnings)
            add_attribute(au, Attribute("dest", shell_text(tokens[-1]), span), warnings)
    elif ins.keyword in _COMMAND_LIKE:
        if ins.keyword == "HEALTHCHECK" and rest.upper().startswith("CMD "):
            rest = rest[4:].strip()
            exec_form = _exec_form(rest)
        command = " ".join(exec_form) if exec_form is not None else rest
        add_attribute(au, Attribute("command", shell_text(command), span), warnings)
    elif ins.keyword == "LABEL":
        for token in shell.words(rest):
            key, _, value = token.partition("=")
            add_attribute(au, Attribute(key, shell_text(value), span), warnings)
    else:
        add_attribute(au, Attribute(_SIMPLE[ins.keyword], shell_text(rest), span), warnings)
    return au
