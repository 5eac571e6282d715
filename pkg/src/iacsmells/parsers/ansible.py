import os
import re

from ruamel.yaml import YAML
from ruamel.yaml.error import YAMLError, YAMLFutureWarning
from ruamel.yaml.nodes import MappingNode, ScalarNode, SequenceNode

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

PLAY_KEYS = {"hosts", "import_playbook", "roles", "pre_tasks", "post_tasks", "gather_facts"}
TASK_LISTS = ("pre_tasks", "tasks", "post_tasks", "handlers")
BLOCK_LISTS = ("block", "rescue", "always")

# task-level keywords; any other key of a task is the module
TASK_KEYWORDS = {
    "name", "action", "any_errors_fatal", "args", "async", "become",
    "become_exe", "become_flags", "become_method", "become_user", "changed_when",
    "check_mode", "collections", "connection", "debugger", "delay", "delegate_facts",
    "delegate_to", "diff", "environment", "failed_when", "ignore_errors",
    "ignore_unreachable", "local_action", "loop", "loop_control", "module_defaults",
    "no_log", "notify", "poll", "port", "register", "remote_user", "retries",
    "run_once", "tags", "throttle", "timeout", "until", "vars", "when",
    "listen",
}

_JINJA = re.compile(r"\{\{(.*?)\}\}|\{%(.*?)%\}", re.S)


def _jinja_text(value: str) -> Text:
    markers = [
        Interpolation(m.start(), m.end(), (m.group(1) or m.group(2) or "").strip(), True)
        for m in _JINJA.finditer(value)
    ]
    return Text(value, markers)


def _scalar(node: ScalarNode):
    tag = str(node.tag)
    value = node.value
    if node.style in ("'", '"', "|", ">"):
        return _jinja_text(value)
    if tag.endswith(":null"):
        return None
    if tag.endswith(":bool"):
        return value.lower() in ("true", "yes", "on")
    if tag.endswith(":int"):
        digits = value.replace("_", "")
        try:
            if re.fullmatch(r"[-+]?0[0-7]+", digits):  # YAML 1.1 octal
                return int(digits, 8)
            return int(digits, 0)
        except ValueError:
            return Text(value)
    if tag.endswith(":float"):
        try:
            return float(value)
        except ValueError:
            return Text(value)
    return _jinja_text(value)


def _key(node) -> str:
    return node.value if isinstance(node, ScalarNode) else str(node.value)


class AnsibleParser(Parser):
    tech = TechnologyId.ANSIBLE

    def matches(self, filename):
        return filename.endswith((".yml", ".yaml"))

    def module_root(self, root, rel_parts):
        for i, part in enumerate(rel_parts[:-2]):
            if part == "roles":
                return rel_parts[: i + 2]
        return None

    def parse_source(self, source, warnings):
        return parse_ansible(source, warnings)


def parse_ansible(source: SourceFile, warnings=None) -> UnitBlock:
    if warnings is None:
        warnings = []
    root = UnitBlock(os.path.basename(source.path), BlockKind.SCRIPT, source.whole())
    try:
        yaml = YAML(typ="rt")
        yaml.version = (1, 1)  # the YAML dialect Ansible itself loads
        docs = [d for d in yaml.compose_all(source.text) if d is not None]
    except (YAMLError, YAMLFutureWarning) as e:
        mark = getattr(e, "problem_mark", None)
        raise ParseError(str(e).splitlines()[0], mark.line + 1 if mark else None)
    lowering = _Lowering(source, warnings)
    for doc in docs:
        lowering.document(root, doc)
    for line, text in _comments(source, docs):
        root.comments.append(Comment(text, source.span(line)))
    return root


class _Lowering:
    def __init__(self, source: SourceFile, warnings: list):
        self.source = source
        self.warnings = warnings

    def span(self, first, last=None):
        last = last or first
        start = first.start_mark.line + 1
        end = last.end_mark.line + (0 if last.end_mark.column == 0 else 1)
        end = max(start, end)
        lines = self.source.lines
        # trailing blank and comment-only lines belong to whatever follows
        while end > start and (
            not lines[end - 1].strip() or lines[end - 1].lstrip().startswith("#")
        ):
            end -= 1
        return self.source.span(start, end)

    def document(self, root, doc):
        if isinstance(doc, SequenceNode):
            items = [i for i in doc.value if isinstance(i, MappingNode)]
            if any(PLAY_KEYS & {_key(k) for k, _ in i.value} for i in items):
                for item in items:
                    root.nested_blocks.append(self.play(item))
            else:
                self.tasks(root, doc)
        elif isinstance(doc, MappingNode):
            for k, v in doc.value:
                root.variables.append(self.member(Variable, k, v))

    def play(self, node):
        name = ""
        block = UnitBlock("", BlockKind.BLOCK, self.span(node))
        for k, v in node.value:
            key = _key(k)
            if key == "name" and isinstance(v, ScalarNode):
                name = v.value
            elif key == "vars" and isinstance(v, MappingNode):
                for vk, vv in v.value:
                    block.variables.append(self.member(Variable, vk, vv))
            elif key in TASK_LISTS and isinstance(v, SequenceNode):
                self.tasks(block, v)
            else:
                block.attributes.append(self.member(Attribute, k, v))
        block.name = name
        return block

    def tasks(self, block, seq):
        for item in seq.value:
            if not isinstance(item, MappingNode):
                self.warnings.append(
                    f"{self.source.path}:{item.start_mark.line + 1}: task is not a mapping"
                )
                continue
            keys = {_key(k) for k, _ in item.value}
            if "block" in keys:
                block.nested_blocks.append(self.task_block(item))
            else:
                block.atomic_units.append(self.task(item))

    def task_block(self, node):
        inner = UnitBlock("", BlockKind.BLOCK, self.span(node))
        for k, v in node.value:
            key = _key(k)
            if key == "name" and isinstance(v, ScalarNode):
                inner.name = v.value
            elif key in BLOCK_LISTS and isinstance(v, SequenceNode):
                self.tasks(inner, v)
            elif key == "vars" and isinstance(v, MappingNode):
                for vk, vv in v.value:
                    inner.variables.append(self.member(Variable, vk, vv))
            else:
                inner.attributes.append(self.member(Attribute, k, v))
        return inner

    def task(self, node):
        au = AtomicUnit("", "", self.span(node))
        for k, v in node.value:
            key = _key(k)
            if key == "name" and isinstance(v, ScalarNode):
                au.name = v.value
            elif key not in TASK_KEYWORDS and not au.type:
                au.type = key
                self.module_args(au, v)
            elif key == "args" and isinstance(v, MappingNode):
                self.module_args(au, v)
            else:
                add_attribute(au, self.member(Attribute, k, v), self.warnings)
        if not au.type:
            self.warnings.append(
                f"{self.source.path}:{au.span.start_line}: task without a module"
            )
        return au

    def module_args(self, au, value):
        if isinstance(value, MappingNode):
            for k, v in value.value:
                add_attribute(au, self.member(Attribute, k, v), self.warnings)
        elif isinstance(value, ScalarNode) and value.value != "":
            attr = Attribute("free_form", _scalar(value), self.span(value))
            add_attribute(au, attr, self.warnings)

    def member(self, cls, key_node, value_node, key=None):
        """Lower a key/value pair into an Attribute or Variable, nesting collections."""
        key = key if key is not None else _key(key_node)
        span = self.span(key_node, value_node)
        if isinstance(value_node, ScalarNode):
            return cls(key, _scalar(value_node), span)
        if isinstance(value_node, MappingNode):
            node = cls(key, None, span)
            node.nested = [self.member(cls, k, v) for k, v in value_node.value]
            return node
        items = value_node.value
        if all(isinstance(i, ScalarNode) for i in items):
            return cls(key, [_scalar(i) for i in items], span)
        node = cls(key, None, span)
        node.nested = [self.member(cls, i, i, key=str(n)) for n, i in enumerate(items)]
        return node


def _multiline_scalar_lines(docs) -> set:
    inside = set()
    stack = list(docs)
    while stack:
        node = stack.pop()
        if isinstance(node, ScalarNode):
            first = node.start_mark.line
            last = node.end_mark.line
            inside.update(range(first + 1, last + (1 if node.end_mark.column else 0)))
        elif isinstance(node, MappingNode):
            for k, v in node.value:
                stack.extend((k, v))
        elif isinstance(node, SequenceNode):
            stack.extend(node.value)
    return inside


def _comments(source: SourceFile, docs):
    skip = _multiline_scalar_lines(docs)
    out = []
    for idx, line in enumerate(source.lines):
        if idx in skip:
            continue
        pos = _comment_start(line)
        if pos is None:
            continue
        text = line[pos + 1 :].strip()
        if text:
            out.append((idx + 1, text))
    return out


def _comment_start(line: str):
    quote = None
    prev = ""
    i = 0
    while i < len(line):
        c = line[i]
        if quote == "'":
            if c == "'":
                if line[i + 1 : i + 2] == "'":
                    i += 2
                    continue
                quote = None
        elif quote == '"':
            if c == "\\":
                i += 2
                continue
            if c == '"':
                quote = None
        elif c in "'\"" and prev in ("", ":", "-", "[", "{", ","):
            quote = c
        elif c == "#" and (i == 0 or line[i - 1] in " \t"):
            return i
        if not c.isspace():
            prev = c
        i += 1
    return None
