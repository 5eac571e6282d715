"""Puppet manifests: classes, defines, nodes, resources, assignments,
conditionals and case statements. Expressions are not evaluated; anything
beyond a literal is kept as raw text."""

import os
import re
from dataclasses import dataclass

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


@dataclass
class Token:
    kind: str  # name, type, var, sq, dq, num, regex, op, eof
    text: str
    line: int
    end_line: int
    start: int
    end: int
    value: object = None


_PUNCT = sorted(
    [
        "<<|", "|>>", "=>", "+>", "->", "~>", "<-", "<~", "==", "!=", "=~", "!~",
        ">=", "<=", "<|", "|>", "<<", ">>", "+=", "@@", "{", "}", "(", ")", "[",
        "]", ",", ";", ":", "=", ">", "<", "+", "-", "*", "/", "%", "!", "?",
        "|", "@", ".",
    ],
    key=len,
    reverse=True,
)
_NAME = re.compile(r"(?:::)?[a-z_][\w]*(?:::[a-z_]\w*)*")
_TYPE = re.compile(r"(?:::)?[A-Z]\w*(?:::[A-Z]\w*)*")
_VAR = re.compile(r"\$(?:::)?[A-Za-z_]\w*(?:::[A-Za-z_]\w*)*")
_NUM = re.compile(r"0[xX][0-9a-fA-F]+|\d+(?:\.\d+)?(?:[eE][-+]?\d+)?")
_UNGUARDED = re.compile(r"\$(?:::)?[a-z_]\w*(?:::[a-z_]\w*)*")
_REGEX_AFTER = {"=~", "!~", "{", "}", ",", "(", "[", "node", ":"}

STATEMENT_FUNCTIONS = {
    "include", "require", "contain", "realize", "tag", "notice", "warning",
    "fail", "info", "debug", "err", "crit", "alert", "emerg", "hiera_include",
}


class Lexer:
    def __init__(self, source: SourceFile):
        self.text = source.text
        self.pos = 0
        self.line = 1
        self.tokens = []
        self.comments = []  # (start_line, end_line, text)

    def error(self, msg):
        raise ParseError(msg, self.line)

    def advance(self, n):
        chunk = self.text[self.pos : self.pos + n]
        self.line += chunk.count("\n")
        self.pos += n
        return chunk

    def add(self, kind, start, start_line, value=None):
        self.tokens.append(
            Token(kind, self.text[start : self.pos], start_line, self.line, start, self.pos, value)
        )

    def run(self):
        text = self.text
        while self.pos < len(text):
            c = text[self.pos]
            start, line = self.pos, self.line
            if c in " \t\n":
                self.advance(1)
            elif c == "#":
                end = text.find("\n", self.pos)
                end = len(text) if end < 0 else end
                body = self.advance(end - self.pos)
                self.comments.append((line, line, body[1:].strip()))
            elif text.startswith("/*", self.pos):
                end = text.find("*/", self.pos + 2)
                if end < 0:
                    self.error("unterminated comment")
                body = self.advance(end + 2 - self.pos)
                inner = body[2:-2].strip()
                self.comments.append((line, self.line, inner))
            elif c == "$":
                m = _VAR.match(text, self.pos)
                if not m:
                    self.error("invalid variable")
                self.advance(m.end() - self.pos)
                self.add("var", start, line)
            elif c == "'":
                self.single_quoted(start, line)
            elif c == '"':
                self.double_quoted(start, line)
            elif c == "@" and text.startswith("@(", self.pos):
                self.error("heredocs are not supported")
            elif c.isdigit():
                m = _NUM.match(text, self.pos)
                self.advance(m.end() - self.pos)
                self.add("num", start, line)
            elif c == "/" and self.regex_allowed():
                self.regex(start, line)
            else:
                m = _NAME.match(text, self.pos) or _TYPE.match(text, self.pos)
                if m and m.end() > self.pos:
                    self.advance(m.end() - self.pos)
                    kind = "type" if m.group(0).lstrip(":")[0].isupper() else "name"
                    self.add(kind, start, line)
                    continue
                for p in _PUNCT:
                    if text.startswith(p, self.pos):
                        self.advance(len(p))
                        self.add("op", start, line)
                        break
                else:
                    self.error(f"unexpected character {c!r}")
        self.tokens.append(Token("eof", "", self.line, self.line, self.pos, self.pos))
        return self.tokens

    def regex_allowed(self):
        if not self.tokens:
            return True
        prev = self.tokens[-1]
        return prev.text in _REGEX_AFTER and prev.kind in ("op", "name")

    def regex(self, start, line):
        i = self.pos + 1
        while i < len(self.text) and self.text[i] != "/":
            if self.text[i] == "\\":
                i += 1
            if self.text[i] == "\n":
                self.error("unterminated regex")
            i += 1
        if i >= len(self.text):
            self.error("unterminated regex")
        self.advance(i + 1 - self.pos)
        self.add("regex", start, line)

    def single_quoted(self, start, line):
        i = self.pos + 1
        while i < len(self.text):
            if self.text[i] == "\\":
                i += 2
                continue
            if self.text[i] == "'":
                break
            i += 1
        else:
            self.error("unterminated string")
        self.advance(i + 1 - self.pos)
        self.add("sq", start, line, Text(self.text[start + 1 : i]))

    def double_quoted(self, start, line):
        text = self.text
        i = self.pos + 1
        body_start = i
        markers = []
        while i < len(text):
            c = text[i]
            if c == "\\":
                i += 2
                continue
            if c == '"':
                break
            if c == "$" and text.startswith("${", i):
                j = _matching_brace(text, i + 1)
                if j < 0:
                    self.error("unterminated interpolation")
                inner = text[i + 2 : j].strip()
                markers.append(
                    Interpolation(i - body_start, j + 1 - body_start, inner.lstrip("$"), True)
                )
                i = j + 1
                continue
            if c == "$":
                m = _UNGUARDED.match(text, i)
                if m:
                    markers.append(
                        Interpolation(i - body_start, m.end() - body_start, m.group(0)[1:], False)
                    )
                    i = m.end()
                    continue
            i += 1
        else:
            self.error("unterminated string")
        self.advance(i + 1 - self.pos)
        self.add("dq", start, line, Text(text[body_start:i], markers))


def _matching_brace(text, open_idx):
    depth = 0
    i = open_idx
    quote = None
    while i < len(text):
        c = text[i]
        if quote:
            if c == "\\":
                i += 1
            elif c == quote:
                quote = None
        elif c in "'\"":
            quote = c
        elif c == "{":
            depth += 1
        elif c == "}":
            depth -= 1
            if depth == 0:
                return i
        i += 1
    return -1


_BINOPS = {
    "+", "-", "*", "/", "%", "==", "!=", "=~", "!~", "<", ">", "<=", ">=",
    "<<", ">>", "and", "or", "in",
}
_CHAIN = {"->", "~>", "<-", "<~"}


class PuppetParser(Parser):
    tech = TechnologyId.PUPPET

    def matches(self, filename):
        return filename.endswith(".pp")

    def module_root(self, root, rel_parts):
        return outermost(
            rel_parts, lambda parts: os.path.isdir(os.path.join(root, *parts, "manifests"))
        )

    def parse_source(self, source, warnings):
        return parse_puppet(source, warnings)


def parse_puppet(source: SourceFile, warnings=None) -> UnitBlock:
    if warnings is None:
        warnings = []
    lexer = Lexer(source)
    tokens = lexer.run()
    root = UnitBlock(os.path.basename(source.path), BlockKind.SCRIPT, source.whole())
    _Parser(source, tokens, warnings).statements(root, toplevel=True)
    comments = [
        Comment(text, source.span(start, end))
        for start, end, text in lexer.comments
        if text
    ]
    assign_comments(root, comments)
    return root


class _Parser:
    def __init__(self, source, tokens, warnings):
        self.source = source
        self.tokens = tokens
        self.i = 0
        self.warnings = warnings

    # token helpers

    @property
    def tok(self):
        return self.tokens[self.i]

    def peek(self, k=1):
        return self.tokens[min(self.i + k, len(self.tokens) - 1)]

    def at(self, text, kind=None):
        t = self.tok
        return t.text == text and (kind is None or t.kind == kind) and t.kind not in ("sq", "dq")

    def take(self):
        t = self.tok
        if t.kind != "eof":
            self.i += 1
        return t

    def expect(self, text):
        if not self.at(text):
            self.error(f"expected '{text}', found '{self.tok.text or 'end of file'}'")
        return self.take()

    def error(self, msg, tok=None):
        raise ParseError(msg, (tok or self.tok).line)

    def raw(self, first, last):
        return self.source.text[first.start : last.end]

    def span(self, first, last):
        return self.source.span(first.line, last.end_line)

    # statements

    def statements(self, block, toplevel=False):
        while True:
            t = self.tok
            if t.kind == "eof":
                if not toplevel:
                    self.error("unexpected end of file, missing '}'")
                return
            if t.text == "}" and t.kind == "op":
                if toplevel:
                    self.error("unbalanced '}'")
                return
            self.statement(block)

    def statement(self, block):
        t = self.tok
        nxt = self.peek()
        if t.kind == "op" and t.text == ";":
            self.take()
        elif t.kind == "name" and t.text == "class" and nxt.kind == "name":
            self.definition(block, "class")
        elif t.kind == "name" and t.text == "define":
            self.definition(block, "define")
        elif t.kind == "name" and t.text == "node":
            self.node(block)
        elif t.kind == "name" and t.text in ("if", "unless"):
            self.conditional(block)
        elif t.kind == "name" and t.text == "case":
            self.case(block)
        elif t.kind == "name" and t.text in ("function", "type", "plan", "application"):
            self.error(f"'{t.text}' definitions are not supported")
        elif t.kind == "var" and nxt.text in ("=", "+="):
            self.assignment(block)
        elif t.kind == "op" and t.text in ("@", "@@"):
            self.take()
            self.resource_chain(block)
        elif t.kind in ("name", "type") and nxt.text == "{" and nxt.kind == "op":
            self.resource_chain(block)
        elif t.kind == "type" and nxt.text in ("[", "<|", "<<|"):
            self.resource_chain(block)
        elif t.kind == "name" and nxt.text == "(":
            self.take()
            self.skip_group("(", ")")
            self.maybe_lambda(block)
        elif t.kind == "name" and t.text in STATEMENT_FUNCTIONS:
            self.take()
            self.expression()
            while self.at(","):
                self.take()
                self.expression()
        elif t.kind == "var":
            # method chains such as $list.each |$x| { ... }
            self.expression()
            self.maybe_lambda(block)
        else:
            self.error(f"unexpected '{t.text or 'end of file'}'")

    def maybe_lambda(self, block):
        if self.at("|"):
            first = self.take()
            while not self.at("|"):
                if self.tok.kind == "eof":
                    self.error("unterminated lambda parameters")
                self.take()
            self.take()
            inner = UnitBlock("lambda", BlockKind.BLOCK, self.span(first, first))
            self.body(inner, first)
            block.nested_blocks.append(inner)

    def body(self, block, first):
        self.expect("{")
        self.statements(block)
        last = self.expect("}")
        block.span = self.span(first, last)

    def definition(self, block, keyword):
        first = self.take()
        name = self.take()
        inner = UnitBlock(name.text, BlockKind.CLASS_LIKE, self.span(first, name))
        if self.at("("):
            self.parameters(inner)
        if self.at("inherits"):
            self.take()
            self.take()
        self.body(inner, first)
        block.nested_blocks.append(inner)

    def parameters(self, inner):
        self.expect("(")
        while not self.at(")"):
            start = self.tok
            # optional data type, e.g. Optional[String]
            if self.tok.kind == "type":
                self.take()
                if self.at("["):
                    self.skip_group("[", "]")
            var = self.tok
            if var.kind != "var":
                self.error("expected parameter name")
            self.take()
            value, last = None, var
            if self.at("="):
                self.take()
                value, _, last = self.expression()
            inner.variables.append(Variable(var.text[1:], value, self.span(start, last)))
            if not self.at(","):
                break
            self.take()
        self.expect(")")

    def node(self, block):
        first = self.take()
        names = []
        while not self.at("{"):
            if self.tok.kind == "eof":
                self.error("unterminated node definition")
            names.append(self.take().text)
        label = " ".join(n for n in names if n != ",")
        inner = UnitBlock(f"node {label}", BlockKind.BLOCK, self.span(first, first))
        self.body(inner, first)
        block.nested_blocks.append(inner)

    def condition_text(self):
        start = self.tok
        last = start
        depth = 0
        while True:
            t = self.tok
            if t.kind == "eof":
                self.error("unterminated condition")
            if t.kind == "op" and t.text in ("(", "["):
                depth += 1
            elif t.kind == "op" and t.text in (")", "]"):
                depth -= 1
            elif t.kind == "op" and t.text == "{" and depth == 0:
                break
            last = self.take()
        if last is start and start.text == "{":
            self.error("missing condition")
        return self.raw(start, last)

    def conditional(self, block):
        first = self.take()
        outer = UnitBlock(first.text, BlockKind.BLOCK, self.span(first, first))
        branch_first = first
        cond = self.condition_text()
        branch = UnitBlock(cond, BlockKind.BLOCK, self.span(first, first))
        self.body(branch, branch_first)
        outer.nested_blocks.append(branch)
        last_branch = branch
        while self.at("elsif") or self.at("else"):
            kw = self.take()
            name = "else" if kw.text == "else" else self.condition_text()
            branch = UnitBlock(name, BlockKind.BLOCK, self.span(kw, kw))
            self.body(branch, kw)
            outer.nested_blocks.append(branch)
            last_branch = branch
            if kw.text == "else":
                break
        outer.span = self.source.span(first.line, last_branch.span.end_line)
        block.nested_blocks.append(outer)

    def case(self, block):
        first = self.take()
        subject = self.condition_text()
        outer = UnitBlock(f"case {subject}", BlockKind.BLOCK, self.span(first, first))
        outer.default_branch = False
        self.expect("{")
        while not self.at("}"):
            label_first = self.tok
            labels = []
            while True:
                value, raw, _ = self.expression()
                labels.append(raw)
                if not self.at(","):
                    break
                self.take()
            self.expect(":")
            if "default" in labels:
                outer.default_branch = True
            branch = UnitBlock(", ".join(labels), BlockKind.BLOCK, self.span(label_first, label_first))
            self.body(branch, label_first)
            outer.nested_blocks.append(branch)
        last = self.expect("}")
        outer.span = self.span(first, last)
        block.nested_blocks.append(outer)

    def assignment(self, block):
        var = self.take()
        self.take()
        value, _, last = self.expression()
        block.variables.append(Variable(var.text[1:], value, self.span(var, last)))

    def resource_chain(self, block):
        self.resource(block)
        while self.tok.kind == "op" and self.tok.text in _CHAIN:
            self.take()
            if self.at("@") or self.at("@@"):
                self.take()
            self.resource(block)

    def resource(self, block):
        type_tok = self.take()
        if type_tok.kind not in ("name", "type"):
            self.error("expected resource type", type_tok)
        if type_tok.kind == "type" and self.at("["):
            # reference, optionally followed by an override block
            self.skip_group("[", "]")
            if self.at("{"):
                self.skip_group("{", "}")
            return
        if type_tok.kind == "type" and (self.at("<|") or self.at("<<|")):
            close = "|>" if self.take().text == "<|" else "|>>"
            while not self.at(close):
                if self.tok.kind == "eof":
                    self.error("unterminated collector")
                self.take()
            self.take()
            if self.at("{"):
                self.skip_group("{", "}")
            return
        self.expect("{")
        if self.tok.text != "}" and self.peek().text in ("=>", "+>"):
            # resource defaults: Type { attr => value }
            au = AtomicUnit("", type_tok.text, self.span(type_tok, type_tok))
            self.attributes(au)
            last = self.expect("}")
            au.span = self.span(type_tok, last)
            block.atomic_units.append(au)
            return
        units = []
        while not self.at("}"):
            title_first = self.tok
            title, raw, _ = self.expression()
            self.expect(":")
            name = str(title) if isinstance(title, str) else raw
            au = AtomicUnit(name, type_tok.text, self.span(title_first, title_first))
            last = self.attributes(au) or title_first
            units.append((au, title_first, last))
            if self.at(";"):
                last = self.take()
                units[-1] = (au, title_first, last)
            elif not self.at("}"):
                self.error("expected ';' or '}' after resource body")
        close = self.expect("}")
        for k, (au, title_first, last) in enumerate(units):
            start = type_tok if k == 0 else title_first
            end = close if k == len(units) - 1 else last
            au.span = self.span(start, end)
            block.atomic_units.append(au)

    def attributes(self, au):
        last = None
        while self.tok.kind in ("name", "type") or self.at("*"):
            name = self.take()
            if not (self.at("=>") or self.at("+>")):
                self.error(f"expected '=>' after attribute '{name.text}'")
            self.take()
            value, _, last = self.expression()
            add_attribute(au, Attribute(name.text, value, self.span(name, last)), self.warnings)
            if self.at(","):
                last = self.take()
            else:
                break
        return last

    def skip_group(self, open_, close):
        self.expect(open_)
        depth = 1
        while depth:
            t = self.take()
            if t.kind == "eof":
                self.error(f"missing '{close}'")
            if t.kind == "op" and t.text == open_:
                depth += 1
            elif t.kind == "op" and t.text == close:
                depth -= 1
        return self.tokens[self.i - 1]

    # expressions

    def expression(self):
        """Parse one expression; return (value, raw text, last token)."""
        first = self.tok
        value = self.operand()
        simple = True
        while True:
            t = self.tok
            if (t.kind == "op" and t.text in _BINOPS) or (
                t.kind == "name" and t.text in ("and", "or", "in")
            ):
                self.take()
                self.operand()
                simple = False
            elif self.at("?"):
                self.take()
                self.skip_group("{", "}")
                simple = False
            else:
                break
        last = self.tokens[self.i - 1]
        raw = self.raw(first, last)
        if not simple:
            value = Text(raw, expr=True)
        return value, raw, last

    def operand(self):
        t = self.tok
        if t.kind == "op" and t.text in ("!", "-"):
            self.take()
            self.operand()
            return Text(self.raw(t, self.tokens[self.i - 1]), expr=True)
        first = t
        value = self.primary()
        # postfix access and method calls
        postfix = False
        while True:
            if self.at("[") and self.tok.start == self.tokens[self.i - 1].end:
                self.skip_group("[", "]")
                postfix = True
            elif self.at(".") and self.peek().kind == "name":
                self.take()
                self.take()
                if self.at("("):
                    self.skip_group("(", ")")
                if self.at("|") and self.peek().kind == "var":
                    while not self.at("{"):
                        self.take()
                    self.skip_group("{", "}")
                postfix = True
            else:
                break
        if postfix:
            return Text(self.raw(first, self.tokens[self.i - 1]), expr=True)
        return value

    def primary(self):
        t = self.tok
        if t.kind in ("sq", "dq"):
            self.take()
            return t.value
        if t.kind == "num":
            self.take()
            return _number(t.text)
        if t.kind == "var":
            self.take()
            return Text(t.text, expr=True)
        if t.kind == "regex":
            self.take()
            return Text(t.text, expr=True)
        if t.kind == "name":
            self.take()
            if self.at("(") and self.tok.start == t.end:
                self.skip_group("(", ")")
                return Text(self.raw(t, self.tokens[self.i - 1]), expr=True)
            if t.text == "true":
                return True
            if t.text == "false":
                return False
            if t.text == "undef":
                return None
            return Text(t.text)
        if t.kind == "type":
            self.take()
            if self.at("["):
                self.skip_group("[", "]")
            return Text(self.raw(t, self.tokens[self.i - 1]), expr=True)
        if t.kind == "op" and t.text == "[":
            self.take()
            items = []
            literal = True
            while not self.at("]"):
                value, _, _ = self.expression()
                if isinstance(value, Text) and value.expr:
                    literal = False
                items.append(value)
                if not self.at(","):
                    break
                self.take()
            self.expect("]")
            if literal:
                return items
            return Text(self.raw(t, self.tokens[self.i - 1]), expr=True)
        if t.kind == "op" and t.text == "{":
            last = self.skip_group("{", "}")
            return Text(self.raw(t, last), expr=True)
        if t.kind == "op" and t.text == "(":
            last = self.skip_group("(", ")")
            return Text(self.raw(t, last), expr=True)
        self.error(f"unexpected '{t.text or 'end of file'}' in expression")


def _number(text):
    if text.lower().startswith("0x"):
        return int(text, 16)
    if len(text) > 1 and text.startswith("0") and text.isdigit():
        return Text(text)  # octal-looking modes keep their spelling
    if any(c in text for c in ".eE"):
        return float(text)
    return int(text)
