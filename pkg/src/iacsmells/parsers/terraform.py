"""Terraform configuration files (HCL2 native syntax)."""

import os
import re
from dataclasses import dataclass

from iacsmells.parsers.base import (
    ParseError,
    Parser,
    TechnologyId,
    add_attribute,
    assign_comments,
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
    kind: str  # ident, string, heredoc, number, op, nl, eof
    text: str
    line: int
    end_line: int
    start: int
    end: int
    value: object = None


_IDENT = re.compile(r"[A-Za-z_][\w-]*")
_NUMBER = re.compile(r"\d+(?:\.\d+)?(?:[eE][-+]?\d+)?")
_HEREDOC = re.compile(r"<<(-?)([A-Za-z_]\w*)[ \t]*\n")
_OPS = sorted(
    ["==", "!=", "<=", ">=", "&&", "||", "=>", "...", "{", "}", "[", "]", "(",
     ")", "=", ",", ".", ":", "?", "!", "<", ">", "+", "-", "*", "/", "%"],
    key=len,
    reverse=True,
)


class Lexer:
    def __init__(self, source: SourceFile):
        self.text = source.text
        self.pos = 0
        self.line = 1
        self.tokens = []
        self.comments = []

    def error(self, msg):
        raise ParseError(msg, self.line)

    def advance(self, n):
        chunk = self.text[self.pos : self.pos + n]
        self.line += chunk.count("\n")
        self.pos += n

    def add(self, kind, start, line, value=None):
        self.tokens.append(
            Token(kind, self.text[start : self.pos], line, self.line, start, self.pos, value)
        )

    def run(self):
        text = self.text
        while self.pos < len(text):
            c = text[self.pos]
            start, line = self.pos, self.line
            if c in " \t":
                self.advance(1)
            elif c == "\n":
                self.advance(1)
                self.add("nl", start, line)
            elif c == "#" or text.startswith("//", self.pos):
                end = text.find("\n", self.pos)
                end = len(text) if end < 0 else end
                body = text[self.pos : end]
                self.advance(end - self.pos)
                self.comments.append((line, line, body.lstrip("#/").strip()))
            elif text.startswith("/*", self.pos):
                end = text.find("*/", self.pos + 2)
                if end < 0:
                    self.error("unterminated comment")
                body = text[self.pos + 2 : end]
                self.advance(end + 2 - self.pos)
                self.comments.append((line, self.line, body.strip()))
            elif c == '"':
                end = self.template_end(self.pos + 1, '"')
                body = text[self.pos + 1 : end]
                self.advance(end + 1 - self.pos)
                self.add("string", start, line, _template(body, escapes=True))
            elif text.startswith("<<", self.pos) and _HEREDOC.match(text, self.pos):
                self.heredoc(start, line)
            elif c.isdigit():
                m = _NUMBER.match(text, self.pos)
                self.advance(m.end() - self.pos)
                self.add("number", start, line)
            elif _IDENT.match(text, self.pos):
                m = _IDENT.match(text, self.pos)
                self.advance(m.end() - self.pos)
                self.add("ident", start, line)
            else:
                for op in _OPS:
                    if text.startswith(op, self.pos):
                        self.advance(len(op))
                        self.add("op", start, line)
                        break
                else:
                    self.error(f"unexpected character {c!r}")
        self.tokens.append(Token("eof", "", self.line, self.line, self.pos, self.pos))
        return self.tokens

    def template_end(self, i, close):
        """Index of the closing quote of a template starting at ``i``."""
        text = self.text
        while i < len(text):
            c = text[i]
            if c == "\\":
                i += 2
                continue
            if c == "\n":
                self.error("newline in string")
            if c == close:
                return i
            if c in "$%" and text.startswith(c + "{", i + 1):
                i += 3  # escaped $${ / %%{
                continue
            if c in "$%" and text.startswith("{", i + 1):
                i = self.interpolation_end(i + 2)
                continue
            i += 1
        self.error("unterminated string")

    def interpolation_end(self, i):
        text = self.text
        depth = 1
        while i < len(text):
            c = text[i]
            if c == '"':
                i = self.template_end(i + 1, '"') + 1
                continue
            if c == "{":
                depth += 1
            elif c == "}":
                depth -= 1
                if depth == 0:
                    return i + 1
            i += 1
        self.error("unterminated interpolation")

    def heredoc(self, start, line):
        m = _HEREDOC.match(self.text, self.pos)
        strip, ident = m.group(1), m.group(2)
        body_start = m.end()
        pattern = re.compile(rf"^[ \t]*{re.escape(ident)}[ \t]*$", re.M)
        end = pattern.search(self.text, body_start)
        if not end:
            self.error(f"unterminated heredoc {ident}")
        body = self.text[body_start : end.start()].rstrip("\n")
        if strip:
            lines = body.split("\n")
            indent = min((len(x) - len(x.lstrip()) for x in lines if x.strip()), default=0)
            body = "\n".join(x[indent:] for x in lines)
        self.advance(end.end() - self.pos)
        self.add("heredoc", start, line, _template(body))


_ESCAPES = {"n": "\n", "r": "\r", "t": "\t", '"': '"', "\\": "\\"}


def _template(body: str, escapes: bool = False) -> Text:
    """Decode a template, marking every ``${...}``/``%{...}`` sequence.

    Backslash escapes are decoded only in quoted strings (``escapes``);
    ``$${`` and ``%%{`` are literal in both quoted strings and heredocs.
    """
    out = []
    markers = []
    pos = 0
    i = 0
    n = len(body)
    while i < n:
        c = body[i]
        if escapes and c == "\\" and i + 1 < n:
            nxt = body[i + 1]
            width = {"u": 4, "U": 8}.get(nxt)
            if width and re.fullmatch(r"[0-9a-fA-F]+", body[i + 2 : i + 2 + width] or "-"):
                piece = chr(int(body[i + 2 : i + 2 + width], 16))
                i += 2 + width
            else:
                piece = _ESCAPES.get(nxt, "\\" + nxt)
                i += 2
        elif c in "$%" and body.startswith(c + c + "{", i):
            piece = c + "{"
            i += 3
        elif c in "$%" and body.startswith(c + "{", i):
            depth = 0
            j = i + 1
            while j < n:
                if body[j] == "{":
                    depth += 1
                elif body[j] == "}":
                    depth -= 1
                    if depth == 0:
                        break
                j += 1
            piece = body[i : j + 1]
            markers.append(Interpolation(pos, pos + len(piece), body[i + 2 : j].strip(), True))
            i = j + 1
        else:
            piece = c
            i += 1
        out.append(piece)
        pos += len(piece)
    return Text("".join(out), markers)


class _Object:
    def __init__(self, items):
        self.items = items  # (key, value, first token, last token)


_BRACKETS = {"(": ")", "[": "]", "{": "}"}


class TerraformParser(Parser):
    tech = TechnologyId.TERRAFORM

    def matches(self, filename):
        return filename.endswith(".tf")

    def module_root(self, root, rel_parts):
        for i, part in enumerate(rel_parts[:-2]):
            if part == "modules":
                return rel_parts[: i + 2]
        return None

    def parse_source(self, source, warnings):
        return parse_terraform(source, warnings)


def parse_terraform(source: SourceFile, warnings=None) -> UnitBlock:
    if warnings is None:
        warnings = []
    lexer = Lexer(source)
    tokens = lexer.run()
    root = UnitBlock(os.path.basename(source.path), BlockKind.SCRIPT, source.whole())
    p = _Parser(source, tokens, warnings)
    for item in p.body(top=True):
        p.lower_toplevel(root, item)
    comments = [Comment(t, source.span(a, b)) for a, b, t in lexer.comments if t]
    assign_comments(root, comments)
    return root


class _Parser:
    def __init__(self, source, tokens, warnings):
        self.source = source
        self.tokens = tokens
        self.i = 0
        self.warnings = warnings

    @property
    def tok(self):
        return self.tokens[self.i]

    def take(self):
        t = self.tokens[self.i]
        if t.kind != "eof":
            self.i += 1
        return t

    def skip_nl(self):
        while self.tok.kind == "nl":
            self.i += 1

    def error(self, msg, tok=None):
        raise ParseError(msg, (tok or self.tok).line)

    def span(self, first, last):
        return self.source.span(first.line, last.end_line)

    def body(self, top=False):
        """Parse attributes and blocks until '}' (or end of file at top level)."""
        items = []
        while True:
            self.skip_nl()
            t = self.tok
            if t.kind == "eof":
                if not top:
                    self.error("unexpected end of file, missing '}'")
                return items
            if t.kind == "op" and t.text == "}":
                if top:
                    self.error("unbalanced '}'")
                return items
            if t.kind != "ident":
                self.error(f"unexpected '{t.text}'")
            name = self.take()
            if self.tok.kind == "op" and self.tok.text == "=":
                self.take()
                value, last = self.expression()
                items.append(("attr", name.text, value, name, last))
                self.end_of_item()
                continue
            labels = []
            while self.tok.kind in ("string", "ident"):
                lt = self.take()
                labels.append(str(lt.value) if lt.kind == "string" else lt.text)
            if not (self.tok.kind == "op" and self.tok.text == "{"):
                self.error(f"expected '=' or '{{' after '{name.text}'")
            self.take()
            inner = self.body()
            last = self.take()
            items.append(("block", name.text, labels, inner, name, last))
            self.end_of_item()

    def end_of_item(self):
        t = self.tok
        if t.kind in ("nl", "eof") or (t.kind == "op" and t.text == "}"):
            return
        self.error(f"unexpected '{t.text}' after definition")

    def expression(self, stop=("nl",)):
        """Collect one expression's tokens and interpret them."""
        start = self.i
        depth = 0
        while True:
            t = self.tok
            if t.kind == "eof":
                if depth:
                    self.error("unbalanced brackets in expression")
                break
            if t.kind == "op" and t.text in _BRACKETS:
                depth += 1
            elif t.kind == "op" and t.text in _BRACKETS.values():
                if depth == 0:
                    break
                depth -= 1
            elif depth == 0 and (t.kind in stop or (t.kind == "op" and t.text in stop)):
                break
            self.i += 1
        toks = self.tokens[start : self.i]
        while toks and toks[-1].kind == "nl":
            toks = toks[:-1]
        if not toks:
            self.error("missing value")
        return self.interpret(toks), toks[-1]

    def interpret(self, toks):
        toks = _trim(toks)
        first, last = toks[0], toks[-1]
        if len(toks) == 1:
            t = first
            if t.kind in ("string", "heredoc"):
                return t.value
            if t.kind == "number":
                return float(t.text) if any(c in t.text for c in ".eE") else int(t.text)
            if t.kind == "ident" and t.text in ("true", "false"):
                return t.text == "true"
            if t.kind == "ident" and t.text == "null":
                return None
        if first.text in ("[", "{") and first.kind == "op" and self.closes(toks):
            inner = toks[1:-1]
            if first.text == "[":
                return [self.interpret(el) for el in _split(inner, ",") if _trim(el)]
            return self.object(inner)
        return Text(self.source.text[first.start : last.end], expr=True)

    @staticmethod
    def closes(toks):
        depth = 0
        for k, t in enumerate(toks):
            if t.kind == "op" and t.text in _BRACKETS:
                depth += 1
            elif t.kind == "op" and t.text in _BRACKETS.values():
                depth -= 1
                if depth == 0:
                    return k == len(toks) - 1
        return False

    def object(self, toks):
        items = []
        for el in _split(toks, ",", newlines=True):
            el = [t for t in el if t.kind != "nl"]
            if not el:
                continue
            for k, t in enumerate(el):
                if t.kind == "op" and t.text in ("=", ":"):
                    break
            else:
                return Text(self.source.text[toks[0].start : toks[-1].end], expr=True)
            key_toks, value_toks = el[:k], el[k + 1 :]
            if not value_toks or not key_toks:
                self.error("malformed object element", el[0])
            key = key_toks[0]
            key_text = str(key.value) if key.kind == "string" else self.source.text[
                key_toks[0].start : key_toks[-1].end
            ]
            items.append((key_text, self.interpret(value_toks), key, value_toks[-1]))
        return _Object(items)

    # lowering

    def lower_toplevel(self, root, item):
        if item[0] == "attr":
            _, name, value, first, last = item
            root.variables.append(self.variable(name, value, first, last))
            return
        _, kind, labels, inner, first, last = item
        span = self.span(first, last)
        if kind == "variable":
            var = Variable(labels[0] if labels else "", None, span)
            var.nested = self.members(inner, self.variable)
            root.variables.append(var)
        elif kind == "locals":
            for sub in inner:
                if sub[0] == "attr":
                    root.variables.append(self.variable(*sub[1:]))
        else:
            if kind == "resource":
                rtype, name = (labels + ["", ""])[:2]
            elif kind == "data":
                rtype, name = "data." + (labels[0] if labels else ""), (labels + ["", ""])[1]
            else:
                rtype, name = kind, " ".join(labels)
            au = AtomicUnit(name, rtype, span)
            for attr in self.members(inner, self.attribute):
                add_attribute(au, attr, self.warnings)
            root.atomic_units.append(au)

    def members(self, items, make):
        out = []
        seen = {}
        for item in items:
            if item[0] == "attr":
                _, name, value, first, last = item
                out.append(make(name, value, first, last))
                continue
            _, kind, labels, inner, first, last = item
            name = ".".join([kind] + labels)
            count = seen.get(name, 0)
            seen[name] = count + 1
            if count:
                name = f"{name}[{count}]"
            node = make(name, None, first, last)
            node.nested = self.members(inner, make)
            out.append(node)
        return out

    def attribute(self, name, value, first, last):
        return self._node(Attribute, name, value, first, last)

    def variable(self, name, value, first, last):
        return self._node(Variable, name, value, first, last)

    def _node(self, cls, name, value, first, last):
        if isinstance(value, _Object):
            node = cls(name, None, self.span(first, last))
            node.nested = [
                self._node(cls, k, v, kf, kl) for k, v, kf, kl in value.items
            ]
            return node
        return cls(name, value, self.span(first, last))


def _split(toks, sep, newlines=False):
    parts, buf, depth = [], [], 0
    for t in toks:
        if t.kind == "op" and t.text in _BRACKETS:
            depth += 1
        elif t.kind == "op" and t.text in _BRACKETS.values():
            depth -= 1
        elif depth == 0 and (
            (t.kind == "op" and t.text == sep) or (newlines and t.kind == "nl")
        ):
            parts.append(buf)
            buf = []
            continue
        buf.append(t)
    parts.append(buf)
    return parts


def _trim(toks):
    start, end = 0, len(toks)
    while start < end and toks[start].kind == "nl":
        start += 1
    while end > start and toks[end - 1].kind == "nl":
        end -= 1
    return toks[start:end]
