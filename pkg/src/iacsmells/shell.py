"""Quote-aware splitting of shell command lines."""

import re
import shlex

_CONTINUATION = re.compile(r"\\[ \t]*\n")


def join_continuations(text: str) -> str:
    """Collapse a multi-line command into one line."""
    return _CONTINUATION.sub(" ", text).replace("\n", " ")


def split_statements(command: str, pipes: bool = False) -> list:
    """Split on top-level ``&&``, ``||`` and ``;`` (and ``|`` when ``pipes``).

    Separators inside quotes, ``$(...)``/``(...)`` groups or backticks are
    ignored. Empty statements are dropped.
    """
    out = []
    buf = []
    quote = None
    depth = 0
    i = 0
    n = len(command)
    while i < n:
        c = command[i]
        if quote == "'":
            buf.append(c)
            if c == "'":
                quote = None
            i += 1
            continue
        if c == "\\" and i + 1 < n and quote != "'":
            buf.append(command[i : i + 2])
            i += 2
            continue
        if quote:
            buf.append(c)
            if c == quote:
                quote = None
            i += 1
            continue
        if c in "'\"`":
            quote = c
            buf.append(c)
            i += 1
            continue
        if c == "(":
            depth += 1
        elif c == ")" and depth:
            depth -= 1
        if depth == 0:
            two = command[i : i + 2]
            if two in ("&&", "||"):
                out.append("".join(buf))
                buf = []
                i += 2
                continue
            if c == ";" or (c == "|" and pipes):
                out.append("".join(buf))
                buf = []
                i += 1
                continue
        buf.append(c)
        i += 1
    out.append("".join(buf))
    return [s.strip() for s in out if s.strip()]


def count_statements(command: str) -> int:
    return len(split_statements(join_continuations(command), pipes=True))


def words(statement: str) -> list:
    try:
        return shlex.split(statement, comments=False, posix=True)
    except ValueError:
        return statement.split()


_ASSIGNMENT = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*=")
_PREFIXES = {"sudo", "exec", "env", "nohup", "time", "command"}


def command_word(statement: str) -> str:
    """Basename of the program a statement runs, skipping ``sudo`` and ``VAR=x``."""
    for word in words(statement):
        if _ASSIGNMENT.match(word) or word in _PREFIXES or word.startswith("-"):
            continue
        return word.rsplit("/", 1)[-1]
    return ""
