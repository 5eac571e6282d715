"""Security smell detectors.

All rules are keyword driven: every word list they consult is a configuration
key, so changing a lexicon never changes the set of smell codes.
"""

import re

from iacsmells import shell
from iacsmells.analysis.design import command_strings
from iacsmells.analysis.engine import SECURITY, Detector
from iacsmells.parsers.base import TechnologyId
from iacsmells.repr import Text

_TOKEN_SPLIT = re.compile(r"[^0-9a-z]+")


def tokens(text: str) -> list:
    """Lower-cased alphanumeric runs of ``text``."""
    return [t for t in _TOKEN_SPLIT.split(str(text).lower()) if t]


def name_matches(name: str, patterns) -> bool:
    """True when some token of ``name`` starts with one of ``patterns``."""
    return any(tok.startswith(p) for tok in tokens(name) for p in patterns)


def string_leaves(value):
    if isinstance(value, str):
        yield value
    elif isinstance(value, list):
        for item in value:
            yield from string_leaves(item)


def is_literal(value) -> bool:
    if isinstance(value, bool) or value is None:
        return False
    if isinstance(value, Text) and (value.expr or value.interpolations):
        return False
    return isinstance(value, (str, int, float))


class _ValueDetector(Detector):
    family = SECURITY

    def matches(self, name, value) -> str:
        """Return a detail message when the rule fires, else ''."""
        raise NotImplementedError

    def _check(self, node):
        detail = self.matches(node.name, node.value)
        return [self.smell(node.span, detail)] if detail else []

    def check_attribute(self, node):
        return self._check(node)

    def check_variable(self, node):
        return self._check(node)


class EmptyPassword(_ValueDetector):
    code = "security_empty_password"
    label = "Empty password"
    reads = ("password_patterns",)

    def matches(self, name, value):
        if isinstance(value, str) and value == "" and name_matches(name, self.config.password_patterns):
            return f"'{name}' is empty"
        return ""


class HardcodedSecret(_ValueDetector):
    code = "security_hardcoded_secret"
    label = "Hard-coded secret"
    reads = ("secret_key_patterns",)

    def matches(self, name, value):
        if not is_literal(value) or value == "":
            return ""
        if name_matches(name, self.config.secret_key_patterns):
            return f"'{name}' holds a literal value"
        return ""


class AdminByDefault(_ValueDetector):
    code = "security_admin_by_default"
    label = "Admin by default"
    reads = ("user_patterns", "default_admin_names")

    def matches(self, name, value):
        if not isinstance(value, str) or not name_matches(name, self.config.user_patterns):
            return ""
        if value.strip().lower() in self.config.default_admin_names:
            return f"'{name}' defaults to {value.strip()}"
        return ""


class InvalidIpBinding(_ValueDetector):
    code = "security_invalid_ip_binding"
    label = "Invalid IP address binding"
    reads = ("invalid_bind_addresses",)

    def matches(self, name, value):
        for leaf in string_leaves(value):
            if leaf.strip().lower() in self.config.invalid_bind_addresses:
                return f"binds to {leaf.strip()}"
        return ""


class HttpWithoutTls(_ValueDetector):
    code = "security_http_without_tls"
    label = "Use of HTTP without TLS"
    reads = ("insecure_url_scheme",)

    def __init__(self, tech, config=None):
        super().__init__(tech, config)
        scheme = re.escape(self.config.insecure_url_scheme)
        self.pattern = re.compile(rf"(?<![a-z0-9+.\-]){scheme}://", re.I)

    def matches(self, name, value):
        for leaf in string_leaves(value):
            if self.pattern.search(leaf):
                return f"'{name}' uses {self.config.insecure_url_scheme}://"
        return ""


class WeakCrypto(_ValueDetector):
    code = "security_weak_crypto"
    label = "Use of weak cryptography algorithms"
    reads = ("weak_crypto_terms",)

    def matches(self, name, value):
        terms = set(self.config.weak_crypto_terms)
        found = terms.intersection(tokens(name))
        for leaf in string_leaves(value):
            found |= terms.intersection(tokens(leaf))
        return f"uses {', '.join(sorted(found))}" if found else ""


class SuspiciousComment(Detector):
    code = "security_suspicious_comment"
    label = "Suspicious comment"
    family = SECURITY
    reads = ("suspicious_comment_words",)

    def check_comment(self, node):
        hits = set(self.config.suspicious_comment_words).intersection(tokens(node.text))
        if hits:
            return [self.smell(node.span, f"mentions {', '.join(sorted(hits))}")]
        return []


class NoIntegrityCheck(Detector):
    code = "security_no_integrity_check"
    label = "No integrity check"
    family = SECURITY
    reads = ("download_commands", "checksum_markers", "command_attributes")

    def downloads(self, au) -> bool:
        commands = self.config.download_commands
        if au.type.lower() in commands:
            return True
        for text in command_strings(au, self.config.command_attributes):
            for statement in shell.split_statements(shell.join_continuations(text), pipes=True):
                if shell.command_word(statement).lower() in commands:
                    return True
        return False

    def check_atomic_unit(self, node):
        if not self.downloads(node):
            return []
        haystack = [node.span.raw_code]
        for attr in node.attributes:
            haystack.append(attr.name)
            haystack.extend(string_leaves(attr.value))
        text = "\n".join(haystack).lower()
        if any(marker in text for marker in self.config.checksum_markers):
            return []
        return [self.smell(node.span, "download without checksum verification")]


_SELECTOR = re.compile(r"\?\s*\{")
_SELECTOR_DEFAULT = re.compile(r"(?<![\w$])default\s*=>")


class _SelectorStrategy:
    """Puppet selectors live inside values: `$x ? { 'a' => 1 }`."""

    def missing(self, value) -> bool:
        return (
            isinstance(value, Text)
            and value.expr
            and bool(_SELECTOR.search(value))
            and not _SELECTOR_DEFAULT.search(value)
        )


class _NoSelectors:
    def missing(self, value) -> bool:
        return False


class MissingDefault(Detector):
    code = "security_missing_default"
    label = "Missing default case statement"
    family = SECURITY

    def __init__(self, tech, config=None):
        super().__init__(tech, config)
        self.selectors = _SelectorStrategy() if self.tech is TechnologyId.PUPPET else _NoSelectors()

    def check_unit_block(self, node):
        if node.default_branch is False:
            return [self.smell(node.span, f"'{node.name}' has no default branch")]
        return []

    def _check(self, node):
        if self.selectors.missing(node.value):
            return [self.smell(node.span, "selector has no default")]
        return []

    def check_attribute(self, node):
        return self._check(node)

    def check_variable(self, node):
        return self._check(node)


SECURITY_DETECTORS = (
    AdminByDefault,
    EmptyPassword,
    HardcodedSecret,
    InvalidIpBinding,
    SuspiciousComment,
    HttpWithoutTls,
    WeakCrypto,
    NoIntegrityCheck,
    MissingDefault,
)
