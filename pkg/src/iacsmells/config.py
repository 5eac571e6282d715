"""Analysis configuration: thresholds and keyword lists read by the detectors.

Configuration files are INI documents with a single ``[smells]`` section::

    [smells]
    long_statement_max = 100
    suspicious_comment_words = todo, fixme, xxx

List values are comma separated. Keys that are not set keep their defaults;
unknown keys are rejected.
"""

import configparser
import dataclasses
import os
from dataclasses import dataclass, fields
from importlib import resources
from typing import Optional

from iacsmells.parsers.base import TechnologyId

TECHS = tuple(t.value for t in TechnologyId)


class ConfigError(Exception):
    def __init__(self, message: str, key: Optional[str] = None):
        self.key = key
        super().__init__(f"{key}: {message}" if key else message)


@dataclass(frozen=True)
class AnalysisConfig:
    # design & implementation
    long_statement_max: int = 140
    long_statement_inclusive: bool = False
    long_resource_max_lines: int = 12
    too_many_vars_ratio: float = 0.3
    duplicate_min_attrs: int = 2
    alignment_gap: int = 1
    misplaced_order_ansible: tuple = ()
    misplaced_order_chef: tuple = ()
    misplaced_order_docker: tuple = ()
    misplaced_order_puppet: tuple = ("ensure",)
    misplaced_order_terraform: tuple = ()
    unguarded_variable_techs: tuple = ("puppet",)
    command_attributes: tuple = (
        "command", "cmd", "onlyif", "unless", "not_if", "only_if", "args",
        "free_form", "code",
    )
    # security
    suspicious_comment_words: tuple = ("todo", "fixme", "hack", "bug", "later", "ticket")
    secret_key_patterns: tuple = ("pass", "pwd", "secret", "key", "token", "user")
    password_patterns: tuple = ("pass", "pwd")
    user_patterns: tuple = ("user", "role", "login")
    weak_crypto_terms: tuple = ("md5", "sha1", "arcfour")
    insecure_url_scheme: str = "http"
    invalid_bind_addresses: tuple = ("0.0.0.0", "::")
    download_commands: tuple = ("wget", "curl")
    checksum_markers: tuple = ("checksum", "gpg", "sha256", "hash")
    default_admin_names: tuple = ("admin", "root")

    def misplaced_order(self, tech) -> tuple:
        return getattr(self, f"misplaced_order_{TechnologyId(tech).value}")

    def replace(self, **changes) -> "AnalysisConfig":
        unknown = set(changes) - {f.name for f in fields(self)}
        if unknown:
            key = sorted(unknown)[0]
            raise ConfigError("unknown configuration key", key)
        return _validated(dataclasses.replace(self, **changes))


# lists allowed to be empty (everything else must keep at least one entry)
_MAY_BE_EMPTY = {
    "misplaced_order_ansible", "misplaced_order_chef", "misplaced_order_docker",
    "misplaced_order_puppet", "misplaced_order_terraform", "unguarded_variable_techs",
}
_POSITIVE_INTS = {
    "long_statement_max", "long_resource_max_lines", "duplicate_min_attrs", "alignment_gap",
}


def _validated(cfg: AnalysisConfig) -> AnalysisConfig:
    for key in _POSITIVE_INTS:
        value = getattr(cfg, key)
        if isinstance(value, bool) or not isinstance(value, int) or value < 1:
            raise ConfigError(f"must be a positive integer, got {value!r}", key)
    ratio = cfg.too_many_vars_ratio
    if isinstance(ratio, bool) or not isinstance(ratio, (int, float)) or not 0 < ratio <= 1:
        raise ConfigError(f"must be in (0, 1], got {ratio!r}", "too_many_vars_ratio")
    if not isinstance(cfg.long_statement_inclusive, bool):
        raise ConfigError("must be a boolean", "long_statement_inclusive")
    for f in fields(cfg):
        value = getattr(cfg, f.name)
        if isinstance(value, tuple) and not value and f.name not in _MAY_BE_EMPTY:
            raise ConfigError("list must not be empty", f.name)
    for tech in cfg.unguarded_variable_techs:
        if tech not in TECHS:
            raise ConfigError(f"unknown technology {tech!r}", "unguarded_variable_techs")
    if not cfg.insecure_url_scheme:
        raise ConfigError("must not be empty", "insecure_url_scheme")
    return cfg


def _convert(key: str, raw: str, default):
    raw = raw.strip()
    if isinstance(default, bool):
        lowered = raw.lower()
        if lowered in ("true", "yes", "on", "1"):
            return True
        if lowered in ("false", "no", "off", "0"):
            return False
        raise ConfigError(f"expected a boolean, got {raw!r}", key)
    if isinstance(default, int):
        try:
            return int(raw)
        except ValueError:
            raise ConfigError(f"expected an integer, got {raw!r}", key) from None
    if isinstance(default, float):
        try:
            return float(raw)
        except ValueError:
            raise ConfigError(f"expected a number, got {raw!r}", key) from None
    if isinstance(default, tuple):
        return tuple(item.strip().lower() for item in raw.split(",") if item.strip())
    return raw.lower()


def load_config(path: Optional[str] = None) -> AnalysisConfig:
    """Overlay the keys of an INI file on the built-in defaults."""
    defaults = AnalysisConfig()
    if path is None:
        return defaults
    parser = configparser.ConfigParser(
        comment_prefixes=("#", ";"), inline_comment_prefixes=None, interpolation=None
    )
    parser.optionxform = str
    try:
        with open(path, encoding="utf-8") as f:
            parser.read_file(f)
    except OSError as e:
        raise ConfigError(f"cannot read configuration file {path}: {e.strerror}") from None
    except configparser.Error as e:
        raise ConfigError(f"malformed configuration file {path}: {e}") from None
    extra = [s for s in parser.sections() if s != "smells"]
    if extra:
        raise ConfigError(f"unknown section [{extra[0]}] in {path}")
    if not parser.has_section("smells"):
        return defaults
    known = {f.name: getattr(defaults, f.name) for f in fields(defaults)}
    changes = {}
    for key, raw in parser.items("smells"):
        if key not in known:
            raise ConfigError("unknown configuration key", key)
        changes[key] = _convert(key, raw, known[key])
    return defaults.replace(**changes)


def default_config_path() -> str:
    return str(resources.files("iacsmells") / "configs" / "default.ini")


def dump_config(cfg: AnalysisConfig) -> str:
    lines = ["[smells]"]
    for f in fields(cfg):
        value = getattr(cfg, f.name)
        if isinstance(value, tuple):
            value = ", ".join(value)
        elif isinstance(value, bool):
            value = "true" if value else "false"
        lines.append(f"{f.name} = {value}".rstrip())
    return "\n".join(lines) + "\n"


__all__ = ["AnalysisConfig", "ConfigError", "load_config", "default_config_path", "dump_config"]

if __name__ == "__main__":  # regenerate the shipped defaults
    with open(os.path.join(os.path.dirname(__file__), "configs", "default.ini"), "w") as out:
        out.write("# Built-in defaults. Copy and edit, then pass with --config.\n")
        out.write(dump_config(AnalysisConfig()))
