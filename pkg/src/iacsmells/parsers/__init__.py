import os

from iacsmells.parsers.ansible import AnsibleParser, parse_ansible
from iacsmells.parsers.base import (
    ParseError,
    ParseOutcome,
    Parser,
    TechnologyId,
)
from iacsmells.parsers.chef import ChefParser, parse_chef
from iacsmells.parsers.docker import DockerParser, parse_docker
from iacsmells.parsers.puppet import PuppetParser, parse_puppet
from iacsmells.parsers.terraform import TerraformParser, parse_terraform
from iacsmells.repr import SourceFile

PARSERS = {
    TechnologyId.ANSIBLE: AnsibleParser,
    TechnologyId.CHEF: ChefParser,
    TechnologyId.DOCKER: DockerParser,
    TechnologyId.PUPPET: PuppetParser,
    TechnologyId.TERRAFORM: TerraformParser,
}


def get_parser(tech) -> Parser:
    return PARSERS[TechnologyId(tech)]()


def parse_file(path, tech) -> ParseOutcome:
    return get_parser(tech).parse_file(path)


def parse_folder(path, tech) -> ParseOutcome:
    return get_parser(tech).parse_folder(path)


def parse_module(path, tech) -> ParseOutcome:
    return get_parser(tech).parse_module(path)


def discover(path, tech) -> list:
    return get_parser(tech).discover(path)


def parse_text(text, tech, path="<string>", warnings=None):
    """Parse source text directly; raises ParseError on syntax errors."""
    source = SourceFile(path, text)
    return get_parser(tech).parse_source(source, [] if warnings is None else warnings)


def parse_path(path, tech, module=False) -> ParseOutcome:
    if module:
        return parse_module(path, tech)
    if os.path.isdir(path):
        return parse_folder(path, tech)
    return parse_file(path, tech)


__all__ = [
    "ParseError",
    "ParseOutcome",
    "Parser",
    "TechnologyId",
    "discover",
    "get_parser",
    "parse_ansible",
    "parse_chef",
    "parse_docker",
    "parse_file",
    "parse_folder",
    "parse_module",
    "parse_path",
    "parse_puppet",
    "parse_terraform",
    "parse_text",
]
