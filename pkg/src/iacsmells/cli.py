"""Command-line entry point.

Exit status: 0 when every file was analyzed (smells or not), 1 on usage,
configuration or fatal I/O errors, 2 when at least one file failed to parse.
"""

import os
import sys

import click

from iacsmells.analysis import DESIGN, SECURITY, SmellReport, analyze
from iacsmells.config import ConfigError, load_config
from iacsmells.parsers import TechnologyId, parse_path
from iacsmells.report import TABLE_FORMATS, emit_csv, emit_table

EXIT_OK = 0
EXIT_FATAL = 1
EXIT_PARSE_FAILED = 2


def analyze_path(path, tech, family, config=None, module=False):
    """Parse ``path`` and run one smell family; returns (report, warnings)."""
    outcome = parse_path(path, tech, module=module)
    report = analyze(outcome.result, tech, family, config)
    failed = {p for p, _ in outcome.failed_files}
    return (
        SmellReport(
            report.findings,
            [p for p in report.files_analyzed if p not in failed],
            sorted(outcome.failed_files),
        ),
        outcome.warnings,
    )


@click.command(context_settings={"help_option_names": ["-h", "--help"]})
@click.argument("path", type=click.Path(path_type=str))
@click.option(
    "--tech",
    required=True,
    type=click.Choice([t.value for t in TechnologyId]),
    help="Technology of the scripts.",
)
@click.option(
    "--smells",
    "family",
    type=click.Choice([DESIGN, SECURITY]),
    default=SECURITY,
    show_default=True,
    help="Smell family to detect.",
)
@click.option("--config", "config_path", type=click.Path(path_type=str), help="INI file overriding the defaults.")
@click.option(
    "--tableformat",
    type=click.Choice(TABLE_FORMATS),
    default="prettytable",
    show_default=True,
    help="Presentation format of the summary tables.",
)
@click.option("--csv", "as_csv", is_flag=True, help="Print one CSV row per smell instead of tables.")
@click.option("--module", is_flag=True, help="Treat PATH as a single module.")
@click.option("-v", "--verbose", is_flag=True, help="Print parser warnings.")
def cli(path, tech, family, config_path, tableformat, as_csv, module, verbose):
    """Detect smells in the infrastructure-as-code scripts under PATH."""
    try:
        config = load_config(config_path)
    except ConfigError as e:
        click.echo(f"error: configuration: {e}", err=True)
        return EXIT_FATAL
    if not os.path.exists(path):
        click.echo(f"error: no such file or directory: {path}", err=True)
        return EXIT_FATAL
    try:
        report, warnings = analyze_path(path, tech, family, config, module)
    except OSError as e:
        click.echo(f"error: {e}", err=True)
        return EXIT_FATAL

    if verbose:
        for w in warnings:
            click.echo(f"warning: {w}", err=True)
    for failed, reason in report.files_failed:
        click.echo(f"error: cannot parse {failed}: {reason}", err=True)

    out = emit_csv(report) if as_csv else emit_table(report, tableformat, family)
    click.echo(out, nl=False)
    return EXIT_PARSE_FAILED if report.files_failed else EXIT_OK


def main(argv=None) -> int:
    try:
        code = cli.main(args=argv, prog_name="iacsmells", standalone_mode=False)
    except click.exceptions.Exit as e:
        code = e.exit_code
    except click.ClickException as e:
        e.show()
        code = EXIT_FATAL
    except click.exceptions.Abort:
        click.echo("aborted", err=True)
        code = EXIT_FATAL
    if argv is None:
        sys.exit(code or 0)
    return code or 0


if __name__ == "__main__":
    main()
