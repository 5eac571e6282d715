"""Rendering of smell reports as CSV rows or summary tables."""

import csv
import io

from prettytable import PrettyTable

from iacsmells.analysis import FAMILIES, SMELLS, family_codes

CSV_HEADER = ("path", "line", "smell_code", "smell_label")
TABLE_FORMATS = ("prettytable", "latex")


def emit_csv(report) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for smell in report.findings:
        writer.writerow((smell.path, smell.line, smell.code, smell.label))
    return buf.getvalue()


def table_rows(report, family: str) -> list:
    """(label, code, occurrences, affected files) for every code of the family."""
    counts = report.counts_by_code()
    files = report.files_by_code()
    return [
        (SMELLS[code], code, counts.get(code, 0), len(files.get(code, ())))
        for code in family_codes(family)
    ]


def summary_rows(report) -> list:
    return [
        ("Files analyzed", len(report.files_analyzed)),
        ("Files failed", len(report.files_failed)),
        ("Smells found", len(report.findings)),
    ]


_LATEX_SPECIAL = str.maketrans({
    "\\": r"\textbackslash{}",
    "&": r"\&",
    "%": r"\%",
    "$": r"\$",
    "#": r"\#",
    "_": r"\_",
    "{": r"\{",
    "}": r"\}",
    "~": r"\textasciitilde{}",
    "^": r"\textasciicircum{}",
})


def latex_escape(text) -> str:
    return str(text).translate(_LATEX_SPECIAL)


def _latex_tabular(header, rows, align) -> str:
    lines = [f"\\begin{{tabular}}{{{align}}}", "\\hline"]
    lines.append(" & ".join(latex_escape(h) for h in header) + " \\\\")
    lines.append("\\hline")
    for row in rows:
        lines.append(" & ".join(latex_escape(c) for c in row) + " \\\\")
    lines.append("\\hline")
    lines.append("\\end{tabular}")
    return "\n".join(lines)


def emit_table(report, format: str = "prettytable", family: str = "security") -> str:
    if format not in TABLE_FORMATS:
        raise ValueError(f"unknown table format {format!r}")
    if family not in FAMILIES:
        raise ValueError(f"unknown smell family {family!r}")
    header = ("Smell", "Code", "Occurrences", "Files")
    rows = table_rows(report, family)
    summary = summary_rows(report)
    if format == "latex":
        return (
            _latex_tabular(header, rows, "llrr")
            + "\n\n"
            + _latex_tabular(("Statistic", "Value"), summary, "lr")
            + "\n"
        )
    smells = PrettyTable(header)
    smells.align["Smell"] = smells.align["Code"] = "l"
    smells.align["Occurrences"] = smells.align["Files"] = "r"
    smells.add_rows(rows)
    stats = PrettyTable(("Statistic", "Value"))
    stats.align["Statistic"] = "l"
    stats.align["Value"] = "r"
    stats.add_rows(summary)
    return f"{smells.get_string()}\n\n{stats.get_string()}\n"
