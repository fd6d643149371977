"""Deterministic number and table formatting for reports and TSV output."""

from __future__ import annotations


def format_number(value: float, sig: int = 9) -> str:
    """Render a float with up to ``sig`` significant digits, no exponent noise.

    Output is a pure function of the value, so repeated renders of the same
    data are byte-identical.
    """
    return format(float(value), f".{sig}g")


def align_columns(rows: list[list[str]]) -> str:
    """Left-align rows (first row is the header) into a plain-text table."""
    if not rows:
        return ""
    widths = [max(len(row[i]) for row in rows) for i in range(len(rows[0]))]
    lines = []
    for row in rows:
        cells = [cell.ljust(width) for cell, width in zip(row, widths)]
        lines.append("  ".join(cells).rstrip())
    return "\n".join(lines) + "\n"


def tsv_lines(rows: list[list[str]]) -> str:
    """Join rows into TSV text, one header row expected first."""
    return "".join("\t".join(row) + "\n" for row in rows)
