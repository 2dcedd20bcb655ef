"""Table data model: validation, flat-format serialization/parsing, normalization.

Two layouts are supported. An attribute-value table is a list of
(header, value) rows, as in restaurant or biography summaries. A matrix
table has a row-header axis and a column-header axis with one optional
value per (row, column) slot, as in sports box scores.

The flat text format writes cells separated by "|" and rows separated by
the literal "<NEWLINE>" tag (a 9-character token, not a control
character), so a whole table is a single line of text.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, NamedTuple

NEWLINE_TOKEN = "<NEWLINE>"
COLUMN_SEPARATOR = "|"

_QUOTE_CHARS = "\"'`“”‘’«»"


class Orientation(str, Enum):
    ATTRIBUTE_VALUE = "attribute_value"
    MATRIX = "matrix"


class InvalidTable(ValueError):
    """Operation requires a structurally valid table and got one that is not."""

    def __init__(self, report: "ValidityReport"):
        self.report = report
        super().__init__(f"invalid table: {report.violations}")


class EmptyInput(ValueError):
    """Flat-format input was blank."""


class StructuralError(ValueError):
    """Flat-format rows disagree on cell count; this is what the error-rate metric counts."""

    def __init__(self, widths: Iterable[int]):
        self.widths = list(widths)
        super().__init__(f"ragged flat table: row widths {self.widths}")


class Violation(NamedTuple):
    kind: str  # "row_width" | "row_count"
    index: int  # row index, or -1 for a table-level violation
    expected: int
    observed: int


@dataclass(frozen=True)
class ValidityReport:
    valid: bool
    violations: tuple[Violation, ...] = ()


class CellTuple(NamedTuple):
    """Normalized (row header, column header, value); row header is "" for attribute-value."""

    row_header: str
    col_header: str
    value: str


def normalize_text(text: str) -> str:
    """Lowercase, collapse whitespace runs, strip outer whitespace and quotes."""
    stripped = text.strip().strip(_QUOTE_CHARS).lower()
    return " ".join(stripped.split())


def dedupe_headers(headers: Iterable[str]) -> list[str]:
    """Suffix repeated headers with " #2", " #3", ... (repeats judged after normalization).

    Suffixing instead of merging preserves the cell count, which both the
    validity check and exact-match F1 depend on.
    """
    result: list[str] = []
    seen: set[str] = set()
    for text in headers:
        candidate = text
        n = 1
        while normalize_text(candidate) in seen:
            n += 1
            candidate = f"{text} #{n}".strip()
        result.append(candidate)
        seen.add(normalize_text(candidate))
    return result


@dataclass(frozen=True)
class Table:
    """Immutable table value; use the `matrix` / `attribute_value` constructors.

    Matrix layout uses `row_headers`, `col_headers` and the `cells` grid
    (None = absent). Attribute-value layout uses `rows` of
    (header, optional value) pairs. Absent is the canonical form of an
    empty cell; parsers map empty strings to absent.
    """

    orientation: Orientation
    row_headers: tuple[str, ...] = ()
    col_headers: tuple[str, ...] = ()
    cells: tuple[tuple[str | None, ...], ...] = ()
    rows: tuple[tuple[str, str | None], ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "row_headers", tuple(self.row_headers))
        object.__setattr__(self, "col_headers", tuple(self.col_headers))
        object.__setattr__(self, "cells", tuple(tuple(row) for row in self.cells))
        object.__setattr__(self, "rows", tuple((h, v) for h, v in self.rows))

    @classmethod
    def attribute_value(cls, rows: Iterable[tuple[str, str | None]]) -> "Table":
        return cls(orientation=Orientation.ATTRIBUTE_VALUE, rows=tuple(rows))

    @classmethod
    def matrix(
        cls,
        row_headers: Iterable[str],
        col_headers: Iterable[str],
        cells: Iterable[Iterable[str | None]],
    ) -> "Table":
        return cls(
            orientation=Orientation.MATRIX,
            row_headers=tuple(row_headers),
            col_headers=tuple(col_headers),
            cells=tuple(tuple(row) for row in cells),
        )

    @property
    def shape(self) -> tuple[int, int]:
        """(data rows, value columns); attribute-value tables have one value column."""
        if self.orientation is Orientation.ATTRIBUTE_VALUE:
            return (len(self.rows), 1)
        return (len(self.row_headers), len(self.col_headers))

    def present_cell_count(self) -> int:
        if self.orientation is Orientation.ATTRIBUTE_VALUE:
            return sum(1 for _, v in self.rows if v is not None)
        return sum(1 for row in self.cells for v in row if v is not None)


def validate(table: Table) -> ValidityReport:
    """Check rectangularity: every row has one shared cell count, every column likewise.

    Malformed structure is reported, not raised; attribute-value tables
    are rectangular by construction (each row is a header/value pair).
    """
    if table.orientation is Orientation.ATTRIBUTE_VALUE:
        return ValidityReport(valid=True)

    violations: list[Violation] = []
    expected_width = len(table.col_headers)
    for i, row in enumerate(table.cells):
        if len(row) != expected_width:
            violations.append(Violation("row_width", i, expected_width, len(row)))
    if len(table.cells) != len(table.row_headers):
        violations.append(Violation("row_count", -1, len(table.row_headers), len(table.cells)))
    return ValidityReport(valid=not violations, violations=tuple(violations))


def header_issues(table: Table) -> list[str]:
    """Non-structural header problems: empty after normalization, or duplicates within an axis."""
    issues: list[str] = []
    if table.orientation is Orientation.ATTRIBUTE_VALUE:
        axes = [("header", [h for h, _ in table.rows])]
    else:
        axes = [("row header", list(table.row_headers)), ("column header", list(table.col_headers))]
    for label, headers in axes:
        seen: set[str] = set()
        for i, text in enumerate(headers):
            norm = normalize_text(text)
            if not norm:
                issues.append(f"{label} {i} is empty after normalization")
            elif norm in seen:
                issues.append(f"{label} {i} duplicates {norm!r}")
            seen.add(norm)
    return issues


def serialize_flat(table: Table) -> str:
    """Render the flat single-line format; the matrix corner is an empty leading cell."""
    report = validate(table)
    if not report.valid:
        raise InvalidTable(report)

    if table.orientation is Orientation.ATTRIBUTE_VALUE:
        lines = [" | ".join([header, value or ""]) for header, value in table.rows]
    else:
        lines = [" | ".join(["", *table.col_headers])]
        for header, row in zip(table.row_headers, table.cells):
            lines.append(" | ".join([header, *(v or "" for v in row)]))
    return NEWLINE_TOKEN.join(lines)


def parse_flat(text: str, orientation: Orientation) -> Table:
    """Parse the flat format with no repair: ragged rows raise StructuralError.

    Cells are whitespace-trimmed around "|". Empty cells become absent.
    Duplicate headers are suffixed; empty header cells are kept verbatim
    so that model output is scored as produced.
    """
    if not text.strip():
        raise EmptyInput("blank flat-table text")

    grid = [
        [cell.strip() for cell in line.split(COLUMN_SEPARATOR)]
        for line in text.split(NEWLINE_TOKEN)
    ]
    widths = [len(row) for row in grid]
    if len(set(widths)) > 1:
        raise StructuralError(widths)

    if orientation is Orientation.ATTRIBUTE_VALUE:
        headers = dedupe_headers(row[0] for row in grid)
        rows = []
        for header, row in zip(headers, grid):
            value = " | ".join(row[1:]) if len(row) > 1 else ""
            rows.append((header, value if value else None))
        return Table.attribute_value(rows)

    header_row, *data_rows = grid
    col_headers = dedupe_headers(header_row[1:])  # leading cell is the corner, dropped
    row_headers = dedupe_headers(row[0] for row in data_rows)
    cells = tuple(tuple(v if v else None for v in row[1:]) for row in data_rows)
    return Table.matrix(row_headers, col_headers, cells)


def to_tuples(table: Table) -> set[CellTuple]:
    """One normalized tuple per present, non-empty cell; the unit of cell F1."""
    report = validate(table)
    if not report.valid:
        raise InvalidTable(report)

    tuples: set[CellTuple] = set()
    if table.orientation is Orientation.ATTRIBUTE_VALUE:
        for header, value in table.rows:
            if value is not None and normalize_text(value):
                tuples.add(CellTuple("", normalize_text(header), normalize_text(value)))
        return tuples
    for r, row in enumerate(table.cells):
        for c, value in enumerate(row):
            if value is not None and normalize_text(value):
                tuples.add(
                    CellTuple(
                        normalize_text(table.row_headers[r]),
                        normalize_text(table.col_headers[c]),
                        normalize_text(value),
                    )
                )
    return tuples


def table_to_json(table: Table) -> dict:
    """Canonical JSON form, the interchange format for corpora and predictions."""
    if table.orientation is Orientation.ATTRIBUTE_VALUE:
        return {
            "orientation": table.orientation.value,
            "rows": [{"header": h, "value": v} for h, v in table.rows],
        }
    return {
        "orientation": table.orientation.value,
        "row_headers": list(table.row_headers),
        "col_headers": list(table.col_headers),
        "cells": [list(row) for row in table.cells],
    }


def table_from_json(data: object) -> Table:
    """Parse canonical JSON; raises ValueError on any schema problem."""
    if not isinstance(data, dict):
        raise ValueError("table JSON must be an object")

    orientation = data.get("orientation")
    if orientation is None:
        orientation = Orientation.ATTRIBUTE_VALUE.value if "rows" in data else Orientation.MATRIX.value
    if orientation not in (Orientation.ATTRIBUTE_VALUE.value, Orientation.MATRIX.value):
        raise ValueError(f"unknown orientation {orientation!r}")

    if orientation == Orientation.ATTRIBUTE_VALUE.value:
        rows = data.get("rows")
        if not isinstance(rows, list):
            raise ValueError('attribute-value table JSON requires a "rows" list')
        parsed = []
        for i, item in enumerate(rows):
            if not isinstance(item, dict) or not isinstance(item.get("header"), str):
                raise ValueError(f'row {i} must be an object with a string "header"')
            value = item.get("value")
            if value is not None and not isinstance(value, str):
                raise ValueError(f"row {i} value must be a string or null")
            parsed.append((item["header"], value))
        return Table.attribute_value(parsed)

    for key in ("row_headers", "col_headers", "cells"):
        if not isinstance(data.get(key), list):
            raise ValueError(f'matrix table JSON requires a "{key}" list')
    if not all(isinstance(h, str) for h in data["row_headers"] + data["col_headers"]):
        raise ValueError("headers must be strings")
    cells = []
    for i, row in enumerate(data["cells"]):
        if not isinstance(row, list):
            raise ValueError(f"cells row {i} must be a list")
        for v in row:
            if v is not None and not isinstance(v, str):
                raise ValueError(f"cells row {i} values must be strings or null")
        cells.append(tuple(row))
    return Table.matrix(data["row_headers"], data["col_headers"], cells)


def table_to_json_text(table: Table) -> str:
    """Deterministic single-line JSON rendering of the canonical form."""
    return json.dumps(table_to_json(table), sort_keys=True, ensure_ascii=False)


def _md_escape(value: str) -> str:
    return value.replace("|", "\\|")


def render_markdown(table: Table) -> str:
    """Human-oriented pipe-table rendering; write-only, never parsed back."""
    report = validate(table)
    if not report.valid:
        raise InvalidTable(report)

    if table.orientation is Orientation.ATTRIBUTE_VALUE:
        lines = ["| Attribute | Value |", "| --- | --- |"]
        for header, value in table.rows:
            lines.append(f"| {_md_escape(header)} | {_md_escape(value or '')} |")
        return "\n".join(lines)

    header = "| | " + " | ".join(_md_escape(h) for h in table.col_headers) + " |"
    separator = "| --- " * (len(table.col_headers) + 1) + "|"
    lines = [header, separator]
    for row_header, row in zip(table.row_headers, table.cells):
        values = " | ".join(_md_escape(v or "") for v in row)
        lines.append(f"| {_md_escape(row_header)} | {values} |")
    return "\n".join(lines)
