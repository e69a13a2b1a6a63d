"""Execute fully parameterized commands against a table model."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from decimal import Decimal

from .errors import (
    ColOutOfRange,
    EmptyAggregate,
    RowOutOfRange,
    UnsupportedComparison,
)
from .page_model import Cell, ColumnDescriptor, TableModel, parse_number

AGG_FNS = ("average", "sum", "min", "max", "count")
COMPARATORS = ("gt", "lt", "eq")


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Filter:
    table_id: str
    col: int
    cmp: str  # gt | lt | eq
    literal: Decimal | str
    target: str  # new_table | in_place


@dataclass(frozen=True)
class Sort:
    table_id: str
    col: int
    order: str  # asc | desc
    target: str


@dataclass(frozen=True)
class Aggregate:
    table_id: str
    fn: str
    col: int


@dataclass(frozen=True)
class QueryCell:
    table_id: str
    row: int
    col: int


@dataclass(frozen=True)
class DefineAttribute:
    table_id: str
    col: int
    term: str


Command = Filter | Sort | Aggregate | QueryCell | DefineAttribute


def _json_number(value: Decimal | str):
    if isinstance(value, Decimal):
        if value == value.to_integral_value():
            return int(value)
        return float(value)
    return value


def command_to_json(cmd: Command) -> dict:
    if isinstance(cmd, Filter):
        return {"intent": "filter_rows", "table_id": cmd.table_id,
                "column": cmd.col, "cmp": cmd.cmp,
                "literal": _json_number(cmd.literal), "target": cmd.target}
    if isinstance(cmd, Sort):
        return {"intent": "sort_rows", "table_id": cmd.table_id,
                "column": cmd.col, "order": cmd.order, "target": cmd.target}
    if isinstance(cmd, Aggregate):
        return {"intent": "aggregate", "table_id": cmd.table_id,
                "fn": cmd.fn, "column": cmd.col}
    if isinstance(cmd, QueryCell):
        return {"intent": "query_cell", "table_id": cmd.table_id,
                "row": cmd.row, "column": cmd.col}
    if isinstance(cmd, DefineAttribute):
        return {"intent": "define_attribute", "table_id": cmd.table_id,
                "column": cmd.col, "term": cmd.term}
    raise TypeError(f"not a command: {cmd!r}")


def canonical_command_json(cmd: Command) -> str:
    return json.dumps(command_to_json(cmd), sort_keys=True,
                      separators=(",", ":"))


# ---------------------------------------------------------------------------
# Outcomes
# ---------------------------------------------------------------------------

@dataclass
class ResultTable:
    columns: list[ColumnDescriptor]
    rows: list[list[Cell]]
    provenance_command: Command | None = None
    skipped_count: int = 0

    @property
    def nrows(self) -> int:
        return len(self.rows)

    def to_json(self) -> dict:
        return {
            "columns": [{"label": c.raw_label, "term": c.display_term(),
                         "type": c.col_type} for c in self.columns],
            "rows": [[cell.raw_text for cell in row] for row in self.rows],
            "command": (command_to_json(self.provenance_command)
                        if self.provenance_command else None),
        }


@dataclass
class Scalar:
    value: Decimal | str
    units_label: str
    skipped_count: int = 0
    command: Command | None = None


@dataclass
class Ack:
    description: str
    term: str | None = None


@dataclass
class NeedsClarification:
    prompt_id: str
    prompt_text: str


Outcome = ResultTable | Scalar | Ack | NeedsClarification


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------

def _check_col(table, col: int) -> ColumnDescriptor:
    if not 0 <= col < len(table.columns):
        raise ColOutOfRange(col, len(table.columns))
    return table.columns[col]


def _cell_number(cell: Cell) -> Decimal | None:
    if cell.numeric_value is not None:
        return cell.numeric_value
    return parse_number(cell.raw_text)


def filter_rows(table, col: int, cmp: str,
                literal: Decimal | str) -> ResultTable:
    """Rows whose cell at `col` satisfies the comparator, source order kept.

    gt/lt require a numeric column; unparseable cells never match and are
    counted as skipped. eq on text compares case-insensitively.
    """
    column = _check_col(table, col)
    numeric = column.col_type == "numeric"
    if cmp in ("gt", "lt") and not numeric:
        raise UnsupportedComparison(column.raw_label)

    lit_num = literal if isinstance(literal, Decimal) else parse_number(str(literal))
    out: list[list[Cell]] = []
    skipped = 0
    for row in table.rows:
        cell = row[col]
        if numeric and lit_num is not None:
            n = _cell_number(cell)
            if n is None:
                skipped += 1
                continue
            keep = ((cmp == "gt" and n > lit_num)
                    or (cmp == "lt" and n < lit_num)
                    or (cmp == "eq" and n == lit_num))
        else:
            keep = (cmp == "eq"
                    and cell.raw_text.strip().casefold()
                    == str(literal).strip().casefold())
        if keep:
            out.append(row)
    return ResultTable(columns=table.columns, rows=out, skipped_count=skipped)


def sort_rows(table, col: int, order: str) -> ResultTable:
    """Stable sort: numeric columns by value (unparseable last), text columns
    case-insensitive lexicographic."""
    column = _check_col(table, col)
    numeric = column.col_type == "numeric"
    reverse = order == "desc"

    if numeric:
        parseable = [r for r in table.rows if _cell_number(r[col]) is not None]
        rest = [r for r in table.rows if _cell_number(r[col]) is None]
        parseable.sort(key=lambda r: _cell_number(r[col]), reverse=reverse)
        rows = parseable + rest
    else:
        rows = sorted(table.rows, key=lambda r: r[col].raw_text.casefold(),
                      reverse=reverse)
    return ResultTable(columns=table.columns, rows=list(rows))


def aggregate(table, fn: str, col: int) -> Scalar:
    column = _check_col(table, col)
    if fn == "count":
        return Scalar(value=Decimal(len(table.rows)),
                      units_label=column.display_term(), skipped_count=0)
    values = []
    skipped = 0
    for row in table.rows:
        n = _cell_number(row[col])
        if n is None:
            skipped += 1
        else:
            values.append(n)
    if not values:
        raise EmptyAggregate(column.raw_label)
    if fn == "average":
        value = sum(values, Decimal(0)) / len(values)
    elif fn == "sum":
        value = sum(values, Decimal(0))
    elif fn == "min":
        value = min(values)
    elif fn == "max":
        value = max(values)
    else:
        raise ValueError(f"unknown aggregate fn {fn!r}")
    return Scalar(value=value, units_label=column.display_term(),
                  skipped_count=skipped)


def query_cell(table, row: int, col: int) -> Scalar:
    if not 0 <= row < len(table.rows):
        raise RowOutOfRange(row, len(table.rows))
    column = _check_col(table, col)
    return Scalar(value=table.rows[row][col].raw_text,
                  units_label=column.display_term(), skipped_count=0)


def execute(command: Command, table, *, dictionary=None,
            scope_host: str | None = None, on_vocab_change=None) -> Outcome:
    """Dispatch a command against the bound table.

    DefineAttribute writes through to the vocabulary dictionary and invokes
    `on_vocab_change(col, term)` so the session can re-resolve its columns.
    """
    if isinstance(command, Filter):
        rt = filter_rows(table, command.col, command.cmp, command.literal)
        rt.provenance_command = command
        return rt
    if isinstance(command, Sort):
        rt = sort_rows(table, command.col, command.order)
        rt.provenance_command = command
        return rt
    if isinstance(command, Aggregate):
        sc = aggregate(table, command.fn, command.col)
        sc.command = command
        return sc
    if isinstance(command, QueryCell):
        sc = query_cell(table, command.row, command.col)
        sc.command = command
        return sc
    if isinstance(command, DefineAttribute):
        column = _check_col(table, command.col)
        if dictionary is not None and scope_host is not None:
            dictionary.learn_definition(scope_host, column.raw_label or command.term,
                                        command.term)
        column.resolved_term = command.term
        if on_vocab_change is not None:
            on_vocab_change(command.col, command.term)
        return Ack(description=f"{command.term} assigned", term=command.term)
    raise TypeError(f"not a command: {command!r}")
