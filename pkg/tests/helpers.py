"""Shared test helpers: fixture loading and direct table construction."""

from __future__ import annotations

import os
import uuid

from tabletalk.page_model import (
    Cell,
    ColumnDescriptor,
    PageSnapshot,
    TableModel,
    infer_column_type,
    parse_number,
    parse_page,
)

FIXTURES = os.path.join(os.path.dirname(__file__), "fixtures")
ROSTER = os.path.join(FIXTURES, "roster.html")
ROSTER_BARE_A = os.path.join(FIXTURES, "roster_bare_a.html")

# hand-walked expectation for the roster fixture (NAME, POS, APP, G, A)
ROSTER_GRID = [
    ["Alice Mercer", "GK", "35", "0", "1"],
    ["Ben Okafor", "DF", "36", "2", "3"],
    ["Carlos Vega", "MF", "28", "5", "7"],
    ["Dana Whitfield", "FW", "40", "18", "6"],
    ["Elliot Shah", "DF", "22", "1", "0"],
    ["Farah Lindqvist", "MF", "31", "4", "9"],
    ["Gabriel Sosa", "FW", "38", "15", "4"],
    ["Hana Petrov", "DF", "19", "0", "2"],
    ["Ivan Moreau", "MF", "27", "3", "5"],
    ["Jonas Ekberg", "GK", "12", "0", "0"],
    ["Kira Tanaka", "FW", "42", "21", "8"],
    ["Liam Doyle", "DF", "33", "2", "1"],
    ["Maya Castillo", "MF", "25", "6", "10"],
    ["Noel Baptiste", "FW", "30", "11", "3"],
    ["Oona Virtanen", "DF", "17", "0", "1"],
    ["Pavel Horak", "MF", "29", "4", "6"],
    ["Quinn Adebayo", "FW", "34", "13", "5"],
    ["Rosa Jimenez", "DF", "21", "1", "2"],
    ["Samir Haddad", "MF", "26", "2", "4"],
    ["Tessa Nyberg", "FW", "32", "9", "7"],
]
ROSTER_LABELS = ["NAME", "POS", "APP", "G", "A"]


def read_fixture(path: str) -> str:
    with open(path, encoding="utf-8") as f:
        return f.read()


def snapshot_for(html_text: str, url: str = "https://espn.com/roster",
                 received_at: int = 0) -> PageSnapshot:
    return PageSnapshot.create(url, html_text, received_at)


def roster_snapshot(path: str = ROSTER) -> PageSnapshot:
    return snapshot_for(read_fixture(path))


def roster_model(path: str = ROSTER):
    return parse_page(roster_snapshot(path))


def make_table(grid: list[list[str]], labels: list[str] | None = None,
               table_id: str = "t0") -> TableModel:
    """Build a TableModel directly from a grid of cell texts."""
    width = len(grid[0]) if grid else 0
    if labels is None:
        labels = [f"c{i}" for i in range(width)]
    columns = []
    for c in range(width):
        texts = [row[c] for row in grid]
        columns.append(ColumnDescriptor(index=c, raw_label=labels[c],
                                        col_type=infer_column_type(texts)))
    model = TableModel(table_id=table_id, source_path="0", columns=columns,
                       rows=[], table_uuid=str(uuid.uuid4()))
    for r, row in enumerate(grid):
        cells = []
        for c, text in enumerate(row):
            nv = parse_number(text) if columns[c].col_type == "numeric" else None
            cells.append(Cell(uuid=str(uuid.uuid4()), row_index=r,
                              col_index=c, raw_text=text, numeric_value=nv))
        model.rows.append(cells)
    return model


def grid_of(table) -> list[list[str]]:
    return [[cell.raw_text for cell in row] for row in table.rows]
