from decimal import Decimal

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import (
    ROSTER_GRID,
    ROSTER_LABELS,
    grid_of,
    read_fixture,
    roster_model,
    roster_snapshot,
    snapshot_for,
)
from tabletalk.page_model import (
    build_binding_manifest,
    diff_manifests,
    infer_column_type,
    parse_html,
    parse_number,
    parse_page,
    rebind_snapshot,
    resolve_locator,
)


# ---------------------------------------------------------------------------
# numeric grammar
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("text,expected", [
    ("35", Decimal("35")),
    ("-3.5", Decimal("-3.5")),
    ("+2", Decimal("2")),
    ("1,234", Decimal("1234")),
    ("1,234,567.89", Decimal("1234567.89")),
    ("50%", Decimal("0.5")),
    ("12.5%", Decimal("0.125")),
    (" 42 ", Decimal("42")),
])
def test_parse_number_accepts(text, expected):
    assert parse_number(text) == expected


@pytest.mark.parametrize("text", ["", "abc", "DNP", "1,23", "12 34", "3.",
                                  ".5", "1.2.3", "35x", "%", "--2"])
def test_parse_number_rejects(text):
    assert parse_number(text) is None


def test_infer_column_type_examples():
    assert infer_column_type(["35", "12", "7"]) == "numeric"
    assert infer_column_type(["35", "DNP", "7"]) == "text"
    assert infer_column_type([]) == "text"
    # 9 of 10 non-empty parse: exactly at the 90% threshold
    assert infer_column_type(["1"] * 9 + ["x"]) == "numeric"
    # empty cells don't count toward the denominator: 8/9 parse, below 90%
    assert infer_column_type(["1"] * 8 + ["x", ""]) == "text"


# ---------------------------------------------------------------------------
# parse_page on the roster fixture (hand-walked oracle)
# ---------------------------------------------------------------------------

def test_roster_parse():
    model = roster_model()
    assert len(model.tables) == 1
    t = model.tables[0]
    assert [c.raw_label for c in t.columns] == ROSTER_LABELS
    assert t.nrows == 20
    assert grid_of(t) == ROSTER_GRID
    assert t.columns[2].col_type == "numeric"
    assert t.columns[0].col_type == "text"
    assert t.rows[0][2].numeric_value == Decimal("35")
    # tooltip hint harvested on APP
    app_hints = t.columns[2].hints
    assert app_hints[0].source == "tooltip"
    assert app_hints[0].text == "Appearances"
    assert app_hints[-1].source == "header_text"


def test_no_tables():
    model = parse_page(snapshot_for("<html><body><p>hello</p></body></html>"))
    assert model.tables == []
    assert "no tables detected" in model.diagnostics


def test_header_only_table_excluded():
    html = "<table><tr><th>A</th><th>B</th></tr></table>"
    model = parse_page(snapshot_for(html))
    assert model.tables == []
    assert any("0 data rows" in d for d in model.diagnostics)


def test_single_column_table_excluded():
    html = "<table><tr><th>A</th></tr><tr><td>1</td></tr></table>"
    model = parse_page(snapshot_for(html))
    assert model.tables == []
    assert any("fewer than 2 columns" in d for d in model.diagnostics)


def test_malformed_markup_is_repaired():
    html = "<table><tr><td>a<td>b<tr><td>c<td>d</table><p>unclosed"
    model = parse_page(snapshot_for(html))
    assert len(model.tables) == 1
    assert grid_of(model.tables[0]) == [["c", "d"]]  # first row is the header
    assert [c.raw_label for c in model.tables[0].columns] == ["a", "b"]


def test_colspan_expansion_shares_uuid():
    html = ("<table><tr><th>A</th><th>B</th></tr>"
            "<tr><td colspan='2'>wide</td></tr>"
            "<tr><td>x</td><td>y</td></tr></table>")
    t = parse_page(snapshot_for(html)).tables[0]
    assert grid_of(t) == [["wide", "wide"], ["x", "y"]]
    assert t.rows[0][0].uuid == t.rows[0][1].uuid
    assert t.rows[1][0].uuid != t.rows[1][1].uuid


def test_rowspan_expansion():
    html = ("<table><tr><th>A</th><th>B</th></tr>"
            "<tr><td rowspan='2'>tall</td><td>1</td></tr>"
            "<tr><td>2</td></tr></table>")
    t = parse_page(snapshot_for(html)).tables[0]
    assert grid_of(t) == [["tall", "1"], ["tall", "2"]]
    assert t.rows[0][0].uuid == t.rows[1][0].uuid


def test_nested_tables_parsed_independently():
    html = ("<table><tr><th>A</th><th>B</th></tr>"
            "<tr><td><table><tr><th>X</th><th>Y</th></tr>"
            "<tr><td>1</td><td>2</td></tr></table></td>"
            "<td>outer</td></tr></table>")
    model = parse_page(snapshot_for(html))
    assert len(model.tables) == 2
    outer, inner = model.tables
    assert grid_of(inner) == [["1", "2"]]
    # outer cell holds the inner table's flattened text
    assert outer.rows[0][0].raw_text == "X Y 1 2"


def test_aria_role_table_detected():
    html = ("<div role='table'>"
            "<div role='row'><div role='columnheader'>A</div>"
            "<div role='columnheader'>B</div></div>"
            "<div role='row'><div role='cell'>1</div>"
            "<div role='cell'>2</div></div></div>")
    model = parse_page(snapshot_for(html))
    assert len(model.tables) == 1
    assert grid_of(model.tables[0]) == [["1", "2"]]
    assert [c.raw_label for c in model.tables[0].columns] == ["A", "B"]


def test_parse_determinism():
    a, b = roster_model(), roster_model()
    assert grid_of(a.tables[0]) == grid_of(b.tables[0])
    assert [c.to_json() for c in a.tables[0].columns] == \
        [c.to_json() for c in b.tables[0].columns]
    assert a.tables[0].source_path == b.tables[0].source_path


# ---------------------------------------------------------------------------
# binding manifest
# ---------------------------------------------------------------------------

def test_roster_manifest_counts():
    model = roster_model()
    manifest = build_binding_manifest(model)
    # 20*5 cells + 5 headers + 20 rows + 1 table
    assert len(manifest.entries) == 126
    roles = [e.role for e in manifest.entries]
    assert roles.count("cell") == 100
    assert roles.count("header") == 5
    assert roles.count("row") == 20
    assert roles.count("table") == 1
    assert len(manifest.uuids()) == 126


def test_manifest_selectors_resolve_uniquely():
    snapshot = roster_snapshot()
    model = parse_page(snapshot)
    manifest = build_binding_manifest(model)
    root = parse_html(snapshot.html_text)
    for e in manifest.entries:
        el = resolve_locator(root, e.selector)
        assert el is not None
        if e.role == "cell":
            assert el.tag == "td"
        elif e.role == "header":
            assert el.tag == "th"
        elif e.role == "row":
            assert el.tag == "tr"
        else:
            assert el.tag == "table"


def test_empty_page_manifest():
    model = parse_page(snapshot_for("<p>no tables</p>"))
    assert build_binding_manifest(model).entries == []


def test_1x1_table_yields_no_entries():
    model = parse_page(snapshot_for(
        "<table><tr><th>A</th></tr><tr><td>1</td></tr></table>"))
    assert build_binding_manifest(model).entries == []


# ---------------------------------------------------------------------------
# rebinding
# ---------------------------------------------------------------------------

APPENDED_ROW = "<tr><td>Uri Valdez</td><td>MF</td><td>24</td><td>3</td><td>2</td></tr>"


def appended_html() -> str:
    html = read_fixture(__file__.replace("test_page_model.py",
                                         "fixtures/roster.html"))
    return html.replace("</tbody>", APPENDED_ROW + "\n    </tbody>")


def test_rebind_appended_row():
    old = roster_model()
    old_uuids = {c.uuid for row in old.tables[0].rows for c in row}
    new_snap = snapshot_for(appended_html())
    new, manifest = rebind_snapshot(old, new_snap)
    t = new.tables[0]
    assert t.nrows == 21
    new_uuids = {c.uuid for row in t.rows for c in row}
    assert old_uuids <= new_uuids
    assert len(new_uuids - old_uuids) == 5


def test_rebind_identity():
    old = roster_model()
    new, _ = rebind_snapshot(old, roster_snapshot())
    old_uuids = {c.uuid for row in old.tables[0].rows for c in row}
    new_uuids = {c.uuid for row in new.tables[0].rows for c in row}
    assert old_uuids == new_uuids
    assert old.tables[0].row_uuids == new.tables[0].row_uuids
    assert old.tables[0].header_uuids == new.tables[0].header_uuids
    assert old.tables[0].table_uuid == new.tables[0].table_uuid


def test_rebind_edited_cell():
    old = roster_model()
    edited = read_fixture(__file__.replace("test_page_model.py",
                                           "fixtures/roster.html"))
    edited = edited.replace("<td>Carlos Vega</td>", "<td>Carlos Vegas</td>")
    new, _ = rebind_snapshot(old, snapshot_for(edited))
    ot, nt = old.tables[0], new.tables[0]
    assert nt.rows[2][0].uuid != ot.rows[2][0].uuid
    assert nt.rows[2][1].uuid == ot.rows[2][1].uuid
    assert nt.rows[1][0].uuid == ot.rows[1][0].uuid


def test_rebind_carries_resolved_terms():
    old = roster_model()
    old.tables[0].columns[2].resolved_term = "appearances"
    new, _ = rebind_snapshot(old, snapshot_for(appended_html()))
    assert new.tables[0].columns[2].resolved_term == "appearances"


def test_rebind_host_mismatch_rejected():
    old = roster_model()
    other = snapshot_for(read_fixture(__file__.replace(
        "test_page_model.py", "fixtures/roster.html")),
        url="https://other.example/r")
    with pytest.raises(ValueError):
        rebind_snapshot(old, other)


def test_manifest_diff_appended_row():
    old = roster_model()
    old_manifest = build_binding_manifest(old)
    new, new_manifest = rebind_snapshot(old, snapshot_for(appended_html()))
    add, remove = diff_manifests(old_manifest, new_manifest)
    assert remove == []
    assert sorted(e.role for e in add) == ["cell"] * 5 + ["row"]


def test_manifest_diff_identity_is_empty():
    old = roster_model()
    old_manifest = build_binding_manifest(old)
    _, new_manifest = rebind_snapshot(old, roster_snapshot())
    add, remove = diff_manifests(old_manifest, new_manifest)
    assert add == [] and remove == []


# ---------------------------------------------------------------------------
# properties over generated tables
# ---------------------------------------------------------------------------

cell_text = st.one_of(
    st.integers(-999, 9999).map(str),
    st.text(alphabet="abc XYZ-", min_size=0, max_size=8),
)
grids = st.integers(1, 6).flatmap(
    lambda w: st.lists(st.lists(cell_text, min_size=w, max_size=w),
                       min_size=1, max_size=8).map(lambda rows: (w, rows)))


def grid_html(width: int, rows: list[list[str]]) -> str:
    from html import escape
    head = "<tr>" + "".join(f"<th>h{i}</th>" for i in range(width)) + "</tr>"
    body = "".join(
        "<tr>" + "".join(f"<td>{escape(c)}</td>" for c in row) + "</tr>"
        for row in rows)
    return f"<html><body><table>{head}{body}</table></body></html>"


def normalized(text: str) -> str:
    return " ".join(text.split())


@settings(max_examples=60, deadline=None)
@given(grids)
def test_grid_totality_and_faithfulness(wrows):
    width, rows = wrows
    model = parse_page(snapshot_for(grid_html(width, rows)))
    if width < 2:
        assert model.tables == []
        return
    t = model.tables[0]
    assert t.ncols == width
    assert all(len(r) == t.ncols for r in t.rows)
    assert grid_of(t) == [[normalized(c) for c in row] for row in rows]
    manifest = build_binding_manifest(model)
    assert sum(1 for e in manifest.entries if e.role == "cell") \
        == t.nrows * t.ncols
    for row in t.rows:
        for cell in row:
            if cell.numeric_value is not None:
                assert parse_number(cell.raw_text) == cell.numeric_value


@settings(max_examples=40, deadline=None)
@given(grids)
def test_rebind_unmodified_is_uuid_identity(wrows):
    width, rows = wrows
    if width < 2:
        return
    snap = snapshot_for(grid_html(width, rows))
    old = parse_page(snap)
    new, _ = rebind_snapshot(old, snapshot_for(grid_html(width, rows)))
    old_uuids = {c.uuid for t in old.tables for row in t.rows for c in row}
    new_uuids = {c.uuid for t in new.tables for row in t.rows for c in row}
    assert old_uuids == new_uuids
