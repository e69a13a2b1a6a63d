"""HTML page ingestion: detect data tables, normalize them into grids, and
produce the binding manifests the overlay uses to instrument the page.

Parsing is forgiving (unclosed tags, stray markup) and side-effect free; all
randomness is confined to UUID issuance.
"""

from __future__ import annotations

import re
import uuid as _uuid
from dataclasses import dataclass, field
from decimal import Decimal
from html.parser import HTMLParser
from urllib.parse import urlsplit

from .vocabulary import VocabHint, collect_hints

NUMERIC_RE = re.compile(r"^[+-]?(?:\d{1,3}(?:,\d{3})+|\d+)(?:\.\d+)?%?$")


def parse_number(text: str) -> Decimal | None:
    """Parse a displayed value under the numeric grammar.

    Optional sign, optional comma thousands separators, optional decimal
    fraction, optional trailing percent sign (value divided by 100).
    Returns None for anything else.
    """
    s = text.strip()
    if not NUMERIC_RE.match(s):
        return None
    percent = s.endswith("%")
    if percent:
        s = s[:-1]
    value = Decimal(s.replace(",", ""))
    if percent:
        value = value / 100
    return value


def infer_column_type(texts: list[str]) -> str:
    """A column is numeric iff at least 90% of its non-empty cells parse."""
    nonempty = [t for t in texts if t.strip()]
    if not nonempty:
        return "text"
    parsed = sum(1 for t in nonempty if parse_number(t) is not None)
    return "numeric" if parsed / len(nonempty) >= 0.9 else "text"


# ---------------------------------------------------------------------------
# Minimal forgiving DOM
# ---------------------------------------------------------------------------

VOID_TAGS = {
    "area", "base", "br", "col", "embed", "hr", "img", "input",
    "link", "meta", "param", "source", "track", "wbr",
}

# starting <key> implicitly closes any open tags in the value set
_IMPLIED_CLOSERS = {
    "tr": {"tr", "td", "th"},
    "td": {"td", "th"},
    "th": {"td", "th"},
    "thead": {"td", "th", "tr"},
    "tbody": {"td", "th", "tr", "thead"},
    "tfoot": {"td", "th", "tr", "tbody"},
    "li": {"li"},
    "p": {"p"},
    "option": {"option"},
}

_WS_RE = re.compile(r"\s+")


class Element:
    __slots__ = ("tag", "attrs", "children", "parent")

    def __init__(self, tag: str, attrs: dict[str, str] | None = None,
                 parent: "Element | None" = None):
        self.tag = tag
        self.attrs = attrs or {}
        self.children: list[Element | str] = []
        self.parent = parent

    def element_children(self) -> list["Element"]:
        return [c for c in self.children if isinstance(c, Element)]

    def text(self) -> str:
        parts: list[str] = []
        self._collect_text(parts)
        return _WS_RE.sub(" ", "".join(parts)).strip()

    def _collect_text(self, parts: list[str]) -> None:
        for c in self.children:
            if isinstance(c, str):
                parts.append(c)
            else:
                parts.append(" ")
                c._collect_text(parts)
                parts.append(" ")

    def walk(self):
        """All descendant elements in document order."""
        for c in self.element_children():
            yield c
            yield from c.walk()

    def find_first(self, tag: str) -> "Element | None":
        for el in self.walk():
            if el.tag == tag:
                return el
        return None

    def role(self) -> str:
        return self.attrs.get("role", "").strip().lower()

    def locator(self) -> str:
        """Child-index path from the document root, e.g. "0/1/3/0"."""
        indices: list[int] = []
        node = self
        while node.parent is not None:
            indices.append(node.parent.element_children().index(node))
            node = node.parent
        return "/".join(str(i) for i in reversed(indices))

    def __repr__(self):  # pragma: no cover - debugging aid
        return f"<Element {self.tag} {self.attrs}>"


class _TreeBuilder(HTMLParser):
    def __init__(self):
        super().__init__(convert_charrefs=True)
        self.root = Element("#document")
        self.stack = [self.root]

    def handle_starttag(self, tag, attrs):
        closers = _IMPLIED_CLOSERS.get(tag, ())
        while len(self.stack) > 1 and self.stack[-1].tag in closers:
            self.stack.pop()
        attr_map: dict[str, str] = {}
        for k, v in attrs:
            attr_map.setdefault(k.lower(), v if v is not None else "")
        el = Element(tag, attr_map, parent=self.stack[-1])
        self.stack[-1].children.append(el)
        if tag not in VOID_TAGS:
            self.stack.append(el)

    def handle_startendtag(self, tag, attrs):
        self.handle_starttag(tag, attrs)
        if tag not in VOID_TAGS:
            self.stack.pop()

    def handle_endtag(self, tag):
        for i in range(len(self.stack) - 1, 0, -1):
            if self.stack[i].tag == tag:
                del self.stack[i:]
                return
        # stray end tag: ignore

    def handle_data(self, data):
        if data:
            self.stack[-1].children.append(data)


def parse_html(html_text: str) -> Element:
    builder = _TreeBuilder()
    builder.feed(html_text)
    builder.close()
    return builder.root


def resolve_locator(root: Element, path: str) -> Element | None:
    node = root
    if path == "":
        return node
    for part in path.split("/"):
        children = node.element_children()
        idx = int(part)
        if idx >= len(children):
            return None
        node = children[idx]
    return node


# ---------------------------------------------------------------------------
# Domain types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PageSnapshot:
    snapshot_id: str
    url: str
    host: str
    html_text: str
    received_at: int

    @classmethod
    def create(cls, url: str, html_text: str, received_at: int,
               snapshot_id: str | None = None) -> "PageSnapshot":
        host = (urlsplit(url).hostname or "").lower()
        if not host:
            raise ValueError(f"url {url!r} has no hostname")
        return cls(snapshot_id or str(_uuid.uuid4()), url, host, html_text, received_at)


@dataclass
class Cell:
    uuid: str
    row_index: int
    col_index: int
    raw_text: str
    numeric_value: Decimal | None = None

    def to_json(self) -> dict:
        d = {
            "uuid": self.uuid,
            "row_index": self.row_index,
            "col_index": self.col_index,
            "raw_text": self.raw_text,
            "numeric_value": None,
        }
        if self.numeric_value is not None:
            nv = self.numeric_value
            d["numeric_value"] = int(nv) if nv == nv.to_integral_value() else float(nv)
        return d


@dataclass
class ColumnDescriptor:
    index: int
    raw_label: str
    hints: list[VocabHint] = field(default_factory=list)
    resolved_term: str | None = None
    col_type: str = "text"
    header_path: str | None = None  # locator of the header cell, for re-harvesting

    def display_term(self) -> str:
        return self.resolved_term if self.resolved_term else self.raw_label

    def to_json(self) -> dict:
        return {
            "index": self.index,
            "raw_label": self.raw_label,
            "hints": [{"source": h.source, "text": h.text} for h in self.hints],
            "resolved_term": self.resolved_term,
            "col_type": self.col_type,
        }


@dataclass
class TableModel:
    table_id: str
    source_path: str
    columns: list[ColumnDescriptor]
    rows: list[list[Cell]]
    # binding bookkeeping (not part of the serialized model)
    table_uuid: str = ""
    header_uuids: list[str] = field(default_factory=list)
    row_uuids: list[str] = field(default_factory=list)
    locators: dict[str, str] = field(default_factory=dict)  # uuid -> locator

    @property
    def ncols(self) -> int:
        return len(self.columns)

    @property
    def nrows(self) -> int:
        return len(self.rows)

    def to_json(self) -> dict:
        return {
            "table_id": self.table_id,
            "source_path": self.source_path,
            "columns": [c.to_json() for c in self.columns],
            "rows": [[c.to_json() for c in row] for row in self.rows],
        }


@dataclass
class PageModel:
    snapshot_id: str
    url: str
    host: str
    tables: list[TableModel]
    diagnostics: list[str] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "snapshot_id": self.snapshot_id,
            "url": self.url,
            "host": self.host,
            "tables": [t.to_json() for t in self.tables],
            "diagnostics": list(self.diagnostics),
        }


@dataclass
class BindingEntry:
    uuid: str
    selector: str
    role: str  # cell | header | row | table
    table_id: str
    row_index: int | None = None
    col_index: int | None = None

    def to_json(self) -> dict:
        return {
            "uuid": self.uuid,
            "selector": self.selector,
            "role": self.role,
            "table_id": self.table_id,
            "row_index": self.row_index,
            "col_index": self.col_index,
        }


@dataclass
class BindingManifest:
    snapshot_id: str
    entries: list[BindingEntry]

    def uuids(self) -> set[str]:
        return {e.uuid for e in self.entries}

    def to_json(self) -> dict:
        return {
            "snapshot_id": self.snapshot_id,
            "entries": [e.to_json() for e in self.entries],
        }


# ---------------------------------------------------------------------------
# Table extraction
# ---------------------------------------------------------------------------

_CELL_TAGS = {"td", "th"}
_CELL_ROLES = {"cell", "gridcell", "columnheader", "rowheader"}
_HEADER_ROLES = {"columnheader"}


def _is_table_element(el: Element) -> bool:
    return el.tag == "table" or el.role() in {"table", "grid"}


def _nearest_table(el: Element) -> Element | None:
    node = el.parent
    while node is not None:
        if _is_table_element(node):
            return node
        node = node.parent
    return None


def _nearest_row(el: Element) -> Element | None:
    node = el.parent
    while node is not None:
        if node.tag == "tr" or node.role() == "row":
            return node
        if _is_table_element(node):
            return None
        node = node.parent
    return None


def _table_rows(table_el: Element) -> list[Element]:
    return [el for el in table_el.walk()
            if (el.tag == "tr" or el.role() == "row")
            and _nearest_table(el) is table_el]


def _row_cells(row_el: Element) -> list[Element]:
    return [el for el in row_el.walk()
            if (el.tag in _CELL_TAGS or el.role() in _CELL_ROLES)
            and _nearest_row(el) is row_el]


def _is_header_cell(el: Element) -> bool:
    return el.tag == "th" or el.role() in _HEADER_ROLES


def _int_attr(el: Element, name: str) -> int:
    try:
        return max(1, int(el.attrs.get(name, "1")))
    except ValueError:
        return 1


def _expand_grid(rows: list[Element]) -> list[list[tuple[Element | None, str]]]:
    """Expand colspan/rowspan into a rectangular grid of (source element, text).

    Spanned positions share the same source element; missing positions get
    (None, "") placeholders so the grid stays rectangular.
    """
    grid: dict[tuple[int, int], tuple[Element | None, str]] = {}
    width = 0
    for r, row_el in enumerate(rows):
        c = 0
        for cell_el in _row_cells(row_el):
            while (r, c) in grid:
                c += 1
            colspan = _int_attr(cell_el, "colspan")
            rowspan = min(_int_attr(cell_el, "rowspan"), len(rows) - r)
            entry = (cell_el, cell_el.text())
            for dr in range(rowspan):
                for dc in range(colspan):
                    grid[(r + dr, c + dc)] = entry
            c += colspan
        width = max(width, c)
        # account for rowspans hanging into this row past its own cells
        while (r, width) in grid:
            width += 1
    out: list[list[tuple[Element | None, str]]] = []
    for r, row_el in enumerate(rows):
        out.append([grid.get((r, c), (None, "")) for c in range(width)])
    return out


def _column_hints(header_el: Element | None, header_text: str) -> list[VocabHint]:
    tooltip = aria = abbr = None
    if header_el is not None:
        tooltip = header_el.attrs.get("title")
        aria = header_el.attrs.get("aria-label")
        abbr_el = header_el.find_first("abbr")
        if abbr_el is not None:
            abbr = abbr_el.attrs.get("title") or None
    return collect_hints(tooltip=tooltip, abbr=abbr, aria_label=aria,
                         header_text=header_text)


def _extract_table(table_el: Element, ordinal: int,
                   diagnostics: list[str]) -> TableModel | None:
    rows = _table_rows(table_el)
    path = table_el.locator()
    if not rows:
        diagnostics.append(f"table {ordinal} at {path} excluded: no rows")
        return None

    header_idx = 0
    for i, row_el in enumerate(rows):
        cells = _row_cells(row_el)
        if cells and all(_is_header_cell(c) for c in cells):
            header_idx = i
            break

    grid = _expand_grid(rows)
    width = len(grid[0]) if grid else 0
    if width < 2:
        diagnostics.append(
            f"table {ordinal} at {path} excluded: fewer than 2 columns")
        return None
    data_indices = [i for i in range(len(rows)) if i != header_idx]
    if not data_indices:
        diagnostics.append(f"table {ordinal} at {path} excluded: 0 data rows")
        return None

    columns: list[ColumnDescriptor] = []
    for c in range(width):
        header_el, header_text = grid[header_idx][c]
        label = header_text.strip()
        columns.append(ColumnDescriptor(
            index=c,
            raw_label=label,
            hints=_column_hints(header_el, label),
            header_path=header_el.locator() if header_el is not None else None,
        ))

    table_id = f"t{ordinal}"
    model = TableModel(table_id=table_id, source_path=path, columns=columns,
                       rows=[], table_uuid=str(_uuid.uuid4()))
    model.locators[model.table_uuid] = path

    for c in range(width):
        hu = str(_uuid.uuid4())
        model.header_uuids.append(hu)
        header_el, _ = grid[header_idx][c]
        model.locators[hu] = header_el.locator() if header_el is not None \
            else rows[header_idx].locator()

    # per-column cell texts for typing
    col_texts: list[list[str]] = [[] for _ in range(width)]
    for ri in data_indices:
        for c in range(width):
            col_texts[c].append(grid[ri][c][1])
    for c in range(width):
        columns[c].col_type = infer_column_type(col_texts[c])

    # all grid positions covered by one spanned source cell share one UUID
    shared: dict[int, str] = {}
    for out_r, ri in enumerate(data_indices):
        row_el = rows[ri]
        ru = str(_uuid.uuid4())
        model.row_uuids.append(ru)
        model.locators[ru] = row_el.locator()
        row_cells: list[Cell] = []
        for c in range(width):
            src, text = grid[ri][c]
            cu = None
            if src is not None:
                cu = shared.get(id(src))
            if cu is None:
                cu = str(_uuid.uuid4())
                if src is not None:
                    shared[id(src)] = cu
                model.locators[cu] = src.locator() if src is not None \
                    else row_el.locator()
            nv = parse_number(text) if columns[c].col_type == "numeric" else None
            row_cells.append(Cell(uuid=cu, row_index=out_r, col_index=c,
                                  raw_text=text, numeric_value=nv))
        model.rows.append(row_cells)
    return model


def parse_page(snapshot: PageSnapshot) -> PageModel:
    """Detect and normalize every data table in the snapshot.

    Never raises on malformed markup; problems surface as diagnostics.
    """
    root = parse_html(snapshot.html_text)
    diagnostics: list[str] = []
    table_els = [el for el in root.walk() if _is_table_element(el)]
    tables: list[TableModel] = []
    if not table_els:
        diagnostics.append("no tables detected")
    for ordinal, el in enumerate(table_els):
        model = _extract_table(el, ordinal, diagnostics)
        if model is not None:
            tables.append(model)
    return PageModel(snapshot_id=snapshot.snapshot_id, url=snapshot.url,
                     host=snapshot.host, tables=tables, diagnostics=diagnostics)


def build_binding_manifest(model: PageModel) -> BindingManifest:
    """One entry per table, header, data row, and distinct cell."""
    entries: list[BindingEntry] = []
    for t in model.tables:
        entries.append(BindingEntry(t.table_uuid, t.locators[t.table_uuid],
                                    "table", t.table_id))
        for c, hu in enumerate(t.header_uuids):
            entries.append(BindingEntry(hu, t.locators[hu], "header",
                                        t.table_id, col_index=c))
        for r, ru in enumerate(t.row_uuids):
            entries.append(BindingEntry(ru, t.locators[ru], "row",
                                        t.table_id, row_index=r))
        seen: set[str] = set()
        for row in t.rows:
            for cell in row:
                if cell.uuid in seen:
                    continue
                seen.add(cell.uuid)
                entries.append(BindingEntry(cell.uuid, t.locators[cell.uuid],
                                            "cell", t.table_id,
                                            row_index=cell.row_index,
                                            col_index=cell.col_index))
    return BindingManifest(snapshot_id=model.snapshot_id, entries=entries)


def rebind_snapshot(old: PageModel,
                    new_snapshot: PageSnapshot) -> tuple[PageModel, BindingManifest]:
    """Re-parse after a mutation, preserving UUIDs for unchanged structure.

    A cell keeps its old UUID iff (table ordinal, row_index, col_index,
    raw_text) all match; headers match on (col_index, raw_label), rows and
    tables on position. Learned resolved terms carry over by raw_label.
    """
    if new_snapshot.host != old.host:
        raise ValueError(
            f"rebind host mismatch: {new_snapshot.host!r} != {old.host!r}")
    new = parse_page(new_snapshot)

    terms = {}
    for t in old.tables:
        for col in t.columns:
            if col.resolved_term and col.raw_label not in terms:
                terms[col.raw_label] = col.resolved_term

    for ordinal, nt in enumerate(new.tables):
        for col in nt.columns:
            if col.resolved_term is None and col.raw_label in terms:
                col.resolved_term = terms[col.raw_label]
        if ordinal >= len(old.tables):
            continue
        ot = old.tables[ordinal]
        remap: dict[str, str] = {}

        if nt.table_uuid and ot.table_uuid:
            remap[nt.table_uuid] = ot.table_uuid
        old_headers = {(c, col.raw_label): ot.header_uuids[c]
                       for c, col in enumerate(ot.columns)}
        for c, col in enumerate(nt.columns):
            hit = old_headers.get((c, col.raw_label))
            if hit:
                remap[nt.header_uuids[c]] = hit
        for r, ru in enumerate(nt.row_uuids):
            if r < len(ot.row_uuids):
                remap[ru] = ot.row_uuids[r]
        old_cells = {(cell.row_index, cell.col_index, cell.raw_text): cell.uuid
                     for row in ot.rows for cell in row}
        for row in nt.rows:
            for cell in row:
                hit = old_cells.get((cell.row_index, cell.col_index, cell.raw_text))
                if hit:
                    remap[cell.uuid] = hit

        if remap:
            nt.table_uuid = remap.get(nt.table_uuid, nt.table_uuid)
            nt.header_uuids = [remap.get(u, u) for u in nt.header_uuids]
            nt.row_uuids = [remap.get(u, u) for u in nt.row_uuids]
            for row in nt.rows:
                for cell in row:
                    cell.uuid = remap.get(cell.uuid, cell.uuid)
            nt.locators = {remap.get(u, u): loc for u, loc in nt.locators.items()}

    return new, build_binding_manifest(new)


def diff_manifests(old: BindingManifest,
                   new: BindingManifest) -> tuple[list[BindingEntry], list[str]]:
    """(entries to add or re-bind, uuids to unbind)."""
    old_by_uuid = {e.uuid: e for e in old.entries}
    add = [e for e in new.entries
           if e.uuid not in old_by_uuid or old_by_uuid[e.uuid] != e]
    new_uuids = new.uuids()
    remove = [u for u in old_by_uuid if u not in new_uuids]
    return add, remove
