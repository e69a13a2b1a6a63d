"""Utterance understanding: a deterministic pattern grammar classifies the
intent, slots are filled from the surface text, unresolved column terms are
matched through the vocabulary, and deictic slots ("this column", "this")
are resolved against the recent pointer events.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from decimal import Decimal

from . import table_engine, vocabulary
from .errors import (
    AmbiguousColumn,
    IncompleteFrame,
    NotUnderstood,
    StaleDeixis,
    UnknownColumn,
)
from .event_buffer import EventBuffer
from .page_model import TableModel, parse_number
from .vocabulary import normalize, score_match

DEFAULT_WAKE_WORD = "watson"

REQUIRED_SLOTS = {
    "filter_rows": ("column", "cmp", "literal", "target"),
    "sort_rows": ("column", "order", "target"),
    "aggregate": ("fn", "column"),
    "query_cell": ("row", "column"),
    "define_attribute": ("column", "term"),
}

CMP_SYNONYMS = {
    "greater than": "gt", "more than": "gt", "over": "gt", "above": "gt",
    "exceeds": "gt",
    "less than": "lt", "fewer than": "lt", "under": "lt", "below": "lt",
    "equal to": "eq", "equals": "eq", "is": "eq",
}

AGG_SYNONYMS = {
    "average": "average", "mean": "average",
    "sum": "sum", "total": "sum",
    "min": "min", "minimum": "min", "lowest": "min", "smallest": "min",
    "max": "max", "maximum": "max", "highest": "max", "largest": "max",
    "count": "count", "how many": "count",
}

ORDER_SYNONYMS = {
    "ascending": "asc", "asc": "asc", "increasing": "asc",
    "descending": "desc", "desc": "desc", "decreasing": "desc",
}

_CMP_ALT = ("greater than|more than|exceeds|less than|fewer than|equal to|"
            "equals|over|above|under|below|is")
_AGG_ALT = "|".join(sorted((k for k in AGG_SYNONYMS if k != "how many"),
                           key=len, reverse=True))
_ORDER_ALT = "|".join(sorted(ORDER_SYNONYMS, key=len, reverse=True))

_DEIXIS_COLUMN = {"this column", "this"}
_DEIXIS_LITERAL = {"this", "this one", "this value", "this cell"}


def _p(pattern: str):
    return re.compile(pattern, re.IGNORECASE)


# ordered: first match wins
PATTERNS: list[tuple[str, str, re.Pattern]] = [
    ("define_attribute", "define.assign", _p(
        r"^assign\s+(?:the\s+)?attribute\s+(?P<term>.+?)\s+to\s+"
        r"(?P<column>this\s+column|this)$")),
    ("define_attribute", "define.call", _p(
        r"^(?:call|name|label)\s+(?P<column>this\s+column|this)\s+"
        r"(?P<term>.+)$")),
    ("define_attribute", "define.as", _p(
        r"^define\s+(?:the\s+)?(?:column\s+)?(?P<column>.+?)\s+as\s+"
        r"(?P<term>.+)$")),
    ("filter_rows", "filter.rows_where", _p(
        r"^(?:show\s+)?(?:me\s+)?(?:in\s+a\s+new\s+table\s+)?(?:show\s+)?"
        r"(?:the\s+|only\s+)*rows?\s+(?:where|with|whose|having|in\s+which)\s+"
        r"(?P<column>.+?)\s+(?:is\s+|are\s+)?(?:\s+)?(?P<cmp>" + _CMP_ALT + r")\s+"
        r"(?P<literal>.+?)(?:\s+in\s+a\s+new\s+table)?$")),
    ("filter_rows", "filter.keep", _p(
        r"^(?:filter|keep)\s+(?:the\s+)?(?:rows?|table)\s*"
        r"(?:to|where|with|whose|by|so\s+that)?\s*"
        r"(?P<column>.+?)\s+(?:is\s+)?(?P<cmp>" + _CMP_ALT + r")\s+"
        r"(?P<literal>.+)$")),
    ("sort_rows", "sort.by", _p(
        r"^(?:sort|order|arrange|rank)\s+(?:the\s+)?(?:rows?\s+|table\s+)?by\s+"
        r"(?P<column>.+?)"
        r"(?:\s+in)?(?:\s+(?P<order>" + _ORDER_ALT + r")(?:\s+order)?)?"
        r"(?:\s+(?P<target>in\s+a\s+new\s+table))?$")),
    ("sort_rows", "sort.deictic", _p(
        r"^(?:sort|order)\s+(?P<column>this\s+column|this)"
        r"(?:\s+(?P<order>" + _ORDER_ALT + r")(?:\s+order)?)?$")),
    ("aggregate", "agg.what_is", _p(
        r"^what(?:'s|\s+is)\s+the\s+(?P<fn>" + _AGG_ALT + r")"
        r"(?:\s+(?:of\s+|in\s+)?(?P<column>.+?))?$")),
    ("aggregate", "agg.compute", _p(
        r"^(?:compute|calculate|give\s+me|tell\s+me)\s+the\s+"
        r"(?P<fn>" + _AGG_ALT + r")\s+(?:of\s+|in\s+)?(?P<column>.+)$")),
    ("aggregate", "agg.how_many", _p(
        r"^how\s+many\s+(?P<column>.+?)(?:\s+are\s+there)?\??$")),
    ("aggregate", "agg.count", _p(
        r"^count\s+(?:the\s+)?(?P<column>.+)$")),
    ("aggregate", "agg.bare", _p(
        r"^(?P<fn>average|mean|sum|total)\s+(?:of\s+|the\s+)?(?P<column>.+)$")),
    ("query_cell", "query.this", _p(
        r"^what(?:'s|\s+is)\s+(?:the\s+value\s+of\s+)?"
        r"(?:this|this\s+cell|this\s+value|this\s+one)$")),
    ("query_cell", "query.of_row", _p(
        r"^what(?:'s|\s+is)\s+the\s+(?P<column>.+?)\s+(?:of|for|in)\s+"
        r"this\s+row$")),
]


# ---------------------------------------------------------------------------
# Slot values and frames
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ColumnRef:
    term: str | None = None
    index: int | None = None
    by_deixis: bool = False


@dataclass(frozen=True)
class RowRef:
    index: int | None = None
    by_deixis: bool = False


@dataclass(frozen=True)
class Literal:
    value: Decimal | str | None = None
    by_deixis: bool = False


@dataclass(frozen=True)
class IntentFrame:
    intent: str
    slots: dict = field(default_factory=dict)
    missing: tuple[str, ...] = ()
    pattern_id: str = ""

    def with_slot(self, name: str, value) -> "IntentFrame":
        slots = dict(self.slots)
        slots[name] = value
        missing = tuple(m for m in self.missing if m != name)
        return replace(self, slots=slots, missing=missing)


# ---------------------------------------------------------------------------
# Classification and slot extraction
# ---------------------------------------------------------------------------

def strip_wake_word(text: str, wake_word: str = DEFAULT_WAKE_WORD) -> str:
    pattern = re.compile(r"^\s*" + re.escape(wake_word) + r"[\s,:]+",
                         re.IGNORECASE)
    while True:
        stripped = pattern.sub("", text, count=1)
        if stripped == text:
            return stripped
        text = stripped


def _prepare(text: str, wake_word: str) -> str:
    t = strip_wake_word(text.strip(), wake_word)
    return t.strip().rstrip(".?!").strip()


def classify_intent(text: str,
                    wake_word: str = DEFAULT_WAKE_WORD) -> tuple[str, str]:
    """Return (intent, pattern id); raises NotUnderstood when nothing fires."""
    t = _prepare(text, wake_word)
    if not t:
        raise NotUnderstood(text)
    for intent, pid, pattern in PATTERNS:
        if pattern.match(t):
            return intent, pid
    raise NotUnderstood(text)


def _column_slot(span: str | None) -> ColumnRef | None:
    if span is None:
        return None
    s = re.sub(r"\s+", " ", span.strip()).lower()
    s = re.sub(r"^the\s+", "", s)
    if not s:
        return None
    if s in _DEIXIS_COLUMN:
        return ColumnRef(by_deixis=True)
    return ColumnRef(term=s)


def _literal_slot(span: str) -> Literal:
    s = re.sub(r"\s+", " ", span.strip())
    if s.lower() in _DEIXIS_LITERAL:
        return Literal(by_deixis=True)
    num = parse_number(s)
    if num is not None:
        return Literal(value=num)
    return Literal(value=s.strip("\"'"))


def extract_slots(text: str, intent: str,
                  wake_word: str = DEFAULT_WAKE_WORD) -> IntentFrame:
    """Fill slots from the matched pattern's named groups."""
    t = _prepare(text, wake_word)
    match = None
    pid = ""
    for pat_intent, pat_id, pattern in PATTERNS:
        m = pattern.match(t)
        if m:
            if pat_intent != intent:
                raise NotUnderstood(text)
            match, pid = m, pat_id
            break
    if match is None:
        raise NotUnderstood(text)
    groups = match.groupdict()
    slots: dict = {}

    col = _column_slot(groups.get("column"))
    if col is not None:
        slots["column"] = col
    if "cmp" in groups and groups["cmp"]:
        slots["cmp"] = CMP_SYNONYMS[re.sub(r"\s+", " ", groups["cmp"].lower())]
    if "literal" in groups and groups["literal"]:
        slots["literal"] = _literal_slot(groups["literal"])
    if "term" in groups and groups["term"]:
        slots["term"] = groups["term"].strip().strip("\"'").lower()

    if intent == "filter_rows" or intent == "sort_rows":
        slots["target"] = ("new_table" if re.search(r"\bnew\s+table\b", t,
                                                    re.IGNORECASE)
                           else "in_place")
    if intent == "sort_rows":
        order = groups.get("order")
        slots["order"] = ORDER_SYNONYMS[order.lower()] if order else "asc"
    if intent == "aggregate":
        if pid in ("agg.how_many", "agg.count"):
            slots["fn"] = "count"
        else:
            slots["fn"] = AGG_SYNONYMS[groups["fn"].lower()]
        if slots["fn"] == "count":
            # count ignores the column; "rows"/"the rows" select the whole table
            colref = slots.get("column")
            if colref is not None and colref.term in ("rows", "row", "them",
                                                      "entries"):
                slots["column"] = ColumnRef(index=0)
    if intent == "query_cell":
        slots["row"] = RowRef(by_deixis=True)
        if pid == "query.this":
            slots["column"] = ColumnRef(by_deixis=True)

    required = REQUIRED_SLOTS[intent]
    missing = tuple(name for name in required if name not in slots)
    return IntentFrame(intent=intent, slots=slots, missing=missing,
                       pattern_id=pid)


def parse_utterance(text: str,
                    wake_word: str = DEFAULT_WAKE_WORD) -> IntentFrame:
    intent, _ = classify_intent(text, wake_word)
    return extract_slots(text, intent, wake_word)


# ---------------------------------------------------------------------------
# Column / deixis resolution
# ---------------------------------------------------------------------------

def _match_column(term: str, table: TableModel,
                  dictionary: vocabulary.Dictionary,
                  scope_host: str) -> int:
    term_norm = normalize(term)
    for col in table.columns:
        if col.resolved_term and normalize(col.resolved_term) == term_norm:
            return col.index
    for col in table.columns:
        if normalize(col.raw_label) == term_norm:
            return col.index
    for col in table.columns:
        entry = dictionary.lookup(scope_host, col.raw_label)
        if entry is not None and normalize(entry.term) == term_norm:
            return col.index

    scores: list[tuple[int, float]] = []
    for col in table.columns:
        texts = [col.raw_label]
        if col.resolved_term:
            texts.append(col.resolved_term)
        texts.extend(h.text for h in col.hints)
        best = max((max(score_match(t, term), score_match(term, t))
                    for t in texts if t), default=0.0)
        scores.append((col.index, best))
    scores.sort(key=lambda p: -p[1])
    best_idx, best = scores[0] if scores else (0, 0.0)
    contenders = [i for i, s in scores
                  if s >= vocabulary.ACCEPT_THRESHOLD
                  and best - s <= vocabulary.AMBIGUITY_BAND]
    if len(contenders) >= 2:
        labels = [table.columns[i].display_term() or table.columns[i].raw_label
                  for i in contenders]
        raise AmbiguousColumn(term, labels)
    if best >= vocabulary.ACCEPT_THRESHOLD:
        return best_idx
    raise UnknownColumn(term)


def resolve_columns(frame: IntentFrame, table: TableModel,
                    dictionary: vocabulary.Dictionary,
                    scope_host: str) -> IntentFrame:
    """Map every by-term column reference to a concrete column index."""
    out = frame
    for name, value in frame.slots.items():
        if isinstance(value, ColumnRef) and not value.by_deixis \
                and value.index is None:
            if value.term is None:
                out = out.with_slot(name, ColumnRef(index=0))
                continue
            try:
                idx = _match_column(value.term, table, dictionary, scope_host)
            except UnknownColumn:
                # count ignores its column; fall back to the whole table
                if frame.intent == "aggregate" and frame.slots.get("fn") == "count":
                    idx = 0
                else:
                    raise
            out = out.with_slot(name, ColumnRef(term=value.term, index=idx))
    return out


def resolve_deixis(frame: IntentFrame, buffer: EventBuffer, now: int,
                   table: TableModel,
                   window_ms: int | None = None) -> IntentFrame:
    """Fill by-deixis slots from the freshest qualifying pointer events."""
    if window_ms is None:
        window_ms = buffer.window_ms
    out = frame

    col_value = frame.slots.get("column")
    if isinstance(col_value, ColumnRef) and col_value.by_deixis:
        ev = buffer.most_recent(role_filter={"header", "cell"},
                                table_filter=table.table_id,
                                max_age_ms=window_ms, now=now)
        if ev is None or ev.col_index is None:
            raise StaleDeixis("column")
        out = out.with_slot("column", ColumnRef(index=ev.col_index))

    lit = frame.slots.get("literal")
    if isinstance(lit, Literal) and lit.by_deixis:
        ev = buffer.most_recent(role_filter={"cell"},
                                table_filter=table.table_id,
                                max_age_ms=window_ms, now=now)
        if ev is None or ev.value_text is None:
            raise StaleDeixis("value")
        value: Decimal | str = ev.value_text
        col_ref = out.slots.get("column")
        if isinstance(col_ref, ColumnRef) and col_ref.index is not None \
                and table.columns[col_ref.index].col_type == "numeric":
            num = parse_number(ev.value_text)
            if num is not None:
                value = num
        out = out.with_slot("literal", Literal(value=value))

    row = frame.slots.get("row")
    if isinstance(row, RowRef) and row.by_deixis:
        ev = buffer.most_recent(role_filter={"cell", "row"},
                                table_filter=table.table_id,
                                max_age_ms=window_ms, now=now)
        if ev is None or ev.row_index is None:
            raise StaleDeixis("row")
        out = out.with_slot("row", RowRef(index=ev.row_index))
    return out


# ---------------------------------------------------------------------------
# Command construction
# ---------------------------------------------------------------------------

def build_command(frame: IntentFrame, table: TableModel) -> table_engine.Command:
    """Turn a fully resolved frame into an executable command."""
    unresolved = list(frame.missing)
    for name, value in frame.slots.items():
        if getattr(value, "by_deixis", False):
            unresolved.append(name)
        if isinstance(value, ColumnRef) and value.index is None \
                and not value.by_deixis:
            unresolved.append(name)
    if unresolved:
        raise IncompleteFrame(sorted(set(unresolved)))

    tid = table.table_id
    s = frame.slots
    if frame.intent == "filter_rows":
        return table_engine.Filter(tid, s["column"].index, s["cmp"],
                                   s["literal"].value, s["target"])
    if frame.intent == "sort_rows":
        return table_engine.Sort(tid, s["column"].index, s["order"],
                                 s["target"])
    if frame.intent == "aggregate":
        return table_engine.Aggregate(tid, s["fn"], s["column"].index)
    if frame.intent == "query_cell":
        return table_engine.QueryCell(tid, s["row"].index, s["column"].index)
    if frame.intent == "define_attribute":
        return table_engine.DefineAttribute(tid, s["column"].index, s["term"])
    raise NotUnderstood(frame.intent)
