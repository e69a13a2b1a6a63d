import json
import os
from functools import lru_cache

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import roster_model, roster_snapshot
from tabletalk.vocabulary import (
    Ambiguous,
    Dictionary,
    Resolved,
    Unknown,
    VocabHint,
    VocabularyEntry,
    collect_hints,
    harvest_hints,
    normalize,
    resolve_label,
    score_match,
)


# ---------------------------------------------------------------------------
# independent rule-by-rule scoring oracle
# ---------------------------------------------------------------------------

def oracle_norm(s: str) -> str:
    return "".join(ch for ch in s.lower() if ch.isascii() and ch.isalnum())


def oracle_lev(a: str, b: str) -> int:
    @lru_cache(maxsize=None)
    def d(i: int, j: int) -> int:
        if i == 0:
            return j
        if j == 0:
            return i
        return min(d(i - 1, j) + 1, d(i, j - 1) + 1,
                   d(i - 1, j - 1) + (a[i - 1] != b[j - 1]))
    return d(len(a), len(b))


def oracle_score(label: str, term: str) -> float:
    a, b = oracle_norm(label), oracle_norm(term)
    if not a or not b:
        return 0.0
    if a == b:
        return 1.0
    if b[:len(a)] == a:
        return 0.9
    # anchored subsequence
    if a[0] == b[0]:
        j = 0
        for ch in b:
            if j < len(a) and ch == a[j]:
                j += 1
        if j == len(a):
            return 0.8
    return min(0.7, max(0.0, 1.0 - oracle_lev(a, b) / max(len(a), len(b))))


@pytest.mark.parametrize("label,term,expected", [
    ("APP", "appearances", 0.9),
    ("name", "name", 1.0),
    ("GS", "games started", 0.8),
    ("A", "Assists", 0.9),
    ("POS", "Position", 0.9),
    ("XYZ", "Name", 0.0),
])
def test_score_match_frozen(label, term, expected):
    assert score_match(label, term) == pytest.approx(expected)
    assert oracle_score(label, term) == pytest.approx(expected)


words = st.text(alphabet="abcdefgxyzAPP0123 .-", min_size=1, max_size=12)


@settings(max_examples=200, deadline=None)
@given(words, words)
def test_score_matches_oracle(label, term):
    assert score_match(label, term) == pytest.approx(oracle_score(label, term))


@settings(max_examples=200, deadline=None)
@given(words, words)
def test_score_bounds(label, term):
    s = score_match(label, term)
    assert 0.0 <= s <= 1.0


@settings(max_examples=100, deadline=None)
@given(words)
def test_exact_dominance(x):
    if normalize(x):
        assert score_match(x, x) == 1.0


@settings(max_examples=100, deadline=None)
@given(words)
def test_normalize_idempotent(x):
    assert normalize(normalize(x)) == normalize(x)


# ---------------------------------------------------------------------------
# hints
# ---------------------------------------------------------------------------

def test_collect_hints_priority_and_dedup():
    hints = collect_hints(tooltip="Goals", aria_label="Goals scored",
                          header_text="G")
    assert [(h.source, h.text) for h in hints] == [
        ("tooltip", "Goals"), ("aria_label", "Goals scored"),
        ("header_text", "G")]
    # case-insensitive dedup keeps the higher-priority source
    hints = collect_hints(tooltip="Appearances", abbr="APPEARANCES",
                          header_text="APP")
    assert [(h.source, h.text) for h in hints] == [
        ("tooltip", "Appearances"), ("header_text", "APP")]


def test_collect_hints_header_only():
    assert collect_hints(header_text="Name") == \
        [VocabHint("header_text", "Name")]


def test_harvest_hints_from_roster():
    snapshot = roster_snapshot()
    model = roster_model()
    app = model.tables[0].columns[2]
    hints = harvest_hints(app, snapshot)
    assert hints == [VocabHint("tooltip", "Appearances"),
                     VocabHint("header_text", "APP")]
    assert hints == app.hints


def test_harvest_hints_abbr_tag():
    from tabletalk.page_model import parse_page
    from helpers import snapshot_for
    html = ("<table><tr><th><abbr title='Games Started'>GS</abbr></th>"
            "<th aria-label='Minutes played'>MIN</th></tr>"
            "<tr><td>1</td><td>90</td></tr></table>")
    t = parse_page(snapshot_for(html)).tables[0]
    assert t.columns[0].hints == [VocabHint("abbr_tag", "Games Started"),
                                  VocabHint("header_text", "GS")]
    assert t.columns[1].hints == [VocabHint("aria_label", "Minutes played"),
                                  VocabHint("header_text", "MIN")]


# ---------------------------------------------------------------------------
# resolution
# ---------------------------------------------------------------------------

def test_resolve_app_tooltip():
    res = resolve_label("APP", [VocabHint("tooltip", "Appearances"),
                                VocabHint("header_text", "APP")],
                        Dictionary(), "espn.com")
    assert res == Resolved("appearances", 0.9, "inferred")


def test_resolve_exact_tooltip():
    res = resolve_label("NAME", [VocabHint("tooltip", "Name"),
                                 VocabHint("header_text", "NAME")],
                        Dictionary(), "espn.com")
    assert res == Resolved("name", 1.0, "exact")


def test_resolve_ambiguous_single_letter():
    res = resolve_label("A", [VocabHint("tooltip", "Assists"),
                              VocabHint("aria_label", "Appearances")],
                        Dictionary(), "espn.com")
    assert isinstance(res, Ambiguous)
    assert len(res.candidates) == 2
    scores = [s for _, s in res.candidates]
    assert scores == sorted(scores, reverse=True)
    assert {t for t, _ in res.candidates} == {"assists", "appearances"}


def test_resolve_unknown():
    res = resolve_label("XYZ", [VocabHint("tooltip", "Name")],
                        Dictionary(), "espn.com")
    assert isinstance(res, Unknown)


def test_bare_label_is_unknown():
    # the header text itself carries no semantics
    res = resolve_label("A", [VocabHint("header_text", "A")],
                        Dictionary(), "espn.com")
    assert isinstance(res, Unknown)


def test_dictionary_wins_outright():
    d = Dictionary()
    d.learn_definition("espn.com", "A", "assists")
    res = resolve_label("A", [VocabHint("tooltip", "Appearances")],
                        d, "espn.com")
    assert res == Resolved("assists", 1.0, "user")


def test_resolution_is_host_scoped():
    d = Dictionary()
    d.learn_definition("espn.com", "A", "assists")
    res = resolve_label("A", [], d, "other.com")
    assert isinstance(res, Unknown)


@settings(max_examples=60, deadline=None)
@given(words, words, st.lists(words, max_size=4))
def test_user_override_property(label, term, hint_texts):
    if not label.strip() or not term.strip():
        return
    d = Dictionary()
    d.learn_definition("host.example", label, term)
    hints = [VocabHint("tooltip", t) for t in hint_texts if t.strip()]
    res = resolve_label(label, hints, d, "host.example")
    assert res == Resolved(term.strip().lower(), 1.0, "user")


def test_resolution_determinism():
    hints = [VocabHint("tooltip", "Assists"), VocabHint("tooltip", "Appearances")]
    d = Dictionary()
    assert resolve_label("A", hints, d, "h.com") == \
        resolve_label("A", hints, d, "h.com")


# ---------------------------------------------------------------------------
# learning and persistence
# ---------------------------------------------------------------------------

def test_learn_definition_entry():
    d = Dictionary()
    e = d.learn_definition("espn.com", "A", "assists")
    assert e.provenance == "user"
    assert e.confidence == 1.0
    assert e.raw_label_norm == "a"
    assert e.term == "assists"


def test_learn_definition_upserts():
    d = Dictionary()
    d.learn_definition("espn.com", "A", "assists")
    e2 = d.learn_definition("espn.com", "A", "attempts")
    assert d.lookup("espn.com", "A").term == "attempts"
    assert e2.updated_at  # refreshed timestamp present
    assert len(d.entries()) == 1


def test_learn_rejects_empty():
    d = Dictionary()
    with pytest.raises(ValueError):
        d.learn_definition("espn.com", " ", "assists")
    with pytest.raises(ValueError):
        d.learn_definition("espn.com", "A", "")


def test_user_entry_shadows_inferred():
    d = Dictionary()
    d.store_inferred("espn.com", "APP", "appearances", 0.9, "inferred")
    d.learn_definition("espn.com", "APP", "games played")
    d.store_inferred("espn.com", "APP", "appearances", 0.9, "inferred")
    assert d.lookup("espn.com", "APP").term == "games played"


def test_save_load_round_trip(tmp_path):
    d = Dictionary()
    d.learn_definition("espn.com", "A", "assists")
    d.store_inferred("espn.com", "APP", "appearances", 0.9, "inferred")
    path = str(tmp_path / "dict.json")
    d.save(path)
    loaded, diags = Dictionary.load(path)
    assert diags == []
    assert loaded == d
    # file format: host -> label -> record
    with open(path) as f:
        raw = json.load(f)
    assert raw["espn.com"]["a"]["term"] == "assists"
    assert raw["espn.com"]["a"]["provenance"] == "user"
    assert raw["espn.com"]["a"]["confidence"] == 1.0


def test_save_empty_dictionary(tmp_path):
    path = str(tmp_path / "dict.json")
    Dictionary().save(path)
    loaded, diags = Dictionary.load(path)
    assert loaded.entries() == [] and diags == []


def test_load_missing_file():
    with pytest.raises(OSError) as exc:
        Dictionary.load("/nonexistent/dict.json")
    assert "/nonexistent/dict.json" in str(exc.value)


def test_load_skips_malformed_records(tmp_path):
    path = str(tmp_path / "dict.json")
    raw = {"espn.com": {
        "a": {"term": "assists", "provenance": "user", "confidence": 1.0,
              "updated_at": "2024-01-01T00:00:00Z"},
        "g": {"term": 42, "provenance": "user", "confidence": 1.0},
        "app": {"term": "appearances", "provenance": "inferred",
                "confidence": 0.9, "updated_at": "2024-01-01T00:00:00Z"},
    }}
    with open(path, "w") as f:
        json.dump(raw, f)
    loaded, diags = Dictionary.load(path)
    assert len(loaded.entries()) == 2
    assert len(diags) == 1
    assert "g" in diags[0]


def test_save_is_atomic_no_temp_left(tmp_path):
    d = Dictionary()
    d.learn_definition("espn.com", "A", "assists")
    path = str(tmp_path / "dict.json")
    d.save(path)
    d.save(path)
    assert sorted(os.listdir(tmp_path)) == ["dict.json"]


labels = st.text(alphabet="abcdefg123", min_size=1, max_size=6)


@settings(max_examples=40, deadline=None)
@given(st.dictionaries(st.tuples(labels, labels), labels, max_size=8))
def test_round_trip_property(tmp_path_factory, records):
    d = Dictionary()
    for (host, label), term in records.items():
        d.learn_definition(host + ".com", label, term)
    path = str(tmp_path_factory.mktemp("dicts") / "d.json")
    d.save(path)
    loaded, _ = Dictionary.load(path)
    assert loaded == d
