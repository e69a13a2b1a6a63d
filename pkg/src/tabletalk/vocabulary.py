"""Column vocabulary: harvest hints from markup, match abbreviated labels to
human terms, learn user definitions, and persist a host-scoped dictionary.

Scoring constants are pinned so resolution is deterministic:
exact 1.0, prefix 0.9, anchored subsequence 0.8, edit-distance capped at 0.7;
accept threshold 0.75 with a 0.05 ambiguity band.
"""

from __future__ import annotations

import json
import os
import re
import tempfile
import threading
from dataclasses import dataclass, field
from datetime import datetime, timezone

ACCEPT_THRESHOLD = 0.75
AMBIGUITY_BAND = 0.05

_NON_ALNUM = re.compile(r"[^a-z0-9]+")


def normalize(s: str) -> str:
    """Lowercase and strip everything non-alphanumeric ("APP"/"App." collide)."""
    return _NON_ALNUM.sub("", s.lower())


def levenshtein(a: str, b: str) -> int:
    if len(a) < len(b):
        a, b = b, a
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        cur = [i]
        for j, cb in enumerate(b, 1):
            cur.append(min(cur[-1] + 1, prev[j] + 1,
                           prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


def _is_subsequence(small: str, big: str) -> bool:
    it = iter(big)
    return all(ch in it for ch in small)


def score_match(label: str, term: str) -> float:
    """Similarity of an abbreviated label to a candidate human term, in [0,1]."""
    a, b = normalize(label), normalize(term)
    if not a or not b:
        return 0.0
    if a == b:
        return 1.0
    if b.startswith(a):
        return 0.9
    if a[0] == b[0] and _is_subsequence(a, b):
        return 0.8
    dist = levenshtein(a, b)
    return min(0.7, max(0.0, 1.0 - dist / max(len(a), len(b))))


# ---------------------------------------------------------------------------
# Hints
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class VocabHint:
    source: str  # tooltip | abbr_tag | aria_label | header_text
    text: str


def collect_hints(*, tooltip: str | None = None, abbr: str | None = None,
                  aria_label: str | None = None,
                  header_text: str = "") -> list[VocabHint]:
    """Assemble hints in priority order, deduplicated case-insensitively."""
    hints: list[VocabHint] = []
    seen: set[str] = set()
    for source, text in (("tooltip", tooltip), ("abbr_tag", abbr),
                         ("aria_label", aria_label),
                         ("header_text", header_text)):
        if text is None:
            continue
        text = text.strip()
        if not text:
            continue
        key = text.casefold()
        if key in seen:
            continue
        seen.add(key)
        hints.append(VocabHint(source=source, text=text))
    return hints


def harvest_hints(column, snapshot) -> list[VocabHint]:
    """Re-derive a column's hints from the originating snapshot markup."""
    from . import page_model  # local import; page_model depends on this module

    if column.header_path is None:
        return collect_hints(header_text=column.raw_label)
    root = page_model.parse_html(snapshot.html_text)
    el = page_model.resolve_locator(root, column.header_path)
    if el is None:
        return collect_hints(header_text=column.raw_label)
    abbr_el = el.find_first("abbr")
    return collect_hints(
        tooltip=el.attrs.get("title"),
        abbr=abbr_el.attrs.get("title") if abbr_el is not None else None,
        aria_label=el.attrs.get("aria-label"),
        header_text=el.text(),
    )


# ---------------------------------------------------------------------------
# Dictionary
# ---------------------------------------------------------------------------

def _now_iso() -> str:
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


@dataclass(frozen=True)
class VocabularyEntry:
    scope_host: str
    raw_label_norm: str
    term: str
    provenance: str  # exact | inferred | user
    confidence: float
    updated_at: str


@dataclass(frozen=True)
class Resolved:
    term: str
    confidence: float
    provenance: str


@dataclass(frozen=True)
class Ambiguous:
    candidates: list[tuple[str, float]]  # ranked, scores non-increasing


@dataclass(frozen=True)
class Unknown:
    pass


ResolutionResult = Resolved | Ambiguous | Unknown


class Dictionary:
    """Host-scoped label-to-term store.

    Reads may be concurrent; writes are serialized behind a lock and become
    atomically visible. save() writes via temp file + rename.
    """

    def __init__(self):
        self._lock = threading.RLock()
        self._entries: dict[tuple[str, str], VocabularyEntry] = {}

    def lookup(self, scope_host: str, label: str) -> VocabularyEntry | None:
        return self._entries.get((scope_host.lower(), normalize(label)))

    def entries(self) -> list[VocabularyEntry]:
        with self._lock:
            return list(self._entries.values())

    def upsert(self, entry: VocabularyEntry) -> None:
        with self._lock:
            self._entries[(entry.scope_host, entry.raw_label_norm)] = entry

    def learn_definition(self, scope_host: str, label: str,
                         term: str) -> VocabularyEntry:
        """User-supplied definition: provenance user, confidence 1.0, upsert."""
        if not label.strip() or not term.strip():
            raise ValueError("label and term must be non-empty")
        entry = VocabularyEntry(
            scope_host=scope_host.lower(),
            raw_label_norm=normalize(label),
            term=term.strip().lower(),
            provenance="user",
            confidence=1.0,
            updated_at=_now_iso(),
        )
        self.upsert(entry)
        return entry

    def store_inferred(self, scope_host: str, label: str, term: str,
                       confidence: float, provenance: str) -> None:
        """Record an inferred/exact resolution; never overwrites a user entry."""
        with self._lock:
            existing = self.lookup(scope_host, label)
            if existing is not None and existing.provenance == "user":
                return
            self.upsert(VocabularyEntry(
                scope_host=scope_host.lower(),
                raw_label_norm=normalize(label),
                term=term.strip().lower(),
                provenance=provenance,
                confidence=confidence,
                updated_at=_now_iso(),
            ))

    # -- persistence --------------------------------------------------------

    def save(self, path: str) -> None:
        with self._lock:
            by_host: dict[str, dict[str, dict]] = {}
            for e in self._entries.values():
                by_host.setdefault(e.scope_host, {})[e.raw_label_norm] = {
                    "term": e.term,
                    "provenance": e.provenance,
                    "confidence": e.confidence,
                    "updated_at": e.updated_at,
                }
        dirname = os.path.dirname(os.path.abspath(path))
        fd, tmp = tempfile.mkstemp(prefix=".dict-", dir=dirname)
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as f:
                json.dump(by_host, f, indent=2, sort_keys=True)
            os.replace(tmp, path)
        except BaseException:
            os.unlink(tmp)
            raise

    @classmethod
    def load(cls, path: str) -> tuple["Dictionary", list[str]]:
        """Load a dictionary file; corrupt records are skipped with diagnostics."""
        try:
            with open(path, encoding="utf-8") as f:
                raw = json.load(f)
        except OSError as exc:
            raise OSError(f"cannot read dictionary file {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ValueError(f"dictionary file {path} is not valid JSON: {exc}") from exc
        d = cls()
        diagnostics: list[str] = []
        if not isinstance(raw, dict):
            diagnostics.append(f"{path}: top level is not an object")
            return d, diagnostics
        for host, labels in raw.items():
            if not isinstance(labels, dict):
                diagnostics.append(f"{path}: host {host!r} record is not an object")
                continue
            for label, rec in labels.items():
                if (not isinstance(rec, dict)
                        or not isinstance(rec.get("term"), str)
                        or rec.get("provenance") not in ("exact", "inferred", "user")
                        or not isinstance(rec.get("confidence"), (int, float))):
                    diagnostics.append(
                        f"{path}: skipping malformed record {host!r}/{label!r}")
                    continue
                d.upsert(VocabularyEntry(
                    scope_host=str(host).lower(),
                    raw_label_norm=str(label),
                    term=rec["term"],
                    provenance=rec["provenance"],
                    confidence=float(rec["confidence"]),
                    updated_at=str(rec.get("updated_at", "")),
                ))
        return d, diagnostics

    def __eq__(self, other):
        if not isinstance(other, Dictionary):
            return NotImplemented
        return self._entries == other._entries


# ---------------------------------------------------------------------------
# Resolution
# ---------------------------------------------------------------------------

def resolve_label(label: str, hints: list[VocabHint], dictionary: Dictionary,
                  scope_host: str) -> ResolutionResult:
    """Map a raw column label to a human term.

    A dictionary hit wins outright. Otherwise hints are scored; the label's
    own header text carries no semantics and is ignored as a candidate.
    """
    entry = dictionary.lookup(scope_host, label)
    if entry is not None:
        return Resolved(entry.term, entry.confidence, entry.provenance)

    label_norm = normalize(label)
    best_by_term: dict[str, float] = {}
    order: list[str] = []
    for hint in hints:
        if hint.source == "header_text" and normalize(hint.text) == label_norm:
            continue
        term = hint.text.strip().lower()
        score = score_match(label, hint.text)
        if term not in best_by_term:
            order.append(term)
            best_by_term[term] = score
        else:
            best_by_term[term] = max(best_by_term[term], score)

    ranked = sorted(order, key=lambda t: -best_by_term[t])
    if not ranked:
        return Unknown()
    best = best_by_term[ranked[0]]
    second = best_by_term[ranked[1]] if len(ranked) > 1 else 0.0
    if best >= ACCEPT_THRESHOLD and best - second > AMBIGUITY_BAND:
        provenance = "exact" if best == 1.0 else "inferred"
        return Resolved(ranked[0], best, provenance)
    contenders = [(t, best_by_term[t]) for t in ranked
                  if best_by_term[t] >= ACCEPT_THRESHOLD
                  and best - best_by_term[t] <= AMBIGUITY_BAND]
    if len(contenders) >= 2:
        return Ambiguous(contenders)
    return Unknown()
