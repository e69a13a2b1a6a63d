"""Per-session pointer event stream with "most recent matching event" queries."""

from __future__ import annotations

import threading
from collections import deque
from dataclasses import dataclass

CAPACITY = 256
DEFAULT_WINDOW_MS = 10_000

ROLES = ("cell", "header", "row", "table")
KINDS = ("hover", "click")


@dataclass(frozen=True)
class PointerEvent:
    ts: int
    uuid: str
    role: str  # cell | header | row | table
    table_id: str
    row_index: int | None = None
    col_index: int | None = None
    value_text: str | None = None
    kind: str = "hover"

    def __post_init__(self):
        if self.role == "cell" and (self.row_index is None
                                    or self.col_index is None
                                    or self.value_text is None):
            raise ValueError("cell events need row_index, col_index, value_text")
        if self.role == "header" and self.col_index is None:
            raise ValueError("header events need col_index")

    @classmethod
    def from_json(cls, msg: dict) -> "PointerEvent":
        return cls(
            ts=int(msg["ts"]),
            uuid=str(msg["uuid"]),
            role=str(msg["role"]),
            table_id=str(msg.get("table_id", "")),
            row_index=msg.get("row_index"),
            col_index=msg.get("col_index"),
            value_text=msg.get("value_text"),
            kind=str(msg.get("kind", "hover")),
        )


class EventBuffer:
    """Bounded pointer event buffer: one writer, one reader, per session.

    Unknown-UUID events are dropped with a diagnostic rather than failing.
    """

    def __init__(self, capacity: int = CAPACITY,
                 window_ms: int = DEFAULT_WINDOW_MS):
        self.capacity = capacity
        self.window_ms = window_ms
        self.known_uuids: set[str] | None = None  # None = accept everything
        self.diagnostics: list[str] = []
        self._lock = threading.Lock()
        self._events: deque[tuple[int, PointerEvent]] = deque(maxlen=capacity)
        self._seq = 0

    def set_known_uuids(self, uuids: set[str]) -> None:
        with self._lock:
            self.known_uuids = set(uuids)

    def push_event(self, event: PointerEvent) -> bool:
        with self._lock:
            if self.known_uuids is not None and event.uuid not in self.known_uuids:
                self.diagnostics.append(
                    f"dropped pointer event with unknown uuid {event.uuid}")
                return False
            self._seq += 1
            self._events.append((self._seq, event))
            return True

    def most_recent(self, role_filter: set[str] | None = None,
                    table_filter: str | None = None,
                    max_age_ms: int | None = None,
                    now: int | None = None) -> PointerEvent | None:
        """Newest event matching all filters; arrival order breaks ts ties."""
        if max_age_ms is None:
            max_age_ms = self.window_ms
        with self._lock:
            best: tuple[int, PointerEvent] | None = None
            for seq, e in self._events:
                if role_filter is not None and e.role not in role_filter:
                    continue
                if table_filter is not None and e.table_id != table_filter:
                    continue
                if now is not None and now - e.ts > max_age_ms:
                    continue
                if best is None or (e.ts, seq) >= (best[1].ts, best[0]):
                    best = (seq, e)
            return best[1] if best else None

    def prune(self, now: int) -> None:
        with self._lock:
            fresh = [(s, e) for s, e in self._events
                     if now - e.ts <= self.window_ms]
            self._events = deque(fresh, maxlen=self.capacity)

    def events(self) -> list[PointerEvent]:
        with self._lock:
            return [e for _, e in self._events]

    def __len__(self) -> int:
        with self._lock:
            return len(self._events)
