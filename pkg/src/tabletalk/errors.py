"""Shared error types. Every error a user can trigger carries a speakable message."""

from __future__ import annotations


class SpeakableError(Exception):
    """Base for errors that the responder turns into a spoken explanation."""

    def speech(self) -> str:
        return str(self)


class NotUnderstood(SpeakableError):
    def __init__(self, text: str):
        super().__init__(
            "Sorry, I didn't understand that. You can filter, sort, average, "
            "query cells, or assign attribute names to columns."
        )
        self.text = text


class UnknownColumn(SpeakableError):
    def __init__(self, term: str):
        super().__init__(f"I couldn't find a column called {term!r} in this table.")
        self.term = term


class AmbiguousColumn(SpeakableError):
    def __init__(self, term: str, candidates: list[str]):
        opts = " or ".join(candidates[:3])
        super().__init__(f"{term!r} could mean {opts}. Please be more specific.")
        self.term = term
        self.candidates = candidates


class StaleDeixis(SpeakableError):
    def __init__(self, slot: str):
        super().__init__(
            f"I couldn't tell which {slot} you meant. "
            "Please point at it again and repeat the request."
        )
        self.slot = slot


class IncompleteFrame(SpeakableError):
    def __init__(self, missing: list[str]):
        super().__init__(
            "I still need the following to do that: " + ", ".join(missing) + "."
        )
        self.missing = missing


class UnsupportedComparison(SpeakableError):
    def __init__(self, column_label: str):
        super().__init__(
            f"The column {column_label!r} isn't numeric, so I can't compare "
            "it with greater-than or less-than."
        )
        self.column_label = column_label


class EmptyAggregate(SpeakableError):
    def __init__(self, column_label: str):
        super().__init__(
            f"There are no numeric values in column {column_label!r} to aggregate."
        )
        self.column_label = column_label


class RowOutOfRange(SpeakableError):
    def __init__(self, row: int, nrows: int):
        super().__init__(f"Row {row} is out of range; the table has {nrows} rows.")
        self.row = row


class ColOutOfRange(SpeakableError):
    def __init__(self, col: int, ncols: int):
        super().__init__(f"Column {col} is out of range; the table has {ncols} columns.")
        self.col = col


class NoPageRegistered(SpeakableError):
    def __init__(self):
        super().__init__("No page is registered yet, so there is nothing to act on.")
