"""tabletalk: turn HTML pages with tables into interactive agents driven by
typed text and pointing."""

from .event_buffer import EventBuffer, PointerEvent
from .page_model import (
    BindingManifest,
    Cell,
    ColumnDescriptor,
    PageModel,
    PageSnapshot,
    TableModel,
    build_binding_manifest,
    parse_page,
    rebind_snapshot,
)
from .session_service import Session, create_app
from .vocabulary import Dictionary, VocabHint, VocabularyEntry

__all__ = [
    "BindingManifest",
    "Cell",
    "ColumnDescriptor",
    "Dictionary",
    "EventBuffer",
    "PageModel",
    "PageSnapshot",
    "PointerEvent",
    "Session",
    "TableModel",
    "VocabHint",
    "VocabularyEntry",
    "build_binding_manifest",
    "create_app",
    "parse_page",
    "rebind_snapshot",
]

__version__ = "0.1.0"
