"""Per-session orchestration and the WebSocket wire protocol.

A Session owns one registered page, its event buffer, and a clarification
queue, and runs the parse -> resolve -> execute -> respond pipeline for each
utterance. Sessions are independent; the vocabulary dictionary is the only
cross-session shared state.
"""

from __future__ import annotations

import os
import time
import uuid as _uuid

from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.responses import FileResponse, PlainTextResponse

from . import command_parser, page_model, responder, table_engine, vocabulary
from .errors import NoPageRegistered, SpeakableError
from .event_buffer import DEFAULT_WINDOW_MS, EventBuffer, PointerEvent
from .page_model import (
    BindingManifest,
    PageModel,
    PageSnapshot,
    build_binding_manifest,
    diff_manifests,
    parse_page,
    rebind_snapshot,
)

MAX_OUTSTANDING_CLARIFICATIONS = 3


def _wall_clock_ms() -> int:
    return int(time.time() * 1000)


class Session:
    def __init__(self, dictionary: vocabulary.Dictionary | None = None, *,
                 session_id: str | None = None,
                 deixis_window_ms: int = DEFAULT_WINDOW_MS,
                 wake_word: str = command_parser.DEFAULT_WAKE_WORD,
                 clock=None, dict_path: str | None = None):
        self.session_id = session_id or str(_uuid.uuid4())
        self.dictionary = dictionary if dictionary is not None \
            else vocabulary.Dictionary()
        self.deixis_window_ms = deixis_window_ms
        self.wake_word = wake_word
        self.clock = clock or _wall_clock_ms
        self.dict_path = dict_path

        self.model: PageModel | None = None
        self.manifest: BindingManifest | None = None
        self.buffer = EventBuffer(window_ms=deixis_window_ms)
        self.clarifications: list[dict] = []  # {prompt_id, label, prompt}
        self.answered_labels: set[str] = set()
        self.seq = 0
        self.last_response: responder.Response | None = None
        self.last_outcome: table_engine.Outcome | None = None

    @property
    def scope_host(self) -> str:
        return self.model.host if self.model else ""

    # -- message dispatch ----------------------------------------------------

    def handle_message(self, msg: dict) -> list[dict]:
        self.seq += 1
        kind = msg.get("type")
        if kind == "register":
            return self.handle_register(msg)
        if kind == "pointer":
            return self.handle_pointer(msg)
        if kind == "utterance":
            return self.handle_utterance(msg)
        if kind == "mutation":
            return self.handle_mutation(msg)
        return [{"type": "response", "seq": self.seq,
                 "speech": f"Unrecognized message type {kind!r}."}]

    # -- register --------------------------------------------------------------

    def handle_register(self, msg: dict) -> list[dict]:
        snapshot = PageSnapshot.create(msg["url"], msg.get("html", ""),
                                       self.clock())
        self.model = parse_page(snapshot)
        self._resolve_page_columns()
        self.manifest = build_binding_manifest(self.model)
        self.buffer.set_known_uuids(self.manifest.uuids())

        out: list[dict] = [{"type": "manifest",
                            "entries": [e.to_json()
                                        for e in self.manifest.entries],
                            "seq": self.seq}]
        out.extend(self._queue_clarifications())
        if not self.model.tables:
            out.append({"type": "response", "seq": self.seq,
                        "speech": "I couldn't find any tables on this page."})
        return out

    def _resolve_page_columns(self) -> None:
        assert self.model is not None
        for table in self.model.tables:
            for col in table.columns:
                if col.resolved_term:
                    continue
                res = vocabulary.resolve_label(col.raw_label, col.hints,
                                               self.dictionary,
                                               self.model.host)
                if isinstance(res, vocabulary.Resolved):
                    col.resolved_term = res.term
                    if res.provenance in ("inferred", "exact"):
                        self.dictionary.store_inferred(
                            self.model.host, col.raw_label, res.term,
                            res.confidence, res.provenance)

    def _queue_clarifications(self) -> list[dict]:
        """Queue prompts for unresolved/ambiguous labels, at most 3 outstanding."""
        assert self.model is not None
        out: list[dict] = []
        pending_labels = {c["label"] for c in self.clarifications}
        for table in self.model.tables:
            for col in table.columns:
                if col.resolved_term or not col.raw_label:
                    continue
                if col.raw_label in pending_labels \
                        or col.raw_label in self.answered_labels:
                    continue
                if len(self.clarifications) >= MAX_OUTSTANDING_CLARIFICATIONS:
                    return out
                res = vocabulary.resolve_label(col.raw_label, col.hints,
                                               self.dictionary,
                                               self.model.host)
                candidates = None
                if isinstance(res, vocabulary.Resolved):
                    continue
                if isinstance(res, vocabulary.Ambiguous):
                    candidates = [t for t, _ in res.candidates]
                prompt_id = f"clar-{self.session_id[:8]}-{self.seq}-{len(self.clarifications)}"
                prompt = responder.compose_clarification(col.raw_label,
                                                         candidates)
                self.clarifications.append({"prompt_id": prompt_id,
                                            "label": col.raw_label,
                                            "prompt": prompt})
                pending_labels.add(col.raw_label)
                out.append({"type": "clarification", "prompt_id": prompt_id,
                            "prompt": prompt, "seq": self.seq})
        return out

    # -- pointer ---------------------------------------------------------------

    def handle_pointer(self, msg: dict) -> list[dict]:
        data = dict(msg)
        data.setdefault("ts", self.clock())
        try:
            event = PointerEvent.from_json(data)
        except (KeyError, ValueError) as exc:
            self.buffer.diagnostics.append(f"bad pointer message: {exc}")
            return []
        self.buffer.push_event(event)
        return []

    # -- utterance ---------------------------------------------------------------

    def handle_utterance(self, msg: dict) -> list[dict]:
        now = self.clock()
        try:
            response = self._run_pipeline(msg.get("text", ""), now)
        except SpeakableError as exc:
            response = responder.Response(speech_text=exc.speech())
            self.last_outcome = None
        self.last_response = response
        out = {"type": "response", "speech": response.speech_text,
               "seq": self.seq}
        if response.page_html is not None:
            out["page_html"] = response.page_html
        if response.in_place_patch is not None:
            out["patch"] = response.in_place_patch
        return [out]

    def _target_table(self, now: int) -> page_model.TableModel:
        assert self.model is not None
        ev = self.buffer.most_recent(max_age_ms=self.deixis_window_ms, now=now)
        if ev is not None:
            for t in self.model.tables:
                if t.table_id == ev.table_id:
                    return t
        return self.model.tables[0]

    def _run_pipeline(self, text: str, now: int) -> responder.Response:
        if self.model is None or not self.model.tables:
            raise NoPageRegistered()
        intent, _ = command_parser.classify_intent(text, self.wake_word)
        frame = command_parser.extract_slots(text, intent, self.wake_word)
        table = self._target_table(now)
        frame = command_parser.resolve_columns(frame, table, self.dictionary,
                                               self.scope_host)
        frame = command_parser.resolve_deixis(frame, self.buffer, now, table,
                                              self.deixis_window_ms)
        command = command_parser.build_command(frame, table)
        outcome = table_engine.execute(
            command, table, dictionary=self.dictionary,
            scope_host=self.scope_host,
            on_vocab_change=lambda col, term: self._on_definition(table, col))
        self.last_outcome = outcome
        return responder.build_response(outcome, source_table=table)

    def _on_definition(self, table: page_model.TableModel, col: int) -> None:
        label = table.columns[col].raw_label
        self.answered_labels.add(label)
        self.clarifications = [c for c in self.clarifications
                               if c["label"] != label]
        self._resolve_page_columns()
        if self.dict_path:
            self.dictionary.save(self.dict_path)

    # -- mutation ----------------------------------------------------------------

    def handle_mutation(self, msg: dict) -> list[dict]:
        if self.model is None or self.manifest is None:
            return [{"type": "response", "seq": self.seq,
                     "speech": NoPageRegistered().speech()}]
        snapshot = PageSnapshot.create(self.model.url, msg.get("html", ""),
                                       self.clock())
        new_model, new_manifest = rebind_snapshot(self.model, snapshot)
        add, remove = diff_manifests(self.manifest, new_manifest)
        self.model = new_model
        self.manifest = new_manifest
        self._resolve_page_columns()
        self.buffer.set_known_uuids(new_manifest.uuids())
        out: list[dict] = [{"type": "manifest_diff",
                            "add": [e.to_json() for e in add],
                            "remove": list(remove),
                            "seq": self.seq}]
        out.extend(self._queue_clarifications())
        return out


# ---------------------------------------------------------------------------
# HTTP / WebSocket service
# ---------------------------------------------------------------------------

_STATIC_DIR = os.path.join(os.path.dirname(__file__), "static")


def create_app(dict_path: str | None = None,
               deixis_window_ms: int = DEFAULT_WINDOW_MS,
               wake_word: str = command_parser.DEFAULT_WAKE_WORD,
               overlay_path: str | None = None):
    if dict_path and os.path.exists(dict_path):
        dictionary, _ = vocabulary.Dictionary.load(dict_path)
    else:
        dictionary = vocabulary.Dictionary()

    app = FastAPI(title="tabletalk")
    app.state.dictionary = dictionary

    @app.get("/healthz")
    async def healthz():
        return PlainTextResponse("ok")

    @app.get("/overlay.js")
    async def overlay_js():
        path = overlay_path or os.path.join(_STATIC_DIR, "overlay.js")
        return FileResponse(path, media_type="text/javascript")

    @app.websocket("/ws")
    async def ws(websocket: WebSocket):
        await websocket.accept()
        session = Session(dictionary, deixis_window_ms=deixis_window_ms,
                          wake_word=wake_word, dict_path=dict_path)
        try:
            while True:
                msg = await websocket.receive_json()
                for reply in session.handle_message(msg):
                    await websocket.send_json(reply)
        except WebSocketDisconnect:
            pass

    return app
