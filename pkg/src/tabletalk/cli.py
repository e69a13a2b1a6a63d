"""Headless driver: parse fixtures, run scripted multimodal scenarios, an
interactive REPL with simulated pointing, and the WebSocket service.

Exit codes: 0 = pass, 1 = expectation failed, 2 = usage/input error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import command_parser, vocabulary
from .event_buffer import DEFAULT_WINDOW_MS
from .page_model import PageSnapshot, parse_page
from .session_service import Session
from .table_engine import ResultTable


class SyntheticClock:
    """Monotonic scenario clock: 100 ms per step keeps deixis deterministic."""

    STEP_MS = 100

    def __init__(self, start_ms: int = 1_000_000):
        self.t = start_ms

    def now(self) -> int:
        return self.t

    def advance(self, ms: int = STEP_MS) -> None:
        self.t += ms


def _read_file(path: str) -> str:
    with open(path, encoding="utf-8") as f:
        return f.read()


def _snapshot_for(path: str, clock: SyntheticClock | None = None) -> PageSnapshot:
    name = os.path.basename(path)
    now = clock.now() if clock else 0
    return PageSnapshot.create(f"file://localhost/{name}", _read_file(path), now)


# ---------------------------------------------------------------------------
# parse
# ---------------------------------------------------------------------------

def cmd_parse(args) -> int:
    try:
        snapshot = _snapshot_for(args.file)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    model = parse_page(snapshot)
    if args.json:
        print(json.dumps(model.to_json(), indent=2))
    else:
        print(f"{len(model.tables)} table(s)")
        for t in model.tables:
            labels = ", ".join(c.raw_label or "(unnamed)" for c in t.columns)
            print(f"  {t.table_id}: {t.nrows} rows x {t.ncols} cols [{labels}]")
        for d in model.diagnostics:
            print(f"  note: {d}")
    return 0


# ---------------------------------------------------------------------------
# scenario runner
# ---------------------------------------------------------------------------

def _scenario_session(page_path: str, args) -> tuple[Session, SyntheticClock]:
    clock = SyntheticClock()
    dictionary = vocabulary.Dictionary()
    if getattr(args, "dict", None) and os.path.exists(args.dict):
        dictionary, _ = vocabulary.Dictionary.load(args.dict)
    session = Session(dictionary,
                      deixis_window_ms=getattr(args, "deixis_window_ms",
                                               DEFAULT_WINDOW_MS),
                      wake_word=getattr(args, "wake_word",
                                        command_parser.DEFAULT_WAKE_WORD),
                      clock=clock.now,
                      dict_path=getattr(args, "dict", None))
    snapshot = _snapshot_for(page_path, clock)
    session.handle_message({"type": "register", "url": snapshot.url,
                            "html": snapshot.html_text})
    return session, clock


def _point_message(session: Session, table: int, row: int | None,
                   col: int, ts: int) -> dict:
    t = session.model.tables[table]
    if row is None:
        return {"type": "pointer", "ts": ts, "uuid": t.header_uuids[col],
                "role": "header", "table_id": t.table_id, "col_index": col,
                "kind": "hover"}
    cell = t.rows[row][col]
    return {"type": "pointer", "ts": ts, "uuid": cell.uuid, "role": "cell",
            "table_id": t.table_id, "row_index": row, "col_index": col,
            "value_text": cell.raw_text, "kind": "hover"}


def run_scenario(scenario: dict, base_dir: str, args,
                 out=None) -> int:
    if out is None:
        out = sys.stdout
    page = scenario.get("page")
    steps = scenario.get("steps")
    if not isinstance(page, str) or not isinstance(steps, list):
        print("error: scenario needs a \"page\" path and a \"steps\" list",
              file=sys.stderr)
        return 2
    page_path = page if os.path.isabs(page) else os.path.join(base_dir, page)
    try:
        session, clock = _scenario_session(page_path, args)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    last_speech = ""
    for i, step in enumerate(steps):
        clock.advance()
        try:
            if "point" in step:
                p = step["point"]
                msg = _point_message(session, p.get("table", 0), p["row"],
                                     p["col"], clock.now())
                session.handle_message(msg)
                print(f"[{i}] point table={p.get('table', 0)} "
                      f"row={p['row']} col={p['col']}", file=out)
            elif "point_header" in step:
                p = step["point_header"]
                msg = _point_message(session, p.get("table", 0), None,
                                     p["col"], clock.now())
                session.handle_message(msg)
                print(f"[{i}] point_header table={p.get('table', 0)} "
                      f"col={p['col']}", file=out)
            elif "say" in step:
                replies = session.handle_message({"type": "utterance",
                                                  "text": step["say"]})
                last_speech = replies[0].get("speech", "")
                print(f"[{i}] say: {step['say']}", file=out)
                print(f"    speech: {last_speech}", file=out)
            elif "expect_speech" in step:
                want = step["expect_speech"]
                if want != last_speech and want not in last_speech:
                    print(f"FAIL step {i}: expected speech {want!r}, "
                          f"got {last_speech!r}", file=out)
                    return 1
                print(f"[{i}] expect_speech ok", file=out)
            elif "expect_rows" in step:
                want = step["expect_rows"]
                outcome = session.last_outcome
                got = outcome.nrows if isinstance(outcome, ResultTable) else None
                if got != want:
                    print(f"FAIL step {i}: expected {want} rows, got {got}",
                          file=out)
                    return 1
                print(f"[{i}] expect_rows ok ({want})", file=out)
            elif "wait" in step:
                clock.advance(int(step["wait"]))
                print(f"[{i}] wait {step['wait']} ms", file=out)
            else:
                print(f"error: step {i} not understood: {step!r}",
                      file=sys.stderr)
                return 2
        except (KeyError, IndexError, TypeError) as exc:
            print(f"error: step {i} malformed: {exc!r}", file=sys.stderr)
            return 2
    return 0


def cmd_run(args) -> int:
    try:
        scenario = json.loads(_read_file(args.scenario))
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except json.JSONDecodeError as exc:
        print(f"error: scenario is not valid JSON: {exc}", file=sys.stderr)
        return 2
    base_dir = os.path.dirname(os.path.abspath(args.scenario))
    return run_scenario(scenario, base_dir, args)


# ---------------------------------------------------------------------------
# repl
# ---------------------------------------------------------------------------

REPL_HELP = """\
Commands:
  !point <table> <row> <col>   simulate hovering a cell
  !header <table> <col>        simulate hovering a column header
  help                         show this message
  <anything else>              spoken to the agent
Intents: filter rows, sort rows, averages/sums, query cells,
         assign attribute <name> to this column.
"""


def cmd_repl(args) -> int:
    try:
        session, clock = _scenario_session(args.file, args)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"loaded {args.file}; type 'help' for commands")
    for line in sys.stdin:
        line = line.strip()
        if not line:
            continue
        clock.advance()
        if line == "help":
            print(REPL_HELP, end="")
            continue
        if line.startswith("!point"):
            try:
                _, t, r, c = line.split()
                session.handle_message(
                    _point_message(session, int(t), int(r), int(c),
                                   clock.now()))
                print("ok")
            except (ValueError, IndexError):
                print("usage: !point <table> <row> <col>")
            continue
        if line.startswith("!header"):
            try:
                _, t, c = line.split()
                session.handle_message(
                    _point_message(session, int(t), None, int(c), clock.now()))
                print("ok")
            except (ValueError, IndexError):
                print("usage: !header <table> <col>")
            continue
        for reply in session.handle_message({"type": "utterance",
                                             "text": line}):
            if reply.get("type") == "response":
                print(reply.get("speech", ""))
                if "page_html" in reply:
                    print(f"(generated page, {len(reply['page_html'])} bytes)")
    return 0


# ---------------------------------------------------------------------------
# serve
# ---------------------------------------------------------------------------

def cmd_serve(args) -> int:
    import uvicorn

    from .session_service import create_app

    app = create_app(dict_path=args.dict,
                     deixis_window_ms=args.deixis_window_ms,
                     wake_word=args.wake_word)
    uvicorn.run(app, host="0.0.0.0", port=args.port)
    return 0


# ---------------------------------------------------------------------------

def build_arg_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tabletalk")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", help="parse an HTML file into a page model")
    p.add_argument("file")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("run", help="run a scripted multimodal scenario")
    p.add_argument("scenario")
    p.add_argument("--dict", default=None)
    p.add_argument("--deixis-window-ms", type=int, default=DEFAULT_WINDOW_MS)
    p.add_argument("--wake-word", default=command_parser.DEFAULT_WAKE_WORD)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("repl", help="interactive loop with simulated pointing")
    p.add_argument("file")
    p.add_argument("--dict", default=None)
    p.add_argument("--deixis-window-ms", type=int, default=DEFAULT_WINDOW_MS)
    p.add_argument("--wake-word", default=command_parser.DEFAULT_WAKE_WORD)
    p.set_defaults(func=cmd_repl)

    p = sub.add_parser("serve", help="start the WebSocket session service")
    p.add_argument("--port", type=int, default=8787)
    p.add_argument("--dict", default=None)
    p.add_argument("--deixis-window-ms", type=int, default=DEFAULT_WINDOW_MS)
    p.add_argument("--wake-word", default=command_parser.DEFAULT_WAKE_WORD)
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_arg_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
