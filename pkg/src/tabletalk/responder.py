"""Turn command outcomes into user-facing artifacts: a generated result page,
a speech-ready sentence, and clarification prompts. All output is
deterministic for identical inputs."""

from __future__ import annotations

import html as _html
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal

from . import table_engine
from .table_engine import (
    Ack,
    Aggregate,
    Command,
    Filter,
    NeedsClarification,
    Outcome,
    QueryCell,
    ResultTable,
    Scalar,
    Sort,
)

CMP_WORDS = {"gt": "greater than", "lt": "less than", "eq": "equal to"}
FN_WORDS = {"average": "average", "sum": "sum", "min": "minimum",
            "max": "maximum", "count": "count"}
ORDER_WORDS = {"asc": "ascending", "desc": "descending"}


def speak_number(value: Decimal) -> str:
    """Round to 2 decimal places and trim trailing zeros ("4", "4.2")."""
    q = value.quantize(Decimal("0.01"), rounding=ROUND_HALF_UP)
    s = f"{q:f}"
    if "." in s:
        s = s.rstrip("0").rstrip(".")
    return s or "0"


def _literal_words(literal: Decimal | str) -> str:
    if isinstance(literal, Decimal):
        return speak_number(literal)
    return str(literal)


def _term_of(columns, col: int) -> str:
    if 0 <= col < len(columns):
        return columns[col].display_term() or f"column {col}"
    return f"column {col}"


def describe_command(cmd: Command, columns) -> str:
    """Echo a command in words, e.g. "rows where appearances is greater than 35"."""
    if isinstance(cmd, Filter):
        return (f"rows where {_term_of(columns, cmd.col)} is "
                f"{CMP_WORDS[cmd.cmp]} {_literal_words(cmd.literal)}")
    if isinstance(cmd, Sort):
        return (f"rows sorted by {_term_of(columns, cmd.col)} "
                f"{ORDER_WORDS[cmd.order]}")
    if isinstance(cmd, Aggregate):
        return f"the {FN_WORDS[cmd.fn]} of {_term_of(columns, cmd.col)}"
    if isinstance(cmd, QueryCell):
        return f"the {_term_of(columns, cmd.col)} in row {cmd.row + 1}"
    if isinstance(cmd, table_engine.DefineAttribute):
        return f"column {cmd.col} defined as {cmd.term}"
    return "result"


def render_result_page(rt: ResultTable) -> str:
    """Standalone document for a result table.

    The page carries no scripts and parses back into the same grid, so
    generated pages are themselves agent-ready.
    """
    if rt.provenance_command is not None:
        caption = describe_command(rt.provenance_command, rt.columns)
        caption = caption[:1].upper() + caption[1:]
    else:
        caption = "Result"
    esc = _html.escape
    lines = [
        "<!DOCTYPE html>",
        "<html>",
        "<head>",
        '<meta charset="utf-8">',
        f"<title>{esc(caption)}</title>",
        "</head>",
        "<body>",
        f"<h1>{esc(caption)}</h1>",
        "<table>",
        "<thead>",
        "<tr>" + "".join(f"<th>{esc(c.display_term())}</th>"
                         for c in rt.columns) + "</tr>",
        "</thead>",
        "<tbody>",
    ]
    for row in rt.rows:
        lines.append("<tr>" + "".join(f"<td>{esc(cell.raw_text)}</td>"
                                      for cell in row) + "</tr>")
    lines.append("</tbody>")
    lines.append("</table>")
    if not rt.rows:
        lines.append("<p>No matching rows.</p>")
    lines.append("</body>")
    lines.append("</html>")
    return "\n".join(lines) + "\n"


def compose_speech(outcome: Outcome) -> str:
    if isinstance(outcome, ResultTable):
        return _speak_result_table(outcome)
    if isinstance(outcome, Scalar):
        return _speak_scalar(outcome)
    if isinstance(outcome, Ack):
        if outcome.term:
            return f"Okay — I'll call that column {outcome.term}."
        return f"Okay — {outcome.description}."
    if isinstance(outcome, NeedsClarification):
        return outcome.prompt_text
    raise TypeError(f"not an outcome: {outcome!r}")


def _rows_word(n: int) -> str:
    return "1 row" if n == 1 else f"{n} rows"


def _speak_result_table(rt: ResultTable) -> str:
    cmd = rt.provenance_command
    if isinstance(cmd, Filter):
        verb = "has" if rt.nrows == 1 else "have"
        cmp_words = {"gt": "greater than", "lt": "less than", "eq": "equal to"}
        text = (f"{_rows_word(rt.nrows)} {verb} {_term_of(rt.columns, cmd.col)} "
                f"{cmp_words[cmd.cmp]} {_literal_words(cmd.literal)}.")
    elif isinstance(cmd, Sort):
        text = (f"Sorted {_rows_word(rt.nrows)} by "
                f"{_term_of(rt.columns, cmd.col)} in "
                f"{ORDER_WORDS[cmd.order]} order.")
    else:
        text = f"Here are {_rows_word(rt.nrows)}."
    if rt.skipped_count > 0:
        text += f" Skipped {rt.skipped_count} cells that were not numbers."
    return text


def _speak_scalar(sc: Scalar) -> str:
    value = (speak_number(sc.value) if isinstance(sc.value, Decimal)
             else str(sc.value))
    cmd = sc.command
    if isinstance(cmd, Aggregate):
        if cmd.fn == "count":
            text = f"There are {value} rows."
        else:
            text = f"The {FN_WORDS[cmd.fn]} {sc.units_label} is {value}."
    else:
        text = f"The {sc.units_label} is {value}."
    if sc.skipped_count > 0:
        text += f" Skipped {sc.skipped_count} cells that were not numbers."
    return text


def compose_clarification(label: str,
                          candidates: list[str] | None = None) -> str:
    """Prompt asking the user to define an unresolved column label."""
    if candidates:
        opts = " or ".join(candidates[:3])
        return (f"The column labeled {label} might mean {opts}. Please mouse "
                f"over the column labeled {label} and say: assign attribute "
                f"<name> to this column.")
    return (f"Please mouse over the column labeled {label} and say: "
            f"assign attribute <name> to this column.")


def build_patch(rt: ResultTable, source) -> list[dict]:
    """Row visibility/order instructions for in-place application."""
    pos = {id(row): i for i, row in enumerate(source.rows)}
    placement: dict[int, int] = {}
    for order, row in enumerate(rt.rows):
        src_index = pos.get(id(row))
        if src_index is not None:
            placement[src_index] = order
    patch = []
    for i in range(len(source.rows)):
        if i in placement:
            patch.append({"row_index": i, "visible": True,
                          "order": placement[i]})
        else:
            patch.append({"row_index": i, "visible": False, "order": -1})
    return patch


@dataclass
class Response:
    speech_text: str
    page_html: str | None = None
    in_place_patch: list[dict] | None = None
    clarification: dict | None = None


def build_response(outcome: Outcome, source_table=None) -> Response:
    """Map an outcome to exactly one Response."""
    speech = compose_speech(outcome)
    if isinstance(outcome, ResultTable):
        cmd = outcome.provenance_command
        target = getattr(cmd, "target", "new_table")
        if target == "in_place" and source_table is not None:
            return Response(speech_text=speech,
                            in_place_patch=build_patch(outcome, source_table))
        return Response(speech_text=speech,
                        page_html=render_result_page(outcome))
    if isinstance(outcome, NeedsClarification):
        return Response(speech_text=speech,
                        clarification={"prompt_id": outcome.prompt_id,
                                       "prompt_text": outcome.prompt_text})
    return Response(speech_text=speech)
