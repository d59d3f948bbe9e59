from __future__ import annotations

import re
from collections.abc import Sequence
from dataclasses import dataclass

from retrocollab.world.geometry import GridCell, GridDims

from .errors import PlanParseError, SourceSpan
from .plan import ActionPlan, AgentAction, Verb

__all__ = ["EXECUTE_MARKER", "extract_execute_block", "parse_plan", "render_plan"]

EXECUTE_MARKER = "EXECUTE"

_TOKEN = re.compile(r"\S+")
_NAME = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_COORD = r"\s*(-?[0-9]{1,6})\s*"
_WAYPOINT = re.compile(rf"\({_COORD},{_COORD},{_COORD}\)")
_ARROW = "->"

_REQUIRED: dict[Verb, frozenset[str]] = {
    Verb.PICK: frozenset({"object", "path"}),
    Verb.PLACE: frozenset({"object", "target"}),
    Verb.SWEEP: frozenset({"object"}),
    Verb.OPEN: frozenset({"target"}),
    Verb.MOVE: frozenset({"path"}),
    Verb.DUMP: frozenset({"path"}),
    Verb.WAIT: frozenset(),
}
_ALLOWED: dict[Verb, frozenset[str]] = {
    Verb.PICK: frozenset({"object", "path"}),
    Verb.PLACE: frozenset({"object", "target", "path"}),
    Verb.SWEEP: frozenset({"object", "path"}),
    Verb.OPEN: frozenset({"target", "path"}),
    Verb.MOVE: frozenset({"path"}),
    Verb.DUMP: frozenset({"path"}),
    Verb.WAIT: frozenset(),
}


@dataclass(slots=True)
class _Token:
    text: str
    col: int


def extract_execute_block(message_text: str) -> str | None:
    """Return the text after the last line reading ``EXECUTE``, or ``None``."""

    lines = message_text.split("\n")
    marker_index: int | None = None
    for index, line in enumerate(lines):
        if line.strip() == EXECUTE_MARKER:
            marker_index = index
    if marker_index is None:
        return None
    return "\n".join(lines[marker_index + 1 :])


def parse_plan(block_text: str, roster: Sequence[str], grid_dims: GridDims) -> ActionPlan:
    """Parse an EXECUTE block into an :class:`ActionPlan` ordered like ``roster``.

    One action per line::

        NAME <agent> ACTION <VERB> [<object>] [TO <target>] [PATH (x,y,z)->(x,y,z)->...]

    Raises :class:`PlanParseError` with a 1-based position on the first problem found.
    """

    if not roster:
        raise ValueError("roster must not be empty")
    by_agent: dict[str, AgentAction] = {}
    for line_no, raw_line in enumerate(block_text.split("\n"), start=1):
        line = raw_line.rstrip("\r")
        if not line.strip():
            continue
        action = _parse_line(line, line_no, roster, grid_dims, by_agent)
        by_agent[action.agent] = action

    missing = [name for name in roster if name not in by_agent]
    if missing:
        raise PlanParseError(
            "missing_agent",
            f"no action for {', '.join(missing)}; every agent needs exactly one line",
            SourceSpan(1, 1),
            missing[0],
        )
    return ActionPlan(tuple(by_agent[name] for name in roster), raw_text=block_text)


def render_plan(plan: ActionPlan, roster: Sequence[str] | None = None) -> str:
    """Canonical text of ``plan``: one line per agent, single spaces, uppercase verbs."""

    actions = list(plan.actions)
    if roster is not None:
        order = {name: index for index, name in enumerate(roster)}
        actions.sort(key=lambda action: order.get(action.agent, len(order)))
    return "\n".join(_render_action(action) for action in actions)


def _render_action(action: AgentAction) -> str:
    parts = ["NAME", action.agent, "ACTION", action.verb.value]
    if action.object is not None:
        parts.append(action.object)
    if action.target is not None:
        target = action.target
        parts += ["TO", target.render() if isinstance(target, GridCell) else target]
    if action.path:
        parts += ["PATH", _ARROW.join(cell.render() for cell in action.path)]
    return " ".join(parts)


def _parse_line(
    line: str,
    line_no: int,
    roster: Sequence[str],
    grid_dims: GridDims,
    seen: dict[str, AgentAction],
) -> AgentAction:
    tokens = [_Token(m.group(), m.start() + 1) for m in _TOKEN.finditer(line)]

    def fail(kind, message: str, token: _Token | None = None, col: int | None = None):
        column = col if col is not None else (token.col if token else 1)
        fragment = token.text if token else line[column - 1 : column + 15].strip()
        raise PlanParseError(kind, message, SourceSpan(line_no, column), fragment)

    head = tokens[0]
    if head.text.upper() != "NAME":
        fail("malformed_line", "each line must start with NAME", head)
    if len(tokens) < 2:
        fail("malformed_line", "NAME must be followed by an agent name", head)
    agent_token = tokens[1]
    agent = agent_token.text
    if agent not in roster:
        fail("unknown_agent", f"'{agent}' is not one of {', '.join(roster)}", agent_token)
    if agent in seen:
        fail("duplicate_agent", f"{agent} already has an action", agent_token)
    if len(tokens) < 3 or tokens[2].text.upper() != "ACTION":
        where = tokens[2] if len(tokens) > 2 else agent_token
        fail("malformed_line", "expected ACTION after the agent name", where)
    if len(tokens) < 4:
        fail("malformed_line", "ACTION must be followed by a verb", tokens[2])
    verb_token = tokens[3]
    try:
        verb = Verb(verb_token.text.upper())
    except ValueError:
        fail("unknown_verb", f"'{verb_token.text}' is not a known verb", verb_token)

    obj: str | None = None
    target: str | GridCell | None = None
    path: tuple[GridCell, ...] = ()
    present: dict[str, _Token] = {}
    index = 4
    while index < len(tokens):
        token = tokens[index]
        keyword = token.text.upper()
        if keyword == "PATH":
            if "path" in present:
                fail("malformed_line", "PATH given twice", token)
            present["path"] = token
            path = _parse_path(line, line_no, token, grid_dims)
            break
        if keyword == "TO":
            if "target" in present:
                fail("malformed_line", "TO given twice", token)
            if index + 1 >= len(tokens) or tokens[index + 1].text.upper() == "PATH":
                fail("missing_argument", "TO needs a target", token)
            present["target"] = token
            target = _parse_target(tokens[index + 1], line_no, grid_dims)
            index += 2
            continue
        if "object" in present or "target" in present:
            fail("malformed_line", f"unexpected token '{token.text}'", token)
        if not _NAME.fullmatch(token.text):
            fail("malformed_line", f"'{token.text}' is not a valid object name", token)
        present["object"] = token
        obj = token.text
        index += 1

    for argument, token in present.items():
        if argument not in _ALLOWED[verb]:
            fail("unexpected_argument", f"{verb.value} takes no {argument}", token)
    for argument in sorted(_REQUIRED[verb]):
        if argument not in present:
            fail("missing_argument", f"{verb.value} needs {_describe(argument)}", verb_token)

    return AgentAction(agent=agent, verb=verb, object=obj, target=target, path=path)


def _parse_target(token: _Token, line_no: int, grid_dims: GridDims) -> str | GridCell:
    if token.text.startswith("("):
        match = _WAYPOINT.fullmatch(token.text)
        if match is None:
            raise PlanParseError(
                "malformed_waypoint",
                "target cells look like (x,y,z)",
                SourceSpan(line_no, token.col),
                token.text,
            )
        cell = GridCell(*(int(v) for v in match.groups()))
        if not grid_dims.contains(cell):
            raise PlanParseError(
                "out_of_bounds",
                f"{cell} lies outside the {grid_dims.as_tuple()} grid",
                SourceSpan(line_no, token.col),
                token.text,
            )
        return cell
    if not _NAME.fullmatch(token.text):
        raise PlanParseError(
            "malformed_line",
            f"'{token.text}' is not a valid target name",
            SourceSpan(line_no, token.col),
            token.text,
        )
    return token.text


def _parse_path(
    line: str, line_no: int, keyword: _Token, grid_dims: GridDims
) -> tuple[GridCell, ...]:
    start = keyword.col - 1 + len(keyword.text)
    remainder = line[start:]
    if not remainder.strip():
        raise PlanParseError(
            "missing_argument",
            "PATH needs at least one waypoint",
            SourceSpan(line_no, keyword.col),
            keyword.text,
        )
    cells: list[GridCell] = []
    offset = start
    for piece in remainder.split(_ARROW):
        stripped = piece.strip()
        leading = len(piece) - len(piece.lstrip())
        # an empty piece sits next to an arrow; point at that arrow
        col = offset + leading + 1 if stripped else max(offset, start + 1)
        if not stripped:
            raise PlanParseError(
                "malformed_waypoint",
                "empty waypoint between arrows",
                SourceSpan(line_no, min(col, len(line))),
                _ARROW,
            )
        match = _WAYPOINT.fullmatch(stripped)
        if match is None:
            raise PlanParseError(
                "malformed_waypoint",
                "waypoints look like (x,y,z) joined by ->",
                SourceSpan(line_no, col),
                stripped[:24],
            )
        cell = GridCell(*(int(v) for v in match.groups()))
        if not grid_dims.contains(cell):
            raise PlanParseError(
                "out_of_bounds",
                f"{cell} lies outside the {grid_dims.as_tuple()} grid",
                SourceSpan(line_no, col),
                stripped,
            )
        if cells and cells[-1].l1(cell) > 1:
            raise PlanParseError(
                "non_adjacent_path",
                f"{cells[-1]} and {cell} are not neighbouring cells",
                SourceSpan(line_no, col),
                stripped,
            )
        cells.append(cell)
        offset += len(piece) + len(_ARROW)
    return tuple(cells)


def _describe(argument: str) -> str:
    return {"object": "an object", "target": "a TO target", "path": "a PATH"}[argument]
