from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from retrocollab.actions import (
    ActionPlan,
    AgentAction,
    PlanParseError,
    Verb,
    extract_execute_block,
    parse_plan,
    render_plan,
)
from retrocollab.world.geometry import UNIT_STEPS, GridCell, GridDims

ROSTER = ("Alice", "Bob", "Chad")
DIMS = GridDims()


def _parse(text: str, roster=ROSTER) -> ActionPlan:
    return parse_plan(text, roster, DIMS)


def _error(text: str, roster=ROSTER) -> PlanParseError:
    with pytest.raises(PlanParseError) as excinfo:
        _parse(text, roster)
    return excinfo.value


def test_parses_one_action_per_agent_in_roster_order():
    plan = _parse(
        "NAME Chad ACTION WAIT\n"
        "NAME Alice ACTION PICK cube_red PATH (1,0,2)->(1,1,2)->(1,1,1)\n"
        "NAME Bob ACTION PLACE cube_green TO pad_green PATH (3,0,2)->(3,0,1)\n"
    )

    assert plan.agents == ROSTER
    alice = plan.action_for("Alice")
    assert alice.verb is Verb.PICK
    assert alice.object == "cube_red"
    assert alice.path == (GridCell(1, 0, 2), GridCell(1, 1, 2), GridCell(1, 1, 1))
    bob = plan.action_for("Bob")
    assert bob.target == "pad_green"
    assert plan.action_for("Chad") == AgentAction("Chad", Verb.WAIT)
    assert plan.horizon == 3


def test_keywords_are_case_insensitive_and_whitespace_is_free():
    plan = _parse(
        "name Alice action move path ( 1, 0, 2 ) -> (1,0,3)\n"
        "\n"
        "Name Bob Action Open TO (3,4,1)\n"
        "NAME   Chad\tACTION wait\r\n"
    )
    assert plan.action_for("Alice").path == (GridCell(1, 0, 2), GridCell(1, 0, 3))
    assert plan.action_for("Bob").verb is Verb.OPEN
    assert plan.action_for("Bob").target == GridCell(3, 4, 1)


def test_missing_agent_points_at_the_block_start():
    error = _error("NAME Alice ACTION WAIT\nNAME Bob ACTION WAIT")
    assert error.kind == "missing_agent"
    assert (error.line, error.column) == (1, 1)
    assert error.fragment == "Chad"


def test_empty_block_reports_the_first_agent_at_the_start():
    error = _error("")
    assert error.kind == "missing_agent"
    assert (error.line, error.column) == (1, 1)
    assert error.fragment == "Alice"


@pytest.mark.parametrize(
    ("text", "kind", "line", "column"),
    [
        ("NAME Zed ACTION WAIT", "unknown_agent", 1, 6),
        ("NAME Alice ACTION WAIT\nNAME Alice ACTION WAIT", "duplicate_agent", 2, 6),
        ("NAME Alice ACTION JUMP", "unknown_verb", 1, 19),
        ("NAME Alice ACTION MOVE PATH (1,0,2)->(1,0", "malformed_waypoint", 1, 38),
        ("NAME Alice ACTION MOVE PATH (1,0,2)->(9,0,2)", "out_of_bounds", 1, 38),
        ("NAME Alice ACTION MOVE PATH (1,0,2)->(1,2,2)", "non_adjacent_path", 1, 38),
        ("NAME Alice ACTION PICK cube_red", "missing_argument", 1, 19),
        ("NAME Alice ACTION MOVE", "missing_argument", 1, 19),
        ("NAME Alice ACTION WAIT cube_red", "unexpected_argument", 1, 24),
        ("Alice ACTION WAIT", "malformed_line", 1, 1),
        ("NAME Alice DO WAIT", "malformed_line", 1, 12),
        ("NAME Alice ACTION MOVE PATH (123456,0,2)", "out_of_bounds", 1, 29),
    ],
)
def test_errors_carry_kind_and_position(text, kind, line, column):
    error = _error(text)
    assert error.kind == kind
    assert (error.line, error.column) == (line, column)


def test_oversized_coordinates_are_malformed_waypoints():
    path_error = _error("NAME Alice ACTION MOVE PATH (" + "9" * 5000 + ",0,2)")
    assert (path_error.kind, path_error.line, path_error.column) == ("malformed_waypoint", 1, 29)

    target_error = _error("NAME Bob ACTION OPEN TO (" + "4" * 4400 + ",4,1)")
    assert (target_error.kind, target_error.column) == ("malformed_waypoint", 25)


def test_error_render_names_the_problem():
    error = _error("NAME Zed ACTION WAIT")
    expected = "The plan could not be parsed (unknown_agent) at line 1, col 6"
    assert error.render().startswith(expected)
    assert error.to_dict()["fragment"] == "Zed"


def test_extract_execute_block_uses_the_last_marker():
    message = "Alice: first idea\nEXECUTE\nNAME Alice ACTION WAIT\nBob: no wait\n  EXECUTE  \nFINAL"
    assert extract_execute_block(message) == "FINAL"
    assert extract_execute_block("Alice: we should EXECUTE soon") is None
    assert extract_execute_block("EXECUTE") == ""


def test_render_plan_is_canonical():
    plan = ActionPlan(
        (
            AgentAction("Bob", Verb.PLACE, object="cup", target=GridCell(3, 1, 0)),
            AgentAction("Alice", Verb.MOVE, path=(GridCell(1, 0, 2), GridCell(1, 0, 1))),
        )
    )
    assert render_plan(plan, ("Alice", "Bob")) == (
        "NAME Alice ACTION MOVE PATH (1,0,2)->(1,0,1)\n"
        "NAME Bob ACTION PLACE cup TO (3,1,0)"
    )


_FUZZ_TOKENS = [
    "NAME", "name", "ACTION", "Alice", "Bob", "Chad", "Zed", "PICK", "place", "MOVE", "WAIT",
    "SWEEP", "DUMP", "OPEN", "TO", "PATH", "cube_red", "(1,0,2)", "(1,0,3)", "(9,9,9)", "->",
    "(1,0", "-1", "(-1,0,0)", "x!", "()", "(((", "EXECUTE", "\t", "\n", "->->", "é",
    "(1234567,0,2)", "(" + "9" * 5000 + ",0,0)",
]


def test_parser_is_total_on_random_text():
    rng = random.Random(1234)
    for _ in range(10_000):
        pieces = [rng.choice(_FUZZ_TOKENS) for _ in range(rng.randint(0, 24))]
        text = "".join(piece + rng.choice([" ", "", "\n"]) for piece in pieces)
        try:
            plan = _parse(text)
        except PlanParseError as exc:
            assert exc.line >= 1
            assert exc.column >= 1
            assert exc.line <= max(1, text.count("\n") + 1)
        else:
            assert plan.agents == ROSTER


_KEYWORDS = {"TO", "PATH"}
_names = st.from_regex(r"[a-z_][a-z0-9_]{0,8}", fullmatch=True).filter(
    lambda name: name.upper() not in _KEYWORDS
)
_cells = st.builds(
    GridCell,
    st.integers(0, DIMS.x - 1),
    st.integers(0, DIMS.y - 1),
    st.integers(0, DIMS.z - 1),
)


@st.composite
def _paths(draw) -> tuple[GridCell, ...]:
    cell = draw(_cells)
    path = [cell]
    for step in draw(st.lists(st.sampled_from([(0, 0, 0), *UNIT_STEPS]), max_size=6)):
        nxt = path[-1].offset(*step)
        if DIMS.contains(nxt):
            path.append(nxt)
    return tuple(path)


@st.composite
def _actions(draw, agent: str) -> AgentAction:
    verb = draw(st.sampled_from(list(Verb)))
    maybe_path = draw(st.one_of(st.just(()), _paths()))
    if verb is Verb.PICK:
        return AgentAction(agent, verb, object=draw(_names), path=draw(_paths()))
    if verb is Verb.PLACE:
        target = draw(st.one_of(_names, _cells))
        return AgentAction(agent, verb, object=draw(_names), target=target, path=maybe_path)
    if verb is Verb.SWEEP:
        return AgentAction(agent, verb, object=draw(_names), path=maybe_path)
    if verb is Verb.OPEN:
        return AgentAction(agent, verb, target=draw(_names), path=maybe_path)
    if verb in (Verb.MOVE, Verb.DUMP):
        return AgentAction(agent, verb, path=draw(_paths()))
    return AgentAction(agent, verb)


@st.composite
def _plans(draw) -> ActionPlan:
    return ActionPlan(tuple(draw(_actions(agent)) for agent in ROSTER))


@settings(max_examples=1000, deadline=None)
@given(_plans())
def test_rendered_plans_parse_back_unchanged(plan):
    assert _parse(render_plan(plan, ROSTER)) == plan
